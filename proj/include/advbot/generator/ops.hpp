#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advbot/common/csv.hpp"
#include "advbot/common/error.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/corpus/tokenize.hpp"
#include "advbot/corpus/types.hpp"
#include "advbot/diffcore/optimizer.hpp"
#include "advbot/diffcore/tape.hpp"
#include "advbot/generator/model.hpp"

namespace advbot::generator {

using corpus::ConversationPair;
using diff::Tape;
using diff::Var;

// ---------------------------------------------------------------------------
// Forward (tape-free) path.

inline LstmState encode(const GeneratorModel& m, const TokenSeq& source) {
  if (source.empty()) throw corpus::EmptySequenceError("encode: empty source");
  LstmState s = LstmState::zeros(m.config().hidden_dim);
  for (TokenId id : source.ids) {
    s = diff::lstm_cell_step(diff::kernel::embedding_lookup(m.embedding.value, static_cast<std::size_t>(id)), s,
                             m.encoder);
  }
  return s;
}

struct StepOutput {
  Tensor logits;
  Tensor probs;
  LstmState state;
};

// One decoder step: feeds `prev_token` and returns D(. | prefix, source).
inline StepOutput step_distribution(const GeneratorModel& m, const LstmState& state, TokenId prev_token) {
  using namespace diff::kernel;
  if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= m.vocab_size()) {
    throw std::invalid_argument("step_distribution: token id out of range");
  }
  StepOutput out;
  out.state = diff::lstm_cell_step(embedding_lookup(m.embedding.value, static_cast<std::size_t>(prev_token)), state,
                                   m.decoder);
  out.logits = add(matmul(m.out_weight.value, out.state.h), m.out_bias.value);
  out.probs = softmax_rows(out.logits);
  return out;
}

// log D(target + EOS | source), teacher forced from BOS.
inline double sequence_log_prob(const GeneratorModel& m, const TokenSeq& source, const TokenSeq& target) {
  using namespace diff::kernel;
  LstmState s = encode(m, source);
  TokenId prev = corpus::kBos;
  double total = 0.0;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const TokenId y = t < target.size() ? target[t] : corpus::kEos;
    auto step = step_distribution(m, s, prev);
    total += log_softmax_rows(step.logits)[static_cast<std::size_t>(y)];
    s = std::move(step.state);
    prev = y;
  }
  return total;
}

inline double sequence_log_prob(const GeneratorModel& m, const ConversationPair& pair) {
  return sequence_log_prob(m, pair.source, pair.target);
}

// exp(mean per-token NLL), EOS included.
inline double perplexity(const GeneratorModel& m, std::span<const ConversationPair> corpus) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& p : corpus) {
    nll -= sequence_log_prob(m, p);
    tokens += p.target.size() + 1;
  }
  return std::exp(nll / static_cast<double>(tokens));
}

inline double mean_token_nll(const GeneratorModel& m, std::span<const ConversationPair> corpus) {
  return std::log(perplexity(m, corpus));
}

// ---------------------------------------------------------------------------
// Decoding.

struct DecodingConfig {
  enum class Mode { sample, greedy };
  Mode mode = Mode::sample;
  double temperature = 1.0;
  std::size_t max_len = corpus::kDefaultMaxLen;
  // EOS is masked until this many tokens have been emitted.
  std::size_t min_len = 1;
  std::uint64_t seed = 0;

  void validate(const GeneratorModel& m) const {
    if (mode == Mode::sample && !(temperature > 0.0 && std::isfinite(temperature))) {
      throw std::invalid_argument("DecodingConfig: temperature must be finite and positive");
    }
    if (max_len == 0 || max_len > m.config().max_len) {
      throw std::invalid_argument("DecodingConfig: max_len must be in [1, L_max]");
    }
    if (min_len > max_len) throw std::invalid_argument("DecodingConfig: min_len > max_len");
  }
};

// Greedy: argmax, lowest id on ties. Sample: softmax(logits / T).
inline TokenId choose_token(const Tensor& logits, const DecodingConfig& cfg, bool allow_eos, Rng& rng) {
  const std::size_t v = logits.size();
  if (cfg.mode == DecodingConfig::Mode::greedy) {
    std::size_t best = 0;
    double best_v = -INFINITY;
    for (std::size_t i = 0; i < v; ++i) {
      if (!allow_eos && static_cast<TokenId>(i) == corpus::kEos) continue;
      if (logits[i] > best_v) {
        best_v = logits[i];
        best = i;
      }
    }
    return static_cast<TokenId>(best);
  }
  Tensor scaled(logits.shape());
  for (std::size_t i = 0; i < v; ++i) scaled[i] = logits[i] / cfg.temperature;
  Tensor p = diff::kernel::softmax_rows(scaled);
  if (!allow_eos) p[static_cast<std::size_t>(corpus::kEos)] = 0.0;
  return static_cast<TokenId>(rng.categorical(p.data()));
}

// Continues a response whose emitted prefix is `prefix`; `state` is the decoder
// state after consuming BOS and every prefix token except the last, and
// `prev` is the last emitted token (BOS if none).
inline TokenSeq continue_response(const GeneratorModel& m, LstmState state, TokenId prev, TokenSeq prefix,
                                  const DecodingConfig& cfg, Rng& rng) {
  while (prefix.size() < cfg.max_len) {
    auto step = step_distribution(m, state, prev);
    const TokenId next = choose_token(step.logits, cfg, prefix.size() >= cfg.min_len, rng);
    if (next == corpus::kEos) break;
    prefix.ids.push_back(next);
    state = std::move(step.state);
    prev = next;
  }
  return prefix;
}

inline TokenSeq sample_response(const GeneratorModel& m, const TokenSeq& source, const DecodingConfig& cfg) {
  cfg.validate(m);
  Rng rng(cfg.seed);
  return continue_response(m, encode(m, source), corpus::kBos, {}, cfg, rng);
}

// ---------------------------------------------------------------------------
// Tape path.

inline Var encode(Tape& t, GeneratorModel& m, const TokenSeq& source, Var* c_out) {
  if (source.empty()) throw corpus::EmptySequenceError("encode: empty source");
  const std::size_t d_h = m.config().hidden_dim;
  diff::LstmVars s{t.constant(Tensor({d_h})), t.constant(Tensor({d_h}))};
  for (TokenId id : source.ids) {
    s = diff::lstm_cell_step(t, t.embedding(m.embedding, static_cast<std::size_t>(id)), s, m.encoder);
  }
  *c_out = s.c;
  return s.h;
}

// Per-action log-probabilities of `actions` (teacher forced from BOS).
inline std::vector<Var> action_log_probs(Tape& t, GeneratorModel& m, const TokenSeq& source,
                                         std::span<const TokenId> actions) {
  Var c;
  Var h = encode(t, m, source, &c);
  diff::LstmVars s{h, c};
  TokenId prev = corpus::kBos;
  std::vector<Var> out;
  out.reserve(actions.size());
  for (TokenId y : actions) {
    s = diff::lstm_cell_step(t, t.embedding(m.embedding, static_cast<std::size_t>(prev)), s, m.decoder);
    const Var logits = t.add(t.matmul(t.param(m.out_weight), s.h), t.param(m.out_bias));
    out.push_back(t.pick(t.log_softmax_rows(logits), static_cast<std::size_t>(y)));
    prev = y;
  }
  return out;
}

inline std::vector<TokenId> with_eos(const TokenSeq& seq) {
  std::vector<TokenId> a(seq.ids);
  a.push_back(corpus::kEos);
  return a;
}

// Sum of -log D(r_t | ...) over target + EOS.
inline Var sequence_nll(Tape& t, GeneratorModel& m, const ConversationPair& pair) {
  const auto actions = with_eos(pair.target);
  const auto lps = action_log_probs(t, m, pair.source, actions);
  Var total = lps[0];
  for (std::size_t i = 1; i < lps.size(); ++i) total = t.add(total, lps[i]);
  return t.scale(total, -1.0);
}

// ---------------------------------------------------------------------------
// MLE pretraining.

struct MleConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  diff::OptimizerConfig optimizer = diff::OptimizerConfig::adam(1e-3);
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double nll = 0.0;  // mean per-token NLL over the corpus after the epoch
  double perplexity = 0.0;
};

struct PretrainResult {
  std::vector<EpochRecord> trace;  // row 0 is the untrained model
  std::optional<std::string> aborted;
};

inline std::string epoch_trace_csv(const std::vector<EpochRecord>& trace) {
  std::vector<csv::Row> rows{{"epoch", "nll", "perplexity"}};
  for (const auto& r : trace) {
    rows.push_back({std::to_string(r.epoch), csv::format_double(r.nll), csv::format_double(r.perplexity)});
  }
  return csv::to_string(rows);
}

// Teacher-forced minimization of the mean per-token NLL over shuffled
// mini-batches. Stops early (with the trace so far) if the loss goes non-finite.
inline PretrainResult pretrain_mle(GeneratorModel& m, std::span<const ConversationPair> corpus,
                                   const MleConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("pretrain_mle: empty corpus");
  if (cfg.batch_size == 0) throw std::invalid_argument("pretrain_mle: batch_size must be positive");
  PretrainResult result;
  diff::Optimizer opt(cfg.optimizer);
  const auto params = m.parameters();
  Rng rng(derive_seed(cfg.seed, "pretrain_mle"));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  try {
    const double nll0 = mean_token_nll(m, corpus);
    result.trace.push_back({0, nll0, std::exp(nll0)});
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        std::size_t tokens = 0;
        for (std::size_t k = start; k < end; ++k) tokens += corpus[order[k]].target.size() + 1;
        diff::zero_grads(params);
        for (std::size_t k = start; k < end; ++k) {
          Tape t;
          Var loss = t.scale(sequence_nll(t, m, corpus[order[k]]), 1.0 / static_cast<double>(tokens));
          t.backward(loss);
        }
        opt.step(params);
      }
      const double nll = mean_token_nll(m, corpus);
      result.trace.push_back({epoch, nll, std::exp(nll)});
    }
  } catch (const NumericError& e) {
    result.aborted = e.what();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Policy gradient.

// Surrogate loss -sum_t (reward_t - baseline) log D(a_t | ...) over the sampled
// response plus its closing EOS; the EOS action shares the final reward.
inline Var policy_surrogate(Tape& t, GeneratorModel& m, const TokenSeq& source, const TokenSeq& response,
                            std::span<const double> rewards, double baseline) {
  if (rewards.size() != response.size()) {
    throw std::invalid_argument("policy_gradient: " + std::to_string(rewards.size()) + " rewards for " +
                                std::to_string(response.size()) + " tokens");
  }
  if (response.empty()) throw std::invalid_argument("policy_gradient: empty response");
  const auto actions = with_eos(response);
  const auto lps = action_log_probs(t, m, source, actions);
  Var total;
  for (std::size_t i = 0; i < lps.size(); ++i) {
    const double advantage = (i < rewards.size() ? rewards[i] : rewards.back()) - baseline;
    const Var term = t.scale(lps[i], -advantage);
    total = i == 0 ? term : t.add(total, term);
  }
  return total;
}

struct PolicySample {
  TokenSeq source;
  TokenSeq response;
  std::vector<double> rewards;
};

// One optimizer step on the mean surrogate over the batch.
inline void policy_gradient_update(GeneratorModel& m, std::span<const PolicySample> batch, double baseline,
                                   diff::Optimizer& opt) {
  if (batch.empty()) return;
  const auto params = m.parameters();
  diff::zero_grads(params);
  for (const auto& s : batch) {
    Tape t;
    Var loss = t.scale(policy_surrogate(t, m, s.source, s.response, s.rewards, baseline),
                       1.0 / static_cast<double>(batch.size()));
    t.backward(loss);
  }
  opt.step(params);
}

inline void policy_gradient_update(GeneratorModel& m, const TokenSeq& source, const TokenSeq& response,
                                   std::span<const double> rewards, double baseline, diff::Optimizer& opt) {
  const PolicySample s{source, response, std::vector<double>(rewards.begin(), rewards.end())};
  policy_gradient_update(m, std::span<const PolicySample>(&s, 1), baseline, opt);
}

// Teacher-forced MLE step on a batch of real pairs (mean per-token NLL).
inline double mle_step(GeneratorModel& m, std::span<const ConversationPair> batch, diff::Optimizer& opt) {
  if (batch.empty()) return 0.0;
  const auto params = m.parameters();
  diff::zero_grads(params);
  std::size_t tokens = 0;
  for (const auto& p : batch) tokens += p.target.size() + 1;
  double total = 0.0;
  for (const auto& p : batch) {
    Tape t;
    Var loss = t.scale(sequence_nll(t, m, p), 1.0 / static_cast<double>(tokens));
    total += loss.value().item();
    t.backward(loss);
  }
  opt.step(params);
  return total;
}

}  // namespace advbot::generator
