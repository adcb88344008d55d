#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "advbot/analysis/auc.hpp"
#include "advbot/common/csv.hpp"
#include "advbot/common/error.hpp"
#include "advbot/common/parallel.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/corpus/types.hpp"
#include "advbot/detector/model.hpp"
#include "advbot/diffcore/optimizer.hpp"
#include "advbot/diffcore/tape.hpp"
#include "advbot/generator/ops.hpp"

namespace advbot::detector {

using corpus::ConversationPair;
using corpus::LabeledExample;
using corpus::Label;
using diff::Tape;
using diff::Var;

inline constexpr double kDefaultThreshold = 0.5;

struct DetectionScore {
  double probability_human = 0.5;
  double threshold = kDefaultThreshold;
  Label predicted_label = Label::human;
};

inline DetectionScore make_score(double p, double threshold = kDefaultThreshold) {
  return {p, threshold, p >= threshold ? Label::human : Label::bot};
}

// ---------------------------------------------------------------------------
// Forward (tape-free) path.

inline Tensor run_lstm(const DetectorModel& m, const LstmParams& rnn, const TokenSeq& seq, const char* what) {
  if (seq.empty()) throw corpus::EmptySequenceError(std::string("detector: empty ") + what);
  LstmState s = LstmState::zeros(m.config().hidden_dim);
  for (TokenId id : seq.ids) {
    s = diff::lstm_cell_step(diff::kernel::embedding_lookup(m.embedding.value, static_cast<std::size_t>(id)), s, rnn);
  }
  return std::move(s.h);
}

inline Tensor encode_source(const DetectorModel& m, const TokenSeq& source) {
  return run_lstm(m, m.source_rnn, source, "source");
}

inline double logit_from_states(const DetectorModel& m, const Tensor& source_h, const Tensor& response_h) {
  using namespace diff::kernel;
  const Tensor z = add(matmul(m.head_weight.value, concat(source_h, response_h)), m.head_bias.value);
  return z[0];
}

inline double logit(const DetectorModel& m, const ConversationPair& pair) {
  return logit_from_states(m, encode_source(m, pair.source), run_lstm(m, m.response_rnn, pair.target, "response"));
}

// Scoring with a precomputed source encoding (rollouts score many responses
// against one source).
inline double probability_human(const DetectorModel& m, const Tensor& source_h, const TokenSeq& response) {
  return diff::stable_sigmoid(logit_from_states(m, source_h, run_lstm(m, m.response_rnn, response, "response")));
}

inline double probability_human(const DetectorModel& m, const ConversationPair& pair) {
  return diff::stable_sigmoid(logit(m, pair));
}

inline DetectionScore score(const DetectorModel& m, const ConversationPair& pair,
                            double threshold = kDefaultThreshold) {
  return make_score(probability_human(m, pair), threshold);
}

inline std::vector<double> score_all(const DetectorModel& m, std::span<const ConversationPair> pairs,
                                     unsigned threads = 1) {
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) { out[i] = probability_human(m, pairs[i]); });
  return out;
}

inline std::vector<double> score_all(const DetectorModel& m, std::span<const LabeledExample> examples,
                                     unsigned threads = 1) {
  std::vector<double> out(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) { out[i] = probability_human(m, examples[i].pair); });
  return out;
}

// ---------------------------------------------------------------------------
// Loss.

// Mean binary cross-entropy over given probabilities; logs clamped at 1e-300.
inline double binary_cross_entropy(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("binary_cross_entropy: length mismatch");
  if (probs.empty()) throw std::invalid_argument("binary_cross_entropy: empty batch");
  constexpr double kFloor = 1e-300;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = labels[i];
    total -= y * std::log(std::max(probs[i], kFloor)) + (1.0 - y) * std::log(std::max(1.0 - probs[i], kFloor));
  }
  return total / static_cast<double>(probs.size());
}

// -log p for human, -log(1-p) for bot, computed from the logit.
inline double example_loss(double z, Label y) {
  return y == Label::human ? diff::softplus(-z) : diff::softplus(z);
}

inline double detector_loss(const DetectorModel& m, std::span<const LabeledExample> batch) {
  if (batch.empty()) throw std::invalid_argument("detector_loss: empty batch");
  double total = 0.0;
  for (const auto& e : batch) total += example_loss(logit(m, e.pair), e.label);
  return total / static_cast<double>(batch.size());
}

inline Var run_lstm(Tape& t, DetectorModel& m, LstmParams& rnn, const TokenSeq& seq, const char* what) {
  if (seq.empty()) throw corpus::EmptySequenceError(std::string("detector: empty ") + what);
  const std::size_t d_h = m.config().hidden_dim;
  diff::LstmVars s{t.constant(Tensor({d_h})), t.constant(Tensor({d_h}))};
  for (TokenId id : seq.ids) {
    s = diff::lstm_cell_step(t, t.embedding(m.embedding, static_cast<std::size_t>(id)), s, rnn);
  }
  return s.h;
}

inline Var logit(Tape& t, DetectorModel& m, const ConversationPair& pair) {
  const Var hs = run_lstm(t, m, m.source_rnn, pair.source, "source");
  const Var hr = run_lstm(t, m, m.response_rnn, pair.target, "response");
  return t.add(t.matmul(t.param(m.head_weight), t.concat(hs, hr)), t.param(m.head_bias));
}

inline Var example_loss(Tape& t, DetectorModel& m, const LabeledExample& e) {
  const Var z = logit(t, m, e.pair);
  return t.scale(t.sum(t.log_sigmoid(e.label == Label::human ? z : t.scale(z, -1.0))), -1.0);
}

// Mean loss over the batch, recorded on one tape.
inline Var detector_loss(Tape& t, DetectorModel& m, std::span<const LabeledExample> batch) {
  if (batch.empty()) throw std::invalid_argument("detector_loss: empty batch");
  Var total = example_loss(t, m, batch[0]);
  for (std::size_t i = 1; i < batch.size(); ++i) total = t.add(total, example_loss(t, m, batch[i]));
  return t.scale(total, 1.0 / static_cast<double>(batch.size()));
}

// One optimizer step on the mean loss; returns the loss before the update.
inline double detector_step(DetectorModel& m, std::span<const LabeledExample> batch, diff::Optimizer& opt) {
  if (batch.empty()) throw std::invalid_argument("detector_step: empty batch");
  const auto params = m.parameters();
  diff::zero_grads(params);
  double total = 0.0;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& e : batch) {
    Tape t;
    Var loss = t.scale(example_loss(t, m, e), w);
    total += loss.value().item();
    t.backward(loss);
  }
  if (!std::isfinite(total)) throw NumericError("detector loss is not finite");
  opt.step(params);
  return total;
}

// ---------------------------------------------------------------------------
// Training.

struct DetectorTrainConfig {
  std::size_t steps = 200;
  std::size_t batch_size = 64;
  diff::OptimizerConfig optimizer = diff::OptimizerConfig::adam(1e-3);
  std::uint64_t seed = 0;
  // Used only when fakes are sampled from a generator.
  generator::DecodingConfig decoding{};
};

struct DetectorTrainTrace {
  std::vector<double> losses;  // one entry per completed step (pre-update batch loss)
  std::optional<std::string> aborted;
};

inline std::string loss_trace_csv(const std::vector<double>& losses) {
  std::vector<csv::Row> rows{{"step", "loss"}};
  for (std::size_t i = 0; i < losses.size(); ++i) rows.push_back({std::to_string(i + 1), csv::format_double(losses[i])});
  return csv::to_string(rows);
}

// Either a generator sampled per step or a fixed list of fake pairs.
using FakeSource = std::variant<const generator::GeneratorModel*, std::span<const ConversationPair>>;

inline LabeledExample as_example(ConversationPair pair, Label label,
                                 corpus::Provenance prov = corpus::Provenance::genuine) {
  LabeledExample e;
  e.pair = std::move(pair);
  e.label = label;
  e.provenance = prov;
  e.domain = corpus::DomainTag(label == Label::human ? corpus::DomainTag::Kind::human
                                                     : corpus::DomainTag::Kind::bot_combined);
  return e;
}

// Response sampled from `bot` for `source`, wrapped as a bot-labelled pair.
inline ConversationPair generated_pair(const generator::GeneratorModel& bot, const TokenSeq& source,
                                       generator::DecodingConfig dec, std::uint64_t seed) {
  dec.seed = seed;
  ConversationPair p;
  p.source = source;
  p.target = generator::sample_response(bot, source, dec);
  if (p.target.empty()) p.target.ids.push_back(corpus::kUnk);
  return p;
}

// Balanced mini-batches: half real (label human), half fake (label bot). With
// a generator as fake source, fakes answer the same sources as the reals.
inline DetectorTrainTrace pretrain_detector(DetectorModel& m, std::span<const ConversationPair> real,
                                            const FakeSource& fake, const DetectorTrainConfig& cfg) {
  if (real.empty()) throw std::invalid_argument("pretrain_detector: no real pairs");
  if (cfg.batch_size < 2) throw std::invalid_argument("pretrain_detector: batch_size must be >= 2");
  if (const auto* list = std::get_if<std::span<const ConversationPair>>(&fake); list && list->empty()) {
    throw std::invalid_argument("pretrain_detector: empty fake list");
  }
  DetectorTrainTrace trace;
  diff::Optimizer opt(cfg.optimizer);
  Rng rng(derive_seed(cfg.seed, "pretrain_detector"));
  const std::size_t n_real = cfg.batch_size / 2;
  const std::size_t n_fake = cfg.batch_size - n_real;
  try {
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      std::vector<LabeledExample> batch;
      batch.reserve(cfg.batch_size);
      std::vector<std::size_t> real_idx;
      for (std::size_t k = 0; k < n_real; ++k) {
        real_idx.push_back(rng.below(real.size()));
        batch.push_back(as_example(real[real_idx.back()], Label::human));
      }
      for (std::size_t k = 0; k < n_fake; ++k) {
        if (const auto* bot = std::get_if<const generator::GeneratorModel*>(&fake)) {
          const auto& src = real[real_idx[k % real_idx.size()]].source;
          batch.push_back(as_example(generated_pair(**bot, src, cfg.decoding, mix_seed(cfg.seed, {step, k})),
                                     Label::bot, corpus::Provenance::generated_attack));
        } else {
          const auto& list = std::get<std::span<const ConversationPair>>(fake);
          batch.push_back(as_example(list[rng.below(list.size())], Label::bot));
        }
      }
      trace.losses.push_back(detector_step(m, batch, opt));
    }
  } catch (const NumericError& e) {
    trace.aborted = e.what();
  }
  return trace;
}

// Supervised training on labelled examples; each mini-batch draws half its
// members from each class present.
inline DetectorTrainTrace train_detector(DetectorModel& m, std::span<const LabeledExample> data,
                                         const DetectorTrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train_detector: empty dataset");
  if (cfg.batch_size == 0) throw std::invalid_argument("train_detector: batch_size must be positive");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) by_class[corpus::as_int(data[i].label)].push_back(i);
  DetectorTrainTrace trace;
  diff::Optimizer opt(cfg.optimizer);
  Rng rng(derive_seed(cfg.seed, "train_detector"));
  try {
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      std::vector<LabeledExample> batch;
      batch.reserve(cfg.batch_size);
      for (std::size_t k = 0; k < cfg.batch_size; ++k) {
        const auto& pool = by_class[0].empty() ? by_class[1]
                           : by_class[1].empty() ? by_class[0]
                                                 : by_class[k % 2];
        batch.push_back(data[pool[rng.below(pool.size())]]);
      }
      trace.losses.push_back(detector_step(m, batch, opt));
    }
  } catch (const NumericError& e) {
    trace.aborted = e.what();
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct Evaluation {
  std::size_t n = 0;
  double accuracy = 0.0;
  std::optional<double> auc;  // undefined when a class is absent
  std::optional<double> mean_prob_human;  // mean score over human-labelled examples
  std::optional<double> mean_prob_bot;    // mean score over bot-labelled examples
};

inline Evaluation evaluate_scores(std::span<const double> probs, std::span<const int> labels,
                                  double threshold = kDefaultThreshold) {
  if (probs.size() != labels.size()) throw std::invalid_argument("evaluate: length mismatch");
  if (probs.empty()) throw std::invalid_argument("evaluate: empty test set");
  Evaluation ev;
  ev.n = probs.size();
  double correct = 0.0, sum[2] = {0.0, 0.0}, count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int pred = probs[i] >= threshold ? 1 : 0;
    correct += pred == labels[i] ? 1.0 : 0.0;
    sum[labels[i]] += probs[i];
    count[labels[i]] += 1.0;
  }
  ev.accuracy = correct / static_cast<double>(ev.n);
  ev.auc = analysis::auc_roc(probs, labels);
  if (count[1] > 0) ev.mean_prob_human = sum[1] / count[1];
  if (count[0] > 0) ev.mean_prob_bot = sum[0] / count[0];
  return ev;
}

inline std::vector<int> labels_of(std::span<const LabeledExample> examples) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(corpus::as_int(e.label));
  return out;
}

inline Evaluation evaluate(const DetectorModel& m, std::span<const LabeledExample> testset, unsigned threads = 1) {
  const auto probs = score_all(m, testset, threads);
  const auto labels = labels_of(testset);
  return evaluate_scores(probs, labels);
}

}  // namespace advbot::detector
