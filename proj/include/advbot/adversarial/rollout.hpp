#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "advbot/common/parallel.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/detector/ops.hpp"
#include "advbot/generator/ops.hpp"

namespace advbot::adversarial {

using corpus::TokenId;
using corpus::TokenSeq;
using detector::DetectorModel;
using diff::LstmState;
using diff::Tensor;
using generator::DecodingConfig;
using generator::GeneratorModel;

// Detector-side cache for one (source, response) sample: the source encoding
// and the response LSTM state after each prefix length.
class DetectorContext {
 public:
  DetectorContext(const DetectorModel& det, const TokenSeq& source, const TokenSeq& response)
      : det_(&det), source_h_(detector::encode_source(det, source)) {
    const std::size_t d_h = det.config().hidden_dim;
    states_.push_back(LstmState::zeros(d_h));
    for (TokenId id : response.ids) states_.push_back(advance(states_.back(), id));
  }

  // Probability human of prefix[0:t) followed by `tail`.
  double score(std::size_t t, std::span<const TokenId> tail) const {
    if (t == 0 && tail.empty()) throw corpus::EmptySequenceError("detector: empty response");
    LstmState s = states_.at(t);
    for (TokenId id : tail) s = advance(s, id);
    return diff::stable_sigmoid(detector::logit_from_states(*det_, source_h_, s.h));
  }

 private:
  LstmState advance(const LstmState& s, TokenId id) const {
    return diff::lstm_cell_step(diff::kernel::embedding_lookup(det_->embedding.value, static_cast<std::size_t>(id)), s,
                                det_->response_rnn);
  }

  const DetectorModel* det_;
  Tensor source_h_;
  std::vector<LstmState> states_;
};

// Decoder states along a response: states[k] is the state before consuming
// the k-th decoder input (BOS, r_1, ..., r_T).
inline std::vector<LstmState> decoder_states(const GeneratorModel& bot, const TokenSeq& source,
                                             const TokenSeq& response) {
  std::vector<LstmState> states{generator::encode(bot, source)};
  TokenId prev = corpus::kBos;
  for (TokenId id : response.ids) {
    states.push_back(generator::step_distribution(bot, states.back(), prev).state);
    prev = id;
  }
  return states;
}

struct RolloutResult {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t rollouts = 0;  // 0 when the prefix is the complete response
};

namespace detail {

inline RolloutResult rollout_from(const GeneratorModel& bot, const DetectorContext& ctx,
                                  const std::vector<LstmState>& states, const TokenSeq& response, std::size_t t,
                                  std::size_t n_roll, std::uint64_t seed, const DecodingConfig& dec) {
  const TokenSeq prefix{std::vector<TokenId>(response.ids.begin(), response.ids.begin() + static_cast<long>(t))};
  std::vector<double> scores(n_roll);
  for (std::size_t k = 0; k < n_roll; ++k) {
    Rng rng(mix_seed(seed, {t, k}));
    const TokenSeq full = generator::continue_response(bot, states[t], prefix.ids.back(), prefix, dec, rng);
    scores[k] = ctx.score(t, std::span<const TokenId>(full.ids.data() + t, full.ids.size() - t));
  }
  const double n = static_cast<double>(n_roll);
  RolloutResult r;
  for (double p : scores) r.mean += p;
  r.mean /= n;
  r.rollouts = n_roll;
  // Two-pass variance: identical completions give exactly zero.
  if (n_roll > 1) {
    double ss = 0.0;
    for (double p : scores) ss += (p - r.mean) * (p - r.mean);
    r.standard_error = std::sqrt(ss / (n - 1) / n);
  }
  return r;
}

inline void check_prefix(const TokenSeq& prefix, const DecodingConfig& dec) {
  if (prefix.empty()) throw std::invalid_argument("rollout: prefix must hold at least one token");
  if (prefix.size() > dec.max_len) throw std::invalid_argument("rollout: prefix longer than max_len");
}

}  // namespace detail

// Expected detector probability_human of completions of `prefix` sampled from
// the bot. A prefix that is already complete (`complete`, or at max_len) is
// scored directly.
inline RolloutResult rollout_reward(const GeneratorModel& bot, const DetectorModel& det, const TokenSeq& source,
                                    const TokenSeq& prefix, std::size_t n_roll, std::uint64_t seed,
                                    const DecodingConfig& dec, bool complete = false) {
  detail::check_prefix(prefix, dec);
  if (n_roll == 0) throw std::invalid_argument("rollout: n_roll must be >= 1");
  dec.validate(bot);
  const DetectorContext ctx(det, source, prefix);
  if (complete || prefix.size() == dec.max_len) return {ctx.score(prefix.size(), {}), 0.0, 0};
  const auto states = decoder_states(bot, source, prefix);
  return detail::rollout_from(bot, ctx, states, prefix, prefix.size(), n_roll, seed, dec);
}

inline constexpr double kMaxEnumeration = 1e5;

// Exact expectation over all continuations of `prefix`, each weighted by its
// probability under the sampling policy.
inline double exact_reward_oracle(const GeneratorModel& bot, const DetectorModel& det, const TokenSeq& source,
                                  const TokenSeq& prefix, const DecodingConfig& dec, bool complete = false) {
  detail::check_prefix(prefix, dec);
  if (dec.mode != DecodingConfig::Mode::sample) throw std::invalid_argument("exact_reward_oracle: sampling policy only");
  const DetectorContext ctx(det, source, prefix);
  if (complete || prefix.size() == dec.max_len) return ctx.score(prefix.size(), {});
  const double remaining = static_cast<double>(dec.max_len - prefix.size());
  if (std::pow(static_cast<double>(bot.vocab_size()), remaining) > kMaxEnumeration) {
    throw std::invalid_argument("exact_reward_oracle: enumeration exceeds 1e5 continuations");
  }
  const auto states = decoder_states(bot, source, prefix);
  const std::size_t t0 = prefix.size();
  std::vector<TokenId> tail;
  // Recursion over continuation tokens; `state` is before consuming `prev`.
  auto visit = [&](auto&& self, const LstmState& state, TokenId prev) -> double {
    const auto step = generator::step_distribution(bot, state, prev);
    Tensor scaled(step.logits.shape());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = step.logits[i] / dec.temperature;
    Tensor p = diff::kernel::softmax_rows(scaled);
    if (t0 + tail.size() < dec.min_len) {
      p[static_cast<std::size_t>(corpus::kEos)] = 0.0;
      double z = 0.0;
      for (double v : p.data()) z += v;
      for (auto& v : p.storage()) v /= z;
    }
    double total = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) {
      if (p[v] == 0.0) continue;
      const auto id = static_cast<TokenId>(v);
      if (id == corpus::kEos) {
        total += p[v] * ctx.score(t0, tail);
        continue;
      }
      tail.push_back(id);
      const double value = t0 + tail.size() == dec.max_len ? ctx.score(t0, tail) : self(self, step.state, id);
      tail.pop_back();
      total += p[v] * value;
    }
    return total;
  };
  return visit(visit, states[t0], prefix.ids.back());
}

struct RewardEstimate {
  std::vector<double> rewards;    // one per response token
  std::vector<double> variances;  // variance of the per-position estimate (0 at the final position)
  std::size_t rollouts = 0;       // N_roll used for the non-final positions
};

// Per-token rewards for a sampled response: MC rollouts for each proper
// prefix, the detector score itself for the full response. Positions may run
// in parallel; each uses its own derived seed.
inline RewardEstimate estimate_rewards(const GeneratorModel& bot, const DetectorModel& det, const TokenSeq& source,
                                       const TokenSeq& response, std::size_t n_roll, std::uint64_t seed,
                                       const DecodingConfig& dec, unsigned threads = 1) {
  if (response.empty()) throw std::invalid_argument("estimate_rewards: empty response");
  if (n_roll == 0) throw std::invalid_argument("estimate_rewards: n_roll must be >= 1");
  const DetectorContext ctx(det, source, response);
  const auto states = decoder_states(bot, source, response);
  const std::size_t T = response.size();
  RewardEstimate est;
  est.rewards.assign(T, 0.0);
  est.variances.assign(T, 0.0);
  est.rollouts = n_roll;
  est.rewards[T - 1] = ctx.score(T, {});
  parallel_for(T - 1, threads, [&](std::size_t i) {
    const auto r = detail::rollout_from(bot, ctx, states, response, i + 1, n_roll, seed, dec);
    est.rewards[i] = r.mean;
    est.variances[i] = r.standard_error * r.standard_error;
  });
  return est;
}

}  // namespace advbot::adversarial
