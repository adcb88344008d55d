#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "advbot/adversarial/rollout.hpp"
#include "advbot/common/csv.hpp"
#include "advbot/common/error.hpp"
#include "advbot/common/svg.hpp"
#include "advbot/detector/ops.hpp"
#include "advbot/generator/ops.hpp"

namespace advbot::adversarial {

using corpus::ConversationPair;
using corpus::LabeledExample;

struct GameConfig {
  std::size_t iterations = 50;
  std::size_t bd_steps = 1;     // detector updates per iteration
  std::size_t b_steps = 1;      // bot updates per iteration
  std::size_t n_roll = 16;      // rollouts per position
  std::size_t batch_size = 64;  // pairs per step (detector batches hold this many real plus as many fake)
  std::size_t baseline_window = 64;
  // Algorithm 1 also updates the detector inside the bot loop.
  bool detector_update_in_b_steps = true;
  // Teacher-forced steps on the real batch after each policy-gradient step (0 disables).
  std::size_t teacher_forcing_steps = 0;
  std::uint64_t seed = 0;
  diff::OptimizerConfig bot_optimizer = diff::OptimizerConfig::adam(1e-3);
  diff::OptimizerConfig detector_optimizer = diff::OptimizerConfig::adam(1e-3);
  generator::DecodingConfig decoding{};
  std::size_t metric_samples = 64;  // held-out pairs for the cosine metric
  unsigned threads = 1;
  bool record_timing = false;  // wall-clock columns are 0 unless set

  void validate(const GeneratorModel& bot) const {
    if (iterations == 0 || bd_steps == 0 || b_steps == 0 || n_roll == 0 || batch_size == 0 ||
        baseline_window == 0 || metric_samples == 0) {
      throw ConfigError("game: iterations, bd_steps, b_steps, n_roll, batch_size, baseline_window and "
                        "metric_samples must all be >= 1");
    }
    decoding.validate(bot);
  }
};

struct GameData {
  std::vector<ConversationPair> real;     // positive examples for the detector
  std::vector<ConversationPair> heldout;  // perplexity and cosine metrics
};

struct TraceRecord {
  std::size_t iteration = 0;
  double detector_loss = 0.0;
  double mean_reward = 0.0;
  double perplexity = 0.0;
  double cosine_sim = 0.0;
  double bot_ms = 0.0;
  double detector_ms = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct TrainingTrace {
  std::vector<TraceRecord> records;
  std::optional<std::string> aborted;
};

// ---------------------------------------------------------------------------
// Metrics.

inline std::vector<double> mean_embedding(const GeneratorModel& bot, const TokenSeq& seq) {
  const std::size_t d = bot.config().embed_dim;
  std::vector<double> v(d, 0.0);
  if (seq.empty()) return v;
  for (TokenId id : seq.ids) {
    for (std::size_t j = 0; j < d; ++j) v[j] += bot.embedding.value.at(static_cast<std::size_t>(id), j);
  }
  for (auto& x : v) x /= static_cast<double>(seq.size());
  return v;
}

// nullopt if either vector is zero.
inline std::optional<double> cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct CosineMetric {
  double mean = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};

// Cosine between mean-pooled bot embeddings of a generated response and of
// the true response, averaged over the first n_samples pairs of a seeded
// shuffle of `real`.
inline CosineMetric cosine_similarity_metric(const GeneratorModel& bot, std::span<const ConversationPair> real,
                                             std::size_t n_samples, std::uint64_t seed,
                                             const DecodingConfig& dec = {}) {
  if (n_samples == 0) throw std::invalid_argument("cosine_similarity_metric: n_samples must be >= 1");
  if (real.empty()) throw std::invalid_argument("cosine_similarity_metric: no pairs");
  std::vector<std::size_t> order(real.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "cosine.order"));
  rng.shuffle(order);
  CosineMetric m;
  double sum = 0.0;
  for (std::size_t k = 0; k < std::min(n_samples, order.size()); ++k) {
    const auto& pair = real[order[k]];
    DecodingConfig d = dec;
    d.seed = mix_seed(seed, {k});
    const TokenSeq generated = generator::sample_response(bot, pair.source, d);
    const auto c = cosine(mean_embedding(bot, generated), mean_embedding(bot, pair.target));
    if (!c) {
      ++m.skipped;
      continue;
    }
    sum += *c;
    ++m.pairs;
  }
  m.mean = m.pairs ? sum / static_cast<double>(m.pairs) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Game.

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

// Mutable state carried across rounds: optimizer moments, reward baseline
// window and the round counter.
struct GameState {
  explicit GameState(const GameConfig& cfg)
      : bot_opt(cfg.bot_optimizer), detector_opt(cfg.detector_optimizer) {}

  diff::Optimizer bot_opt;
  diff::Optimizer detector_opt;
  std::deque<double> recent_rewards;
  std::size_t rounds = 0;

  double baseline(std::span<const double> fallback) const {
    if (recent_rewards.empty()) {
      return fallback.empty() ? 0.5 : std::accumulate(fallback.begin(), fallback.end(), 0.0) /
                                          static_cast<double>(fallback.size());
    }
    return std::accumulate(recent_rewards.begin(), recent_rewards.end(), 0.0) /
           static_cast<double>(recent_rewards.size());
  }
};

struct FakeBatch {
  std::vector<std::size_t> indices;  // into GameData::real
  std::vector<TokenSeq> responses;
};

inline FakeBatch sample_fakes(const GeneratorModel& bot, const GameData& data, const GameConfig& cfg,
                              std::uint64_t seed) {
  Rng rng(derive_seed(seed, "batch"));
  FakeBatch b;
  for (std::size_t k = 0; k < cfg.batch_size; ++k) {
    b.indices.push_back(rng.below(data.real.size()));
    DecodingConfig d = cfg.decoding;
    d.seed = mix_seed(seed, {k});
    TokenSeq r = generator::sample_response(bot, data.real[b.indices.back()].source, d);
    if (r.empty()) r.ids.push_back(corpus::kUnk);
    b.responses.push_back(std::move(r));
  }
  return b;
}

inline std::vector<LabeledExample> detector_batch(const GameData& data, const FakeBatch& fakes) {
  std::vector<LabeledExample> batch;
  for (std::size_t k = 0; k < fakes.indices.size(); ++k) {
    batch.push_back(detector::as_example(data.real[fakes.indices[k]], corpus::Label::human));
    ConversationPair fake;
    fake.source = data.real[fakes.indices[k]].source;
    fake.target = fakes.responses[k];
    batch.push_back(detector::as_example(std::move(fake), corpus::Label::bot, corpus::Provenance::generated_attack));
  }
  return batch;
}

// One iteration of the game: BD steps, then B steps with rollout rewards.
inline TraceRecord adversarial_round(GeneratorModel& bot, DetectorModel& det, const GameData& data,
                                     const GameConfig& cfg, GameState& state) {
  cfg.validate(bot);
  if (data.real.empty()) throw DataError("adversarial_round: no real pairs");
  const std::size_t round = state.rounds;
  const std::uint64_t round_seed = mix_seed(cfg.seed, {round});
  TraceRecord rec;
  rec.iteration = round + 1;

  double bot_ms = 0.0, det_ms = 0.0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  for (std::size_t s = 0; s < cfg.bd_steps; ++s) {
    const Stopwatch gen_clock(cfg.record_timing);
    const FakeBatch fakes = sample_fakes(bot, data, cfg, mix_seed(round_seed, {1, s}));
    bot_ms += gen_clock.ms();
    const Stopwatch clock(cfg.record_timing);
    loss_sum += detector::detector_step(det, detector_batch(data, fakes), state.detector_opt);
    ++loss_count;
    det_ms += clock.ms();
  }

  double reward_sum = 0.0;
  std::size_t reward_count = 0;
  for (std::size_t s = 0; s < cfg.b_steps; ++s) {
    const std::uint64_t step_seed = mix_seed(round_seed, {2, s});
    Stopwatch gen_clock(cfg.record_timing);
    const FakeBatch fakes = sample_fakes(bot, data, cfg, step_seed);
    double gen_ms = gen_clock.ms();
    if (cfg.detector_update_in_b_steps) {
      const Stopwatch clock(cfg.record_timing);
      loss_sum += detector::detector_step(det, detector_batch(data, fakes), state.detector_opt);
      ++loss_count;
      det_ms += clock.ms();
    }
    const Stopwatch reward_clock(cfg.record_timing);
    std::vector<generator::PolicySample> samples(fakes.indices.size());
    parallel_for(samples.size(), cfg.threads, [&](std::size_t k) {
      const auto& src = data.real[fakes.indices[k]].source;
      auto est = estimate_rewards(bot, det, src, fakes.responses[k], cfg.n_roll, mix_seed(step_seed, {3, k}),
                                  cfg.decoding);
      samples[k] = {src, fakes.responses[k], std::move(est.rewards)};
    });
    std::vector<double> finals;
    for (const auto& smp : samples) finals.push_back(smp.rewards.back());
    const double baseline = state.baseline(finals);
    generator::policy_gradient_update(bot, samples, baseline, state.bot_opt);
    for (std::size_t k = 0; k < cfg.teacher_forcing_steps; ++k) {
      std::vector<ConversationPair> real_batch;
      for (std::size_t idx : fakes.indices) real_batch.push_back(data.real[idx]);
      generator::mle_step(bot, real_batch, state.bot_opt);
    }
    for (double f : finals) {
      state.recent_rewards.push_back(f);
      if (state.recent_rewards.size() > cfg.baseline_window) state.recent_rewards.pop_front();
      reward_sum += f;
      ++reward_count;
    }
    gen_ms += reward_clock.ms();
    bot_ms += gen_ms;
  }

  rec.detector_loss = loss_sum / static_cast<double>(loss_count);
  rec.mean_reward = reward_sum / static_cast<double>(reward_count);
  const auto& heldout = data.heldout.empty() ? data.real : data.heldout;
  rec.perplexity = generator::perplexity(bot, heldout);
  DecodingConfig metric_dec = cfg.decoding;
  rec.cosine_sim = cosine_similarity_metric(bot, heldout, cfg.metric_samples, derive_seed(cfg.seed, "cosine"),
                                            metric_dec)
                       .mean;
  rec.bot_ms = bot_ms;
  rec.detector_ms = det_ms;
  if (!std::isfinite(rec.detector_loss) || !std::isfinite(rec.perplexity)) {
    throw NumericError("adversarial_round: non-finite metric in round " + std::to_string(rec.iteration));
  }
  ++state.rounds;
  return rec;
}

// Runs cfg.iterations rounds; a numeric failure stops the game and keeps the
// records completed so far.
inline TrainingTrace run_game(GeneratorModel& bot, DetectorModel& det, const GameData& data, const GameConfig& cfg) {
  cfg.validate(bot);
  TrainingTrace trace;
  GameState state(cfg);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    try {
      trace.records.push_back(adversarial_round(bot, det, data, cfg, state));
    } catch (const NumericError& e) {
      trace.aborted = e.what();
      break;
    }
  }
  bot.adversarially_trained = true;
  return trace;
}

// ---------------------------------------------------------------------------
// Serialization.

inline const csv::Row& trace_header() {
  static const csv::Row h{"iteration", "detector_loss", "mean_reward", "perplexity", "cosine_sim", "bot_ms",
                          "detector_ms"};
  return h;
}

inline std::string trace_csv(const std::vector<TraceRecord>& records) {
  std::vector<csv::Row> rows{trace_header()};
  for (const auto& r : records) {
    rows.push_back({std::to_string(r.iteration), csv::format_double(r.detector_loss),
                    csv::format_double(r.mean_reward), csv::format_double(r.perplexity),
                    csv::format_double(r.cosine_sim), csv::format_double(r.bot_ms),
                    csv::format_double(r.detector_ms)});
  }
  return csv::to_string(rows);
}

inline std::vector<TraceRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  const auto rows = csv::read_all(in);
  if (rows.empty() || rows[0] != trace_header()) throw DataError("trace CSV: unexpected header");
  std::vector<TraceRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != trace_header().size()) throw DataError("trace CSV: row " + std::to_string(i) + " has wrong width");
    out.push_back({static_cast<std::size_t>(csv::parse_int(r[0])), csv::parse_double(r[1]), csv::parse_double(r[2]),
                   csv::parse_double(r[3]), csv::parse_double(r[4]), csv::parse_double(r[5]),
                   csv::parse_double(r[6])});
  }
  return out;
}

inline std::string trace_svg(const std::vector<TraceRecord>& records) {
  svg::Series loss{"detector loss", {}}, reward{"mean reward", {}}, ppl{"perplexity", {}}, cos{"cosine similarity", {}};
  for (const auto& r : records) {
    loss.y.push_back(r.detector_loss);
    reward.y.push_back(r.mean_reward);
    ppl.y.push_back(r.perplexity);
    cos.y.push_back(r.cosine_sim);
  }
  return svg::line_panels("Adversarial game", "iteration", {loss, reward, ppl, cos});
}

}  // namespace advbot::adversarial
