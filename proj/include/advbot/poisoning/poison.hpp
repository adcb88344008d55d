#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advbot/common/csv.hpp"
#include "advbot/common/diagnostics.hpp"
#include "advbot/common/error.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/common/svg.hpp"
#include "advbot/detector/ops.hpp"
#include "advbot/generator/ops.hpp"

namespace advbot::poisoning {

using corpus::Label;
using corpus::LabeledExample;
using corpus::Provenance;
using corpus::TokenSeq;

enum class SelectionRule { lowest_detection_prob, random };

inline SelectionRule parse_selection_rule(const std::string& s) {
  if (s == "lowest_detection_prob") return SelectionRule::lowest_detection_prob;
  if (s == "random") return SelectionRule::random;
  throw ConfigError("unknown selection rule '" + s + "'");
}

// The k pool members the detector finds most human (ties keep input order),
// relabelled as bot with provenance pinched_attack. Text is untouched.
inline std::vector<LabeledExample> select_pinched_examples(std::span<const double> pool_scores,
                                                           std::span<const LabeledExample> pool, std::size_t k,
                                                           SelectionRule rule, std::uint64_t seed) {
  if (pool_scores.size() != pool.size()) throw std::invalid_argument("select_pinched_examples: score count mismatch");
  if (k > pool.size()) {
    throw std::invalid_argument("select_pinched_examples: k=" + std::to_string(k) + " exceeds pool of " +
                                std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (rule == SelectionRule::lowest_detection_prob) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pool_scores[a] > pool_scores[b]; });
  } else {
    Rng rng(derive_seed(seed, "pinched.random"));
    rng.shuffle(order);
  }
  std::vector<LabeledExample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    LabeledExample e = pool[order[i]];
    e.label = Label::bot;
    e.provenance = Provenance::pinched_attack;
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<LabeledExample> select_pinched_examples(const detector::DetectorModel& det,
                                                           std::span<const LabeledExample> pool, std::size_t k,
                                                           SelectionRule rule, std::uint64_t seed,
                                                           unsigned threads = 1) {
  if (k > pool.size()) {
    throw std::invalid_argument("select_pinched_examples: k=" + std::to_string(k) + " exceeds pool of " +
                                std::to_string(pool.size()));
  }
  const auto scores = rule == SelectionRule::lowest_detection_prob ? detector::score_all(det, pool, threads)
                                                                   : std::vector<double>(pool.size(), 0.0);
  return select_pinched_examples(scores, pool, k, rule, seed);
}

// n bot-labelled pairs whose responses the bot samples for sources drawn
// (seeded, with replacement) from `sources`.
inline std::vector<LabeledExample> generate_attack_examples(const generator::GeneratorModel& bot,
                                                            std::span<const TokenSeq> sources, std::size_t n,
                                                            std::uint64_t seed,
                                                            const generator::DecodingConfig& dec = {},
                                                            bool allow_untrained = false) {
  if (!bot.adversarially_trained && !allow_untrained) {
    throw ConfigError("generate_attack_examples: bot has not been adversarially trained (override to allow)");
  }
  if (n == 0) return {};
  if (sources.empty()) throw std::invalid_argument("generate_attack_examples: no sources");
  Rng rng(derive_seed(seed, "attack.sources"));
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TokenSeq& src = sources[rng.below(sources.size())];
    auto pair = detector::generated_pair(bot, src, dec, mix_seed(seed, {i}));
    pair.raw_source = corpus::detokenize(pair.source, bot.vocab());
    pair.raw_target = corpus::detokenize(pair.target, bot.vocab());
    auto e = detector::as_example(std::move(pair), Label::bot, Provenance::generated_attack);
    e.id = i;
    out.push_back(std::move(e));
  }
  return out;
}

struct PoisonConfig {
  double fraction = 0.1;  // attacks as a fraction of the base bot-class size
  bool replace = false;   // drop as many genuine bot examples as attacks added
  std::uint64_t seed = 0;

  void validate() const {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("poison: fraction must be in (0, 1]");
  }
};

// base plus round(fraction * |bot class|) attacks drawn without replacement.
// With `replace`, the same number of genuine bot examples are removed (seeded).
inline std::vector<LabeledExample> poison_dataset(std::span<const LabeledExample> base,
                                                  std::span<const LabeledExample> attacks, const PoisonConfig& cfg) {
  cfg.validate();
  if (attacks.empty()) throw std::invalid_argument("poison_dataset: no attack examples");
  std::size_t n_bot = 0;
  for (const auto& e : base) n_bot += e.label == Label::bot;
  const auto needed = static_cast<std::size_t>(std::llround(cfg.fraction * static_cast<double>(n_bot)));
  if (needed > attacks.size()) {
    throw DataError("poison_dataset: fraction " + csv::format_double(cfg.fraction) + " of " + std::to_string(n_bot) +
                    " bot examples requires " + std::to_string(needed) + " attacks, only " +
                    std::to_string(attacks.size()) + " available");
  }
  Rng rng(derive_seed(cfg.seed, "poison.sample"));
  std::vector<std::size_t> order(attacks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  order.resize(needed);
  std::sort(order.begin(), order.end());

  std::vector<LabeledExample> out;
  if (cfg.replace) {
    std::vector<std::size_t> bots;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base[i].label == Label::bot && base[i].provenance == Provenance::genuine) bots.push_back(i);
    }
    if (needed > bots.size()) throw DataError("poison_dataset: not enough genuine bot examples to replace");
    Rng drop_rng(derive_seed(cfg.seed, "poison.replace"));
    drop_rng.shuffle(bots);
    std::vector<bool> drop(base.size(), false);
    for (std::size_t i = 0; i < needed; ++i) drop[bots[i]] = true;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (!drop[i]) out.push_back(base[i]);
    }
  } else {
    out.assign(base.begin(), base.end());
  }
  for (std::size_t i : order) out.push_back(attacks[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Probability histograms.

inline constexpr std::size_t kDefaultBins = 20;

struct ProbabilityHistogram {
  std::string class_tag;  // human, bot or attack
  std::vector<double> edges;  // bins + 1 values from 0 to 1
  std::vector<std::size_t> counts;
  std::size_t n = 0;
  double mean = 0.0;
};

// Bins are [lo, hi) except the last, which is [lo, 1].
inline std::size_t bin_of(double p, std::size_t bins) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("histogram: probability outside [0, 1]");
  const auto b = static_cast<std::size_t>(std::floor(p * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

inline ProbabilityHistogram make_histogram(std::string tag, std::span<const double> probs,
                                           std::size_t bins = kDefaultBins) {
  if (bins == 0) throw std::invalid_argument("histogram: bins must be >= 1");
  ProbabilityHistogram h;
  h.class_tag = std::move(tag);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  h.counts.assign(bins, 0);
  double sum = 0.0;
  for (double p : probs) {
    ++h.counts[bin_of(p, bins)];
    sum += p;
  }
  h.n = probs.size();
  h.mean = h.n ? sum / static_cast<double>(h.n) : 0.0;
  return h;
}

// Half the L1 distance between the normalized bin masses.
inline double total_variation(const ProbabilityHistogram& a, const ProbabilityHistogram& b) {
  if (a.counts.size() != b.counts.size()) throw std::invalid_argument("total_variation: bin counts differ");
  if (a.n == 0 || b.n == 0) throw std::invalid_argument("total_variation: empty histogram");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    tv += std::abs(static_cast<double>(a.counts[i]) / static_cast<double>(a.n) -
                   static_cast<double>(b.counts[i]) / static_cast<double>(b.n));
  }
  return 0.5 * tv;
}

// Class of an example for the histograms: attack if its provenance is not
// genuine, otherwise its label.
inline std::string histogram_class(const LabeledExample& e) {
  if (e.provenance != Provenance::genuine) return "attack";
  return std::string(corpus::to_string(e.label));
}

struct PoisonSummary {
  std::vector<ProbabilityHistogram> histograms;  // present classes, in order human, bot, attack
  std::map<std::string, double> mean_prob;
  std::optional<double> gap;  // mean(attack) - mean(genuine bot)
  std::optional<double> tv_attack_human;
};

inline PoisonSummary summarize_scores(std::span<const double> probs, std::span<const LabeledExample> testset,
                                      std::size_t bins = kDefaultBins, Diagnostics* diag = nullptr) {
  if (probs.size() != testset.size()) throw std::invalid_argument("summarize_scores: length mismatch");
  std::map<std::string, std::vector<double>> by_class;
  for (std::size_t i = 0; i < testset.size(); ++i) by_class[histogram_class(testset[i])].push_back(probs[i]);
  PoisonSummary s;
  for (const char* tag : {"human", "bot", "attack"}) {
    auto it = by_class.find(tag);
    if (it == by_class.end() || it->second.empty()) {
      warn(diag, std::string("poisoned test set has no '") + tag + "' examples; histogram omitted");
      continue;
    }
    s.histograms.push_back(make_histogram(tag, it->second, bins));
    s.mean_prob[tag] = s.histograms.back().mean;
  }
  const auto find = [&](const std::string& tag) -> const ProbabilityHistogram* {
    for (const auto& h : s.histograms) {
      if (h.class_tag == tag) return &h;
    }
    return nullptr;
  };
  if (s.mean_prob.count("attack") && s.mean_prob.count("bot")) s.gap = s.mean_prob["attack"] - s.mean_prob["bot"];
  if (find("attack") && find("human")) s.tv_attack_human = total_variation(*find("attack"), *find("human"));
  return s;
}

inline PoisonSummary evaluate_under_poisoning(const detector::DetectorModel& det,
                                              std::span<const LabeledExample> testset,
                                              std::size_t bins = kDefaultBins, Diagnostics* diag = nullptr,
                                              unsigned threads = 1) {
  const auto probs = detector::score_all(det, testset, threads);
  return summarize_scores(probs, testset, bins, diag);
}

// Rows: class, bin_lo, bin_hi, count.
inline std::string histogram_csv(const std::vector<ProbabilityHistogram>& hs) {
  std::vector<csv::Row> rows{{"class", "bin_lo", "bin_hi", "count"}};
  for (const auto& h : hs) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      rows.push_back({h.class_tag, csv::format_double(h.edges[i]), csv::format_double(h.edges[i + 1]),
                      std::to_string(h.counts[i])});
    }
  }
  return csv::to_string(rows);
}

inline std::string summary_csv(const PoisonSummary& s) {
  std::vector<csv::Row> rows{{"statistic", "value"}};
  for (const auto& h : s.histograms) {
    rows.push_back({"mean_prob_" + h.class_tag, csv::format_double(h.mean)});
    rows.push_back({"n_" + h.class_tag, std::to_string(h.n)});
  }
  if (s.gap) rows.push_back({"gap_attack_minus_bot", csv::format_double(*s.gap)});
  if (s.tv_attack_human) rows.push_back({"tv_attack_human", csv::format_double(*s.tv_attack_human)});
  return csv::to_string(rows);
}

inline std::string histogram_svg(const std::vector<ProbabilityHistogram>& hs, const std::string& title) {
  std::vector<std::string> categories;
  if (!hs.empty()) {
    for (std::size_t i = 0; i + 1 < hs[0].edges.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", hs[0].edges[i]);
      categories.emplace_back(buf);
    }
  }
  std::vector<svg::BarGroup> groups;
  for (const auto& h : hs) {
    svg::BarGroup g{h.class_tag, {}};
    for (auto c : h.counts) g.values.push_back(h.n ? static_cast<double>(c) / static_cast<double>(h.n) : 0.0);
    groups.push_back(std::move(g));
  }
  return svg::grouped_bars(title, categories, groups);
}

}  // namespace advbot::poisoning
