#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "advbot/analysis/features.hpp"
#include "advbot/analysis/logistic.hpp"
#include "advbot/common/csv.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/common/svg.hpp"
#include "advbot/corpus/split.hpp"
#include "advbot/corpus/types.hpp"
#include "advbot/detector/ops.hpp"

namespace advbot::analysis {

using corpus::DomainTag;
using corpus::LabeledExample;

// ---------------------------------------------------------------------------
// Feature-space classifier.

using FeatureClassifier = LogisticModel;

inline std::vector<std::vector<double>> feature_rows(std::span<const LabeledExample> examples) {
  std::vector<std::vector<double>> rows;
  rows.reserve(examples.size());
  for (const auto& e : examples) {
    const auto f = features_of(e);
    rows.emplace_back(f.begin(), f.end());
  }
  return rows;
}

inline FeatureClassifier train_feature_classifier(std::span<const LabeledExample> train, const LogisticConfig& cfg = {},
                                                  Diagnostics* diag = nullptr) {
  return fit_logistic(feature_rows(train), detector::labels_of(train), cfg, diag);
}

// ---------------------------------------------------------------------------
// Cross-domain evaluation.

// Maps an example to probability_human.
using Scorer = std::function<double(const LabeledExample&)>;
using Trainer = std::function<Scorer(std::span<const LabeledExample> train, std::uint64_t seed)>;

inline Trainer feature_trainer(LogisticConfig cfg = {}) {
  return [cfg](std::span<const LabeledExample> train, std::uint64_t) -> Scorer {
    auto model = std::make_shared<FeatureClassifier>(train_feature_classifier(train, cfg));
    return [model](const LabeledExample& e) {
      const auto f = features_of(e);
      return model->probability(f);
    };
  };
}

inline Trainer detector_trainer(std::shared_ptr<const corpus::Vocab> vocab, detector::DetectorConfig model_cfg,
                                detector::DetectorTrainConfig train_cfg) {
  return [=](std::span<const LabeledExample> train, std::uint64_t seed) -> Scorer {
    auto model = std::make_shared<detector::DetectorModel>(vocab, model_cfg, derive_seed(seed, "crossdomain.model"));
    auto cfg = train_cfg;
    cfg.seed = derive_seed(seed, "crossdomain.train");
    detector::train_detector(*model, train, cfg);
    return [model](const LabeledExample& e) { return detector::probability_human(*model, e.pair); };
  };
}

inline constexpr std::size_t kMinDomainExamples = 10;

struct CrossDomainCell {
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  bool valid = false;
};

struct CrossDomainMatrix {
  std::vector<DomainTag> domains;
  std::vector<std::vector<CrossDomainCell>> cells;  // [train][test]
};

struct CrossDomainConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Disjoint train/test parts. Side is a function of (seed, example id) only, so
// an example copied into another pool lands on the same side there too.
inline corpus::Split<LabeledExample> holdout_split(std::span<const LabeledExample> pool, double train_fraction,
                                                   std::uint64_t seed) {
  corpus::Split<LabeledExample> s;
  for (const auto& e : pool) {
    const double u = static_cast<double>(splitmix64(seed ^ splitmix64(e.id)) >> 11) * 0x1.0p-53;
    (u < train_fraction ? s.train : s.test).push_back(e);
  }
  return s;
}

// Cell (i, j): train on human-train + bot_i-train, test on human-test + bot_j-test.
inline CrossDomainMatrix cross_domain_eval(const std::vector<DomainTag>& domains, const Trainer& trainer,
                                           std::span<const LabeledExample> human_pool,
                                           const std::vector<std::vector<LabeledExample>>& bot_pools,
                                           const CrossDomainConfig& cfg = {}) {
  if (domains.size() < 2) throw std::invalid_argument("cross_domain_eval: need at least two bot domains");
  if (bot_pools.size() != domains.size()) throw std::invalid_argument("cross_domain_eval: one pool per domain");
  if (human_pool.size() < 2) throw DataError("cross_domain_eval: human pool too small to split");
  const std::uint64_t split_seed = derive_seed(cfg.seed, "crossdomain.split");
  const auto human = holdout_split(human_pool, cfg.train_fraction, split_seed);
  std::vector<corpus::Split<LabeledExample>> bots;
  for (const auto& pool : bot_pools) bots.push_back(holdout_split(pool, cfg.train_fraction, split_seed));
  const auto usable = [&](std::size_t d) {
    return bot_pools[d].size() >= kMinDomainExamples && !bots[d].train.empty() && !bots[d].test.empty();
  };

  CrossDomainMatrix m;
  m.domains = domains;
  m.cells.assign(domains.size(), std::vector<CrossDomainCell>(domains.size()));
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (!usable(i) || human.train.empty() || human.test.empty()) continue;
    std::vector<LabeledExample> train = human.train;
    train.insert(train.end(), bots[i].train.begin(), bots[i].train.end());
    const Scorer scorer = trainer(train, derive_seed(cfg.seed, "crossdomain.trainer", i));
    for (std::size_t j = 0; j < domains.size(); ++j) {
      if (!usable(j)) continue;
      std::vector<LabeledExample> test = human.test;
      test.insert(test.end(), bots[j].test.begin(), bots[j].test.end());
      double correct = 0.0;
      for (const auto& e : test) {
        const bool human_pred = scorer(e) >= detector::kDefaultThreshold;
        correct += human_pred == (e.label == corpus::Label::human) ? 1.0 : 0.0;
      }
      m.cells[i][j] = {correct / static_cast<double>(test.size()), test.size(), true};
    }
  }
  return m;
}

// Rows: train_domain, test_domain, accuracy, n. Invalid cells carry "nan".
inline std::string matrix_csv(const CrossDomainMatrix& m) {
  std::vector<csv::Row> rows{{"train_domain", "test_domain", "accuracy", "n"}};
  for (std::size_t i = 0; i < m.domains.size(); ++i) {
    for (std::size_t j = 0; j < m.domains.size(); ++j) {
      const auto& c = m.cells[i][j];
      rows.push_back({m.domains[i].name(), m.domains[j].name(), c.valid ? csv::format_double(c.accuracy) : "nan",
                      std::to_string(c.n)});
    }
  }
  return csv::to_string(rows);
}

inline std::string matrix_svg(const CrossDomainMatrix& m) {
  std::vector<std::string> names;
  for (const auto& d : m.domains) names.push_back(d.name());
  std::vector<std::vector<double>> values;
  for (const auto& row : m.cells) {
    std::vector<double> r;
    for (const auto& c : row) r.push_back(c.valid ? c.accuracy : std::numeric_limits<double>::quiet_NaN());
    values.push_back(std::move(r));
  }
  return svg::heatmap("Cross-domain accuracy (rows: train, columns: test)", names, names, values);
}

}  // namespace advbot::analysis
