#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "advbot/common/error.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

struct SplitFractions {
  double train = 0.8;
  double test = 0.2;
};

template <class T>
struct Split {
  std::vector<T> train;
  std::vector<T> test;
};

inline Label label_of(const LabeledExample& e) { return e.label; }
inline Label label_of(const TextExample& e) { return e.label; }

// Stratified by label: each class contributes round(train_fraction * n) items
// to train (clamped so both sides get at least one), chosen by a seeded
// shuffle. Both outputs keep the input order.
template <class T>
Split<T> split_dataset(const std::vector<T>& examples, SplitFractions fractions, std::uint64_t seed) {
  if (std::abs(fractions.train + fractions.test - 1.0) > 1e-9 || fractions.train < 0.0 || fractions.test < 0.0) {
    throw std::invalid_argument("split_dataset: fractions must be nonnegative and sum to 1");
  }
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < examples.size(); ++i) by_label[as_int(label_of(examples[i]))].push_back(i);
  for (const auto& [label, idx] : by_label) {
    if (idx.size() < 2) {
      throw DataError(std::string("split_dataset: class '") + std::string(to_string(static_cast<Label>(label))) +
                      "' has fewer than 2 examples");
    }
  }
  std::vector<char> in_train(examples.size(), 0);
  for (auto& [label, idx] : by_label) {
    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(label)}));
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(idx.size())));
    if (fractions.train > 0.0 && fractions.test > 0.0) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
  }
  Split<T> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (in_train[i] ? out.train : out.test).push_back(examples[i]);
  }
  return out;
}

}  // namespace advbot::corpus
