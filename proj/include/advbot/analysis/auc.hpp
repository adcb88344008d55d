#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace advbot::analysis {

// P(score of a random positive > score of a random negative), ties counting
// one half. Sort-based: O(n log n). Returns nullopt when a class is missing.
inline std::optional<double> auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc_roc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0, neg = 0.0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("auc_roc: labels must be 0 or 1");
    (l == 1 ? pos : neg) += 1.0;
  }
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  // Sum over positives of (#negatives strictly below + half the tied negatives).
  double concordant = 0.0;
  double negatives_below = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double tied_pos = 0.0, tied_neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tied_pos : tied_neg) += 1.0;
      ++j;
    }
    concordant += tied_pos * (negatives_below + 0.5 * tied_neg);
    negatives_below += tied_neg;
    i = j;
  }
  return concordant / (pos * neg);
}

}  // namespace advbot::analysis
