#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advbot/common/csv.hpp"
#include "advbot/common/rng.hpp"

namespace advbot::analysis {

struct ShapleyExplanation {
  enum class Method { exact, sampled };
  std::vector<double> phi;
  std::vector<double> se;  // zeros for exact
  double base_value = 0.0;  // f(background means)
  double prediction = 0.0;  // f(x)
  Method method = Method::exact;
  std::size_t permutations = 0;
};

inline constexpr std::size_t kMaxExactFeatures = 20;

inline std::vector<double> column_means(const std::vector<std::vector<double>>& background) {
  if (background.empty()) throw std::invalid_argument("shapley: background is empty");
  std::vector<double> m(background[0].size(), 0.0);
  for (const auto& r : background) {
    if (r.size() != m.size()) throw std::invalid_argument("shapley: ragged background");
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += r[j];
  }
  for (auto& v : m) v /= static_cast<double>(background.size());
  return m;
}

// Exact Shapley values of f at x, where features outside a coalition take
// their reference value. v(S) is evaluated once for every one of the 2^d subsets.
template <class F>
ShapleyExplanation exact_shapley_reference(F&& f, std::span<const double> x, std::span<const double> reference) {
  const std::size_t d = x.size();
  if (reference.size() != d) throw std::invalid_argument("exact_shapley: reference has wrong dimension");
  if (d == 0 || d > kMaxExactFeatures) throw std::invalid_argument("exact_shapley: need 1..20 features");
  const std::size_t subsets = std::size_t{1} << d;
  std::vector<double> v(subsets);
  std::vector<double> z(d);
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t j = 0; j < d; ++j) z[j] = (s >> j) & 1U ? x[j] : reference[j];
    v[s] = f(std::span<const double>(z));
  }
  // weight[k] = k! (d-k-1)! / d!
  std::vector<double> weight(d);
  for (std::size_t k = 0; k < d; ++k) {
    weight[k] = std::exp(std::lgamma(static_cast<double>(k + 1)) + std::lgamma(static_cast<double>(d - k)) -
                         std::lgamma(static_cast<double>(d + 1)));
  }
  ShapleyExplanation out;
  out.phi.assign(d, 0.0);
  out.se.assign(d, 0.0);
  for (std::size_t s = 0; s < subsets; ++s) {
    const auto k = static_cast<std::size_t>(__builtin_popcountll(s));
    for (std::size_t i = 0; i < d; ++i) {
      if ((s >> i) & 1U) continue;
      out.phi[i] += weight[k] * (v[s | (std::size_t{1} << i)] - v[s]);
    }
  }
  out.base_value = v[0];
  out.prediction = v[subsets - 1];
  out.method = ShapleyExplanation::Method::exact;
  return out;
}

template <class F>
ShapleyExplanation exact_shapley(F&& f, std::span<const double> x, const std::vector<std::vector<double>>& background) {
  const auto ref = column_means(background);
  return exact_shapley_reference(std::forward<F>(f), x, ref);
}

// Permutation-sampling estimator. Each permutation's marginal contributions
// telescope to f(x) - f(reference), so efficiency holds for any n.
template <class F>
ShapleyExplanation sampled_shapley_reference(F&& f, std::span<const double> x, std::span<const double> reference,
                                             std::size_t n_permutations, std::uint64_t seed) {
  const std::size_t d = x.size();
  if (reference.size() != d) throw std::invalid_argument("sampled_shapley: reference has wrong dimension");
  if (n_permutations == 0) throw std::invalid_argument("sampled_shapley: n_permutations must be >= 1");
  Rng rng(derive_seed(seed, "sampled_shapley"));
  std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
  std::vector<std::size_t> order(d);
  std::vector<double> z(d);
  const double base = f(reference);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    for (std::size_t j = 0; j < d; ++j) order[j] = j;
    rng.shuffle(order);
    z.assign(reference.begin(), reference.end());
    double prev = base;
    for (std::size_t j : order) {
      z[j] = x[j];
      const double cur = f(std::span<const double>(z));
      const double delta = cur - prev;
      sum[j] += delta;
      sum_sq[j] += delta * delta;
      prev = cur;
    }
  }
  ShapleyExplanation out;
  const double n = static_cast<double>(n_permutations);
  out.phi.resize(d);
  out.se.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.phi[j] = sum[j] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[j] - n * out.phi[j] * out.phi[j]) / (n - 1)) : 0.0;
    out.se[j] = std::sqrt(var / n);
  }
  out.base_value = base;
  out.prediction = f(x);
  out.method = ShapleyExplanation::Method::sampled;
  out.permutations = n_permutations;
  return out;
}

template <class F>
ShapleyExplanation sampled_shapley(F&& f, std::span<const double> x, const std::vector<std::vector<double>>& background,
                                   std::size_t n_permutations, std::uint64_t seed) {
  const auto ref = column_means(background);
  return sampled_shapley_reference(std::forward<F>(f), x, ref, n_permutations, seed);
}

// Rows: instance_id, feature, value, phi, se.
inline void append_shapley_rows(std::vector<csv::Row>& rows, std::uint64_t instance_id,
                                std::span<const std::string_view> names, std::span<const double> x,
                                const ShapleyExplanation& e) {
  for (std::size_t j = 0; j < e.phi.size(); ++j) {
    rows.push_back({std::to_string(instance_id), std::string(names[j]), csv::format_double(x[j]),
                    csv::format_double(e.phi[j]), csv::format_double(e.se[j])});
  }
}

}  // namespace advbot::analysis
