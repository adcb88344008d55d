#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "advbot/common/error.hpp"
#include "advbot/diffcore/tape.hpp"

namespace advbot::diff {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Compares reverse-mode gradients of `loss_fn` against central differences
// (f(p + step e_i) - f(p - step e_i)) / (2 step) for every coordinate of every
// parameter. Relative error uses the denominator max(|a|, |b|, floor); a
// larger floor keeps coordinates with near-zero gradient (where rounding in
// the difference quotient dominates) from swamping the result.
//
// `loss_fn(Tape&) -> Var` must rebuild the same computation on each call; a
// function whose value changes between two identical calls is rejected.
template <class LossFn>
GradCheckResult finite_difference_check(LossFn&& loss_fn, std::span<Parameter* const> params, double step,
                                        double floor = 1e-8) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_check: step must be positive");
  auto eval = [&] {
    Tape t;
    return loss_fn(t).value().item();
  };
  for (auto* p : params) p->zero_grad();
  {
    Tape t;
    Var loss = loss_fn(t);
    t.backward(loss);
  }
  const double base1 = eval();
  const double base2 = eval();
  if (base1 != base2) {
    throw std::logic_error("finite_difference_check: loss is not deterministic; freeze sampling first");
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value[i];
      p.value[i] = orig + step;
      const double fp = eval();
      p.value[i] = orig - step;
      const double fm = eval();
      p.value[i] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  for (auto* p : params) p->zero_grad();
  return result;
}

}  // namespace advbot::diff
