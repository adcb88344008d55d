#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advbot/common/error.hpp"
#include "advbot/diffcore/tape.hpp"

namespace advbot::diff {

struct OptimizerConfig {
  enum class Kind { sgd_momentum, adam };
  Kind kind = Kind::adam;
  double lr = 1e-3;
  double momentum = 0.9;  // sgd_momentum
  double beta1 = 0.9;     // adam
  double beta2 = 0.999;   // adam
  double epsilon = 1e-8;
  double grad_clip = 0.0;  // global L2 norm clip; 0 disables

  static OptimizerConfig adam(double lr) { return {Kind::adam, lr}; }
  static OptimizerConfig sgd(double lr, double momentum = 0.0) {
    OptimizerConfig c;
    c.kind = Kind::sgd_momentum;
    c.lr = lr;
    c.momentum = momentum;
    return c;
  }
};

inline std::string to_string(OptimizerConfig::Kind k) {
  return k == OptimizerConfig::Kind::adam ? "adam" : "sgd_momentum";
}

inline OptimizerConfig::Kind parse_optimizer_kind(const std::string& s) {
  if (s == "adam") return OptimizerConfig::Kind::adam;
  if (s == "sgd_momentum" || s == "sgd") return OptimizerConfig::Kind::sgd_momentum;
  throw ConfigError("unknown optimizer kind: " + s);
}

// Updates parameters from their grads, then zeroes the grads. Per-parameter
// state is keyed by position, so every call must pass the same list.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
    if (!(cfg_.lr > 0.0)) throw std::invalid_argument("Optimizer: lr must be positive");
  }

  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return steps_; }

  void step(std::span<Parameter* const> params) {
    if (slots_.empty()) {
      for (auto* p : params) slots_.push_back({Tensor(p->value.shape()), Tensor(p->value.shape())});
    }
    if (slots_.size() != params.size()) throw std::invalid_argument("Optimizer::step: parameter list changed");
    ++steps_;
    double clip_scale = 1.0;
    if (cfg_.grad_clip > 0.0) {
      double sq = 0.0;
      for (auto* p : params) {
        for (double g : p->grad.data()) sq += g * g;
      }
      const double norm = std::sqrt(sq);
      if (norm > cfg_.grad_clip) clip_scale = cfg_.grad_clip / norm;
    }
    const double t = static_cast<double>(steps_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Parameter& p = *params[k];
      auto& [m, v] = slots_[k];
      if (m.shape() != p.value.shape()) throw std::invalid_argument("Optimizer::step: shape changed for " + p.name);
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i] * clip_scale;
        if (cfg_.kind == OptimizerConfig::Kind::sgd_momentum) {
          m[i] = cfg_.momentum * m[i] + g;
          p.value[i] -= cfg_.lr * m[i];
        } else {
          m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
          v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
      }
      require_finite(p.value, "optimizer_step(" + p.name + ")");
      p.zero_grad();
    }
  }

 private:
  struct Slot {
    Tensor m;
    Tensor v;
  };
  OptimizerConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<Slot> slots_;
};

inline void zero_grads(std::span<Parameter* const> params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace advbot::diff
