#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advbot/common/diagnostics.hpp"
#include "advbot/common/error.hpp"
#include "advbot/diffcore/tensor.hpp"

namespace advbot::analysis {

struct LogisticConfig {
  double l2 = 1e-3;  // penalty (l2/2)|w|^2 on standardized weights; bias unpenalized
  std::size_t max_iterations = 100;
  double tolerance = 1e-12;  // stop when the Newton step's max-norm falls below this
};

// Logistic regression over standardized inputs, fitted by damped Newton
// iterations on the mean log-loss plus the L2 penalty.
class LogisticModel {
 public:
  LogisticModel() = default;
  LogisticModel(std::vector<double> means, std::vector<double> stddevs, std::vector<double> weights, double bias)
      : means_(std::move(means)), stddevs_(std::move(stddevs)), weights_(std::move(weights)), bias_(bias) {
    if (means_.size() != stddevs_.size() || means_.size() != weights_.size()) {
      throw std::invalid_argument("LogisticModel: inconsistent dimensions");
    }
  }

  std::size_t dim() const { return weights_.size(); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stddevs() const { return stddevs_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

  double logit(std::span<const double> x) const {
    if (x.size() != dim()) throw std::invalid_argument("LogisticModel: input has wrong dimension");
    double z = bias_;
    for (std::size_t i = 0; i < dim(); ++i) z += weights_[i] * (x[i] - means_[i]) / stddevs_[i];
    return z;
  }
  double probability(std::span<const double> x) const { return diff::stable_sigmoid(logit(x)); }

  // Weights of the logit as an affine function of raw inputs.
  std::vector<double> raw_weights() const {
    std::vector<double> w(dim());
    for (std::size_t i = 0; i < dim(); ++i) w[i] = weights_[i] / stddevs_[i];
    return w;
  }

 private:
  std::vector<double> means_, stddevs_, weights_;
  double bias_ = 0.0;
};

// rows: n inputs of equal dimension; labels in {0,1}. Standardization uses the
// training rows only; a zero-variance column gets stddev 1 and a warning.
inline LogisticModel fit_logistic(const std::vector<std::vector<double>>& rows, std::span<const int> labels,
                                  const LogisticConfig& cfg = {}, Diagnostics* diag = nullptr) {
  if (rows.empty() || rows.size() != labels.size()) throw std::invalid_argument("fit_logistic: bad training set");
  const std::size_t n = rows.size(), d = rows[0].size();
  bool has[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("fit_logistic: labels must be 0 or 1");
    has[y] = true;
  }
  if (!has[0] || !has[1]) throw DataError("fit_logistic: both classes must be present");

  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("fit_logistic: ragged input");
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
    if (!(sd[j] > 1e-12)) {
      warn(diag, "feature " + std::to_string(j) + " has zero variance; stddev clamped to 1");
      sd[j] = 1.0;
    }
  }

  // Design matrix with a trailing intercept column.
  Eigen::MatrixXd X(n, d + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) X(i, j) = (rows[i][j] - mean[j]) / sd[j];
    X(i, d) = 1.0;
    y(i) = labels[i];
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, cfg.l2);
  penalty(d) = 0.0;

  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd z = X * b;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += y(i) * diff::softplus(-z(i)) + (1 - y(i)) * diff::softplus(z(i));
    return loss / static_cast<double>(n) + 0.5 * (penalty.array() * b.array().square()).sum();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  double current = objective(beta);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::VectorXd z = X * beta;
    Eigen::VectorXd p(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      p(i) = diff::stable_sigmoid(z(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd grad =
        X.transpose() * (p - y) / static_cast<double>(n) + (penalty.array() * beta.array()).matrix();
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X / static_cast<double>(n);
    H.diagonal() += penalty;
    H.diagonal().array() += 1e-12;  // keeps the intercept block solvable when every p saturates
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    if (!step.allFinite()) throw NumericError("fit_logistic: Newton step is not finite");
    // Backtracking keeps each iteration a descent step.
    double t = 1.0;
    Eigen::VectorXd next = beta - step;
    double value = objective(next);
    while (value > current && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      value = objective(next);
    }
    beta = next;
    current = value;
    if ((t * step).cwiseAbs().maxCoeff() < cfg.tolerance) break;
  }
  std::vector<double> weights(beta.data(), beta.data() + d);
  return LogisticModel(std::move(mean), std::move(sd), std::move(weights), beta(d));
}

inline double accuracy(const LogisticModel& m, const std::vector<std::vector<double>>& rows,
                       std::span<const int> labels) {
  if (rows.empty() || rows.size() != labels.size()) throw std::invalid_argument("accuracy: bad test set");
  double correct = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) correct += ((m.probability(rows[i]) >= 0.5) == (labels[i] == 1));
  return correct / static_cast<double>(rows.size());
}

}  // namespace advbot::analysis
