#pragma once

// Dense row-major tensors of rank 1 or 2 and the forward kernels shared by the
// tape (training) and the tape-free inference paths. Both paths call the same
// kernels in the same order, so their results agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "advbot/common/error.hpp"

namespace advbot::diff {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "]";
}

class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 2) throw std::invalid_argument("Tensor: rank must be 1 or 2");
    data_.assign(count(shape_), fill);
  }

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty() || shape_.size() > 2) throw std::invalid_argument("Tensor: rank must be 1 or 2");
    if (data_.size() != count(shape_)) {
      throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    return Tensor({rows, cols}, std::move(v));
  }

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-1 tensors act as a single row.
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const {
    if (data_.size() != 1) throw std::invalid_argument("Tensor::item on non-scalar " + shape_str(shape_));
    return data_[0];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t count(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  Shape shape_;
  std::vector<double> data_;
};

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline void require_finite(const Tensor& t, std::string_view op) {
  if (!all_finite(t.data())) throw NumericError("non-finite value produced by " + std::string(op));
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace kernel {

[[noreturn]] inline void shape_error(std::string_view op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                              shape_str(b.shape()));
}

// [m,k] x [k,n] -> [m,n]; [m,k] x [k] -> [m].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) shape_error("matmul", a, b);
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[0] != k) shape_error("matmul", a, b);
  if (b.rank() == 1) {
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &a.storage()[i * k];
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += row[j] * b[j];
      out[i] = acc;
    }
    require_finite(out, "matmul");
    return out;
  }
  const std::size_t n = b.shape()[1];
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.at(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += av * b.at(p, j);
    }
  }
  require_finite(out, "matmul");
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  require_finite(out, "add");
  return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  require_finite(out, "mul");
  return out;
}

inline Tensor tanh(const Tensor& a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
  require_finite(out, "tanh");
  return out;
}

inline Tensor sigmoid(const Tensor& a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = stable_sigmoid(a[i]);
  require_finite(out, "sigmoid");
  return out;
}

// Softmax over the last axis.
inline Tensor softmax_rows(const Tensor& a) {
  Tensor out(a.shape());
  const std::size_t rows = a.rows(), cols = a.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = &a.storage()[r * cols];
    double* y = &out.storage()[r * cols];
    const double mx = *std::max_element(x, x + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= sum;
  }
  require_finite(out, "softmax_rows");
  return out;
}

inline Tensor log_softmax_rows(const Tensor& a) {
  Tensor out(a.shape());
  const std::size_t rows = a.rows(), cols = a.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = &a.storage()[r * cols];
    double* y = &out.storage()[r * cols];
    const double mx = *std::max_element(x, x + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += std::exp(x[c] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t c = 0; c < cols; ++c) y[c] = x[c] - lse;
  }
  require_finite(out, "log_softmax_rows");
  return out;
}

inline Tensor embedding_lookup(const Tensor& table, std::size_t id) {
  if (table.rank() != 2) throw std::invalid_argument("embedding_lookup: table must be rank 2");
  if (id >= table.shape()[0]) {
    throw std::invalid_argument("embedding_lookup: id " + std::to_string(id) + " out of range " +
                                shape_str(table.shape()));
  }
  const std::size_t d = table.shape()[1];
  const auto* row = &table.storage()[id * d];
  return Tensor::vector(std::vector<double>(row, row + d));
}

inline Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) shape_error("concat", a, b);
  std::vector<double> v;
  v.reserve(a.size() + b.size());
  v.insert(v.end(), a.storage().begin(), a.storage().end());
  v.insert(v.end(), b.storage().begin(), b.storage().end());
  return Tensor::vector(std::move(v));
}

inline Tensor slice(const Tensor& a, std::size_t offset, std::size_t length) {
  if (a.rank() != 1 || offset + length > a.size()) {
    throw std::invalid_argument("slice: range [" + std::to_string(offset) + "," +
                                std::to_string(offset + length) + ") outside " + shape_str(a.shape()));
  }
  return Tensor::vector(std::vector<double>(a.storage().begin() + static_cast<std::ptrdiff_t>(offset),
                                            a.storage().begin() + static_cast<std::ptrdiff_t>(offset + length)));
}

}  // namespace kernel
}  // namespace advbot::diff
