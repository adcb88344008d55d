#pragma once

// Reverse-mode differentiation over a recorded tape.
//
// A Tape records every primitive op applied to Vars in forward order; backward()
// walks the records in exact reverse and accumulates adjoints additively. A tape
// may be differentiated once. Parameters enter a tape by reference and receive
// their gradient in Parameter::grad (added to whatever is already there).

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advbot/common/error.hpp"
#include "advbot/diffcore/tensor.hpp"

namespace advbot::diff {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  const Tensor& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(Var v) const { return nodes_[v.id()].value; }

  Var constant(Tensor t) { return push(std::move(t), {}, nullptr); }

  // Registers a parameter once per tape; later calls return the same Var.
  Var param(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
    Var v = push(p.value, {}, nullptr);
    param_nodes_.emplace(&p, v.id());
    param_leaves_.emplace_back(&p, v.id());
    return v;
  }

  Var matmul(Var a, Var b) {
    Tensor out = kernel::matmul(value(a), value(b));
    const std::size_t ia = a.id(), ib = b.id();
    return push(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& A = t.nodes_[ia].value;
      const Tensor& B = t.nodes_[ib].value;
      const std::size_t m = A.shape()[0], k = A.shape()[1];
      Tensor& gA = t.grad_slot(ia);
      Tensor& gB = t.grad_slot(ib);
      if (B.rank() == 1) {
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[i];
          for (std::size_t j = 0; j < k; ++j) {
            gA[i * k + j] += gi * B[j];
            gB[j] += A[i * k + j] * gi;
          }
        }
        return;
      }
      const std::size_t n = B.shape()[1];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            acc += g.at(i, j) * B.at(p, j);
            gB.at(p, j) += A.at(i, p) * g.at(i, j);
          }
          gA.at(i, p) += acc;
        }
      }
    });
  }

  Var add(Var a, Var b) {
    Tensor out = kernel::add(value(a), value(b));
    const std::size_t ia = a.id(), ib = b.id();
    return push(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      Tensor& gb = t.grad_slot(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    });
  }

  Var mul(Var a, Var b) {
    Tensor out = kernel::mul(value(a), value(b));
    const std::size_t ia = a.id(), ib = b.id();
    return push(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& A = t.nodes_[ia].value;
      const Tensor& B = t.nodes_[ib].value;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
      Tensor& gb = t.grad_slot(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
    });
  }

  Var tanh(Var a) {
    Tensor out = kernel::tanh(value(a));
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& y = t.nodes_[self].value;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
  }

  Var sigmoid(Var a) {
    Tensor out = kernel::sigmoid(value(a));
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& y = t.nodes_[self].value;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
  }

  Var softmax_rows(Var a) {
    Tensor out = kernel::softmax_rows(value(a));
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& y = t.nodes_[self].value;
      Tensor& ga = t.grad_slot(ia);
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
      }
    });
  }

  Var log_softmax_rows(Var a) {
    Tensor out = kernel::log_softmax_rows(value(a));
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& y = t.nodes_[self].value;
      Tensor& ga = t.grad_slot(ia);
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        double gsum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) gsum += g[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r * cols + c] - std::exp(y[r * cols + c]) * gsum;
      }
    });
  }

  // Row `id` of a parameter table; the gradient is scattered straight into the
  // table's grad so the full table is never copied onto the tape.
  Var embedding(Parameter& table, std::size_t id) {
    Tensor out = kernel::embedding_lookup(table.value, id);
    Parameter* tp = &table;
    return push(std::move(out), {}, [tp, id](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const std::size_t d = g.size();
      for (std::size_t j = 0; j < d; ++j) tp->grad[id * d + j] += g[j];
    });
  }

  Var concat(Var a, Var b) {
    Tensor out = kernel::concat(value(a), value(b));
    const std::size_t ia = a.id(), ib = b.id();
    const std::size_t na = value(a).size();
    return push(std::move(out), {ia, ib}, [ia, ib, na](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
      Tensor& gb = t.grad_slot(ib);
      for (std::size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
    });
  }

  Var slice(Var a, std::size_t offset, std::size_t length) {
    Tensor out = kernel::slice(value(a), offset, length);
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia, offset](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
    });
  }

  // Scalar element at flat index.
  Var pick(Var a, std::size_t index) {
    if (index >= value(a).size()) throw std::invalid_argument("pick: index out of range");
    Tensor out = Tensor::scalar(value(a)[index]);
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia, index](Tape& t, std::size_t self) {
      t.grad_slot(ia)[index] += t.nodes_[self].grad[0];
    });
  }

  Var sum(Var a) {
    double acc = 0.0;
    for (double x : value(a).data()) acc += x;
    Tensor out = Tensor::scalar(acc);
    require_finite(out, "sum");
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const double g = t.nodes_[self].grad[0];
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }

  Var scale(Var a, double k) {
    Tensor out(value(a).shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(a)[i] * k;
    require_finite(out, "scale");
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia, k](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k;
    });
  }

  // Elementwise log(sigmoid(x)) = -softplus(-x).
  Var log_sigmoid(Var a) {
    Tensor out(value(a).shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -softplus(-value(a)[i]);
    require_finite(out, "log_sigmoid");
    const std::size_t ia = a.id();
    return push(std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
      const Tensor& g = t.nodes_[self].grad;
      const Tensor& x = t.nodes_[ia].value;
      Tensor& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * stable_sigmoid(-x[i]);
    });
  }

  // Populates Parameter::grad for every parameter reachable from `loss`.
  void backward(Var loss) {
    if (loss.tape() != this) throw std::invalid_argument("backward: loss belongs to another tape");
    if (consumed_) throw std::logic_error("backward: tape already differentiated; re-run forward");
    if (value(loss).size() != 1) {
      throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(value(loss).shape()));
    }
    consumed_ = true;
    grad_slot(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.empty() || !n.backward) continue;
      n.backward(*this, i);
    }
    for (auto& [p, id] : param_leaves_) {
      const Tensor& g = nodes_[id].grad;
      if (g.empty()) continue;
      for (std::size_t j = 0; j < g.size(); ++j) p->grad[j] += g[j];
    }
  }

 private:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    BackwardFn backward;
  };

  Var push(Tensor value, std::initializer_list<std::size_t> /*inputs*/, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), Tensor(), std::move(fn)});
    return Var(this, nodes_.size() - 1);
  }

  Tensor& grad_slot(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor(n.value.shape());
    return n.grad;
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::vector<std::pair<Parameter*, std::size_t>> param_leaves_;
  bool consumed_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

}  // namespace advbot::diff
