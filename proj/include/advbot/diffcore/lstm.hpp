#pragma once

// Standard LSTM cell, gate order (input, forget, candidate, output):
//   z = W [x; h_prev] + b
//   i = sigmoid(z_i)  f = sigmoid(z_f)  g = tanh(z_g)  o = sigmoid(z_o)
//   c = f * c_prev + i * g
//   h = o * tanh(c)

#include <cstddef>
#include <string>

#include "advbot/common/rng.hpp"
#include "advbot/diffcore/tape.hpp"
#include "advbot/diffcore/tensor.hpp"

namespace advbot::diff {

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter weight;  // [4h, d_in + h]
  Parameter bias;    // [4h]

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t d_in, std::size_t d_h)
      : input_dim(d_in),
        hidden_dim(d_h),
        weight(prefix + ".weight", Tensor({4 * d_h, d_in + d_h})),
        bias(prefix + ".bias", Tensor({4 * d_h})) {}
};

struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t d_h) { return {Tensor({d_h}), Tensor({d_h})}; }
};

inline LstmState lstm_cell_step(const Tensor& x, const LstmState& prev, const LstmParams& p) {
  using namespace kernel;
  if (x.rank() != 1 || x.size() != p.input_dim || prev.h.size() != p.hidden_dim || prev.c.size() != p.hidden_dim) {
    throw std::invalid_argument("lstm_cell_step: expected x[" + std::to_string(p.input_dim) + "], state[" +
                                std::to_string(p.hidden_dim) + "], got x" + shape_str(x.shape()) + " h" +
                                shape_str(prev.h.shape()));
  }
  const std::size_t h = p.hidden_dim;
  const Tensor z = add(matmul(p.weight.value, concat(x, prev.h)), p.bias.value);
  const Tensor i = sigmoid(slice(z, 0, h));
  const Tensor f = sigmoid(slice(z, h, h));
  const Tensor g = tanh(slice(z, 2 * h, h));
  const Tensor o = sigmoid(slice(z, 3 * h, h));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor hn = mul(o, tanh(c));
  return {std::move(hn), std::move(c)};
}

struct LstmVars {
  Var h;
  Var c;
};

// Same arithmetic as lstm_cell_step, recorded on a tape.
inline LstmVars lstm_cell_step(Tape& t, Var x, LstmVars prev, LstmParams& p) {
  const std::size_t h = p.hidden_dim;
  const Var z = t.add(t.matmul(t.param(p.weight), t.concat(x, prev.h)), t.param(p.bias));
  const Var i = t.sigmoid(t.slice(z, 0, h));
  const Var f = t.sigmoid(t.slice(z, h, h));
  const Var g = t.tanh(t.slice(z, 2 * h, h));
  const Var o = t.sigmoid(t.slice(z, 3 * h, h));
  const Var c = t.add(t.mul(f, prev.c), t.mul(i, g));
  const Var hn = t.mul(o, t.tanh(c));
  return {hn, c};
}

inline void uniform_init(Parameter& p, Rng& rng, double scale) {
  for (auto& v : p.value.storage()) v = rng.uniform(-scale, scale);
  p.zero_grad();
}

}  // namespace advbot::diff
