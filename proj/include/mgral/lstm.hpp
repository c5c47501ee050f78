#ifndef MGRAL_LSTM_HPP
#define MGRAL_LSTM_HPP

#include <array>
#include <utility>

#include "mgral/types.hpp"

namespace mgral {

enum Gate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

// One shared LSTM cell: per-gate input and recurrent weights plus bias.
// Hidden width equals input width for this project (feature dim + 1
// prev-score slot), but the shapes are kept independent.
template <class S>
struct LstmParams {
  std::array<MatrixX<S>, 4> wx;  // H x I, gate order: input, forget, cell, output
  std::array<MatrixX<S>, 4> wh;  // H x H
  std::array<VectorX<S>, 4> b;   // H

  int hidden() const { return static_cast<int>(b[0].size()); }
  int input() const { return static_cast<int>(wx[0].cols()); }

  void setZero() {
    for (auto& m : wx) m.setZero();
    for (auto& m : wh) m.setZero();
    for (auto& v : b) v.setZero();
  }

  static LstmParams zeros(int hidden, int input) {
    LstmParams p;
    for (int g = 0; g < 4; ++g) {
      p.wx[g] = MatrixX<S>::Zero(hidden, input);
      p.wh[g] = MatrixX<S>::Zero(hidden, hidden);
      p.b[g] = VectorX<S>::Zero(hidden);
    }
    return p;
  }
};

template <class S>
VectorX<S> sigmoid(const VectorX<S>& z) {
  return ((-z.array()).exp() + S(1)).inverse().matrix();
}

// Activations kept from one forward step; exactly what the backward pass
// consumes.
template <class S>
struct LstmStepActs {
  VectorX<S> gi, gf, gg, go;  // activated gates
  VectorX<S> c;               // new cell state
  VectorX<S> tanh_c;
  VectorX<S> h;               // new hidden state
};

// c' = sigm(f) .* c + sigm(i) .* tanh(g);  h' = sigm(o) .* tanh(c'),
// gates affine in (x, h).
template <class S>
LstmStepActs<S> lstm_step_detailed(const LstmParams<S>& p,
                                   const VectorX<S>& h, const VectorX<S>& c,
                                   const VectorX<S>& x) {
  require(h.allFinite() && c.allFinite() && x.allFinite(),
          "non-finite input to lstm_step");
  require(x.size() == p.input() && h.size() == p.hidden() &&
              c.size() == p.hidden(),
          "lstm_step shape mismatch");
  LstmStepActs<S> a;
  a.gi = sigmoid<S>(p.wx[kInput] * x + p.wh[kInput] * h + p.b[kInput]);
  a.gf = sigmoid<S>(p.wx[kForget] * x + p.wh[kForget] * h + p.b[kForget]);
  a.gg = (p.wx[kCell] * x + p.wh[kCell] * h + p.b[kCell]).array().tanh();
  a.go = sigmoid<S>(p.wx[kOutput] * x + p.wh[kOutput] * h + p.b[kOutput]);
  a.c = (a.gf.array() * c.array() + a.gi.array() * a.gg.array()).matrix();
  a.tanh_c = a.c.array().tanh().matrix();
  a.h = (a.go.array() * a.tanh_c.array()).matrix();
  return a;
}

template <class S>
std::pair<VectorX<S>, VectorX<S>> lstm_step(const LstmParams<S>& p,
                                            const VectorX<S>& h,
                                            const VectorX<S>& c,
                                            const VectorX<S>& x) {
  auto a = lstm_step_detailed(p, h, c, x);
  return {std::move(a.h), std::move(a.c)};
}

template <class S>
struct LstmStepGrads {
  VectorX<S> dx, dh_prev, dc_prev;
};

// Backward through one step. dh/dc are gradients w.r.t. this step's
// outputs; parameter gradients accumulate into `grad`.
template <class S>
LstmStepGrads<S> lstm_step_backward(const LstmParams<S>& p,
                                    const VectorX<S>& h_prev,
                                    const VectorX<S>& c_prev,
                                    const VectorX<S>& x,
                                    const LstmStepActs<S>& a,
                                    const VectorX<S>& dh, const VectorX<S>& dc,
                                    LstmParams<S>& grad) {
  using A = Eigen::Array<S, Eigen::Dynamic, 1>;
  A dgo = dh.array() * a.tanh_c.array();
  A dc_total = dc.array() + dh.array() * a.go.array() *
                                (S(1) - a.tanh_c.array().square());
  A dgi = dc_total * a.gg.array();
  A dgf = dc_total * c_prev.array();
  A dgg = dc_total * a.gi.array();

  // pre-activation gradients
  std::array<VectorX<S>, 4> dz;
  dz[kInput] = (dgi * a.gi.array() * (S(1) - a.gi.array())).matrix();
  dz[kForget] = (dgf * a.gf.array() * (S(1) - a.gf.array())).matrix();
  dz[kCell] = (dgg * (S(1) - a.gg.array().square())).matrix();
  dz[kOutput] = (dgo * a.go.array() * (S(1) - a.go.array())).matrix();

  LstmStepGrads<S> g;
  g.dx = VectorX<S>::Zero(x.size());
  g.dh_prev = VectorX<S>::Zero(h_prev.size());
  for (int k = 0; k < 4; ++k) {
    grad.wx[k].noalias() += dz[k] * x.transpose();
    grad.wh[k].noalias() += dz[k] * h_prev.transpose();
    grad.b[k] += dz[k];
    g.dx.noalias() += p.wx[k].transpose() * dz[k];
    g.dh_prev.noalias() += p.wh[k].transpose() * dz[k];
  }
  g.dc_prev = (dc_total * a.gf.array()).matrix();
  return g;
}

}  // namespace mgral

#endif  // MGRAL_LSTM_HPP
