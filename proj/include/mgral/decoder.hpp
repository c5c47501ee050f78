#ifndef MGRAL_DECODER_HPP
#define MGRAL_DECODER_HPP

#include "mgral/types.hpp"

namespace mgral {

// Two-layer scoring head on top of the LSTM hidden state:
// logit = w2 * tanh(w1 * h + b1) + b2.  Hidden width H/2 (min 1).
template <class S>
struct DecoderParams {
  MatrixX<S> w1;  // H2 x H
  VectorX<S> b1;  // H2
  MatrixX<S> w2;  // 1 x H2
  VectorX<S> b2;  // 1

  int hidden() const { return static_cast<int>(w1.cols()); }
  int mid() const { return static_cast<int>(w1.rows()); }

  static int mid_for(int hidden) { return hidden / 2 < 1 ? 1 : hidden / 2; }

  static DecoderParams zeros(int hidden) {
    const int h2 = mid_for(hidden);
    DecoderParams p;
    p.w1 = MatrixX<S>::Zero(h2, hidden);
    p.b1 = VectorX<S>::Zero(h2);
    p.w2 = MatrixX<S>::Zero(1, h2);
    p.b2 = VectorX<S>::Zero(1);
    return p;
  }
};

template <class S>
struct DecodeActs {
  VectorX<S> t1;  // tanh of the hidden layer
  S logit;
};

template <class S>
DecodeActs<S> decode_detailed(const DecoderParams<S>& p, const VectorX<S>& h) {
  require(h.allFinite(), "non-finite input to decode_score");
  require(h.size() == p.hidden(), "decode_score shape mismatch");
  DecodeActs<S> a;
  a.t1 = (p.w1 * h + p.b1).array().tanh().matrix();
  a.logit = (p.w2 * a.t1)(0) + p.b2(0);
  return a;
}

template <class S>
S decode_score(const DecoderParams<S>& p, const VectorX<S>& h) {
  return decode_detailed(p, h).logit;
}

// Backward for one decode; returns dL/dh, accumulates parameter
// gradients into `grad`.
template <class S>
VectorX<S> decode_backward(const DecoderParams<S>& p, const VectorX<S>& h,
                           const VectorX<S>& t1, S dlogit,
                           DecoderParams<S>& grad) {
  grad.w2.noalias() += dlogit * t1.transpose();
  grad.b2(0) += dlogit;
  VectorX<S> dt1 = p.w2.transpose() * dlogit;
  VectorX<S> da1 =
      (dt1.array() * (S(1) - t1.array().square())).matrix();
  grad.w1.noalias() += da1 * h.transpose();
  grad.b1 += da1;
  return p.w1.transpose() * da1;
}

}  // namespace mgral

#endif  // MGRAL_DECODER_HPP
