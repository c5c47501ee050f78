#ifndef MGRAL_ADAM_HPP
#define MGRAL_ADAM_HPP

#include <cmath>

#include "mgral/types.hpp"

namespace mgral {

struct AdamOptions {
  double lr = 3.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam on one parameter block. `t` is the step counter
// AFTER incrementing (1 on the first update).
template <class Block>
void adam_step(Block& param, const Block& grad, Block& m, Block& v, long t,
               const AdamOptions& opt) {
  m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
  v = (opt.beta2 * v.array() +
       (1.0 - opt.beta2) * grad.array().square()).matrix();
  const double corr1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  param.array() -= opt.lr * (m.array() / corr1) /
                   ((v.array() / corr2).sqrt() + opt.eps);
}

}  // namespace mgral

#endif  // MGRAL_ADAM_HPP
