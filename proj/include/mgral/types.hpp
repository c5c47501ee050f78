#ifndef MGRAL_TYPES_HPP
#define MGRAL_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mgral {

template <class S>
using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Project-wide scalar. The math kernels stay templated; everything above
// them is instantiated at double.
using Scalar = double;
using Matrix = MatrixX<Scalar>;
using Vector = VectorX<Scalar>;

// Invalid experiment configuration. The CLI maps this to exit code 1;
// every other exception maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace mgral

#endif  // MGRAL_TYPES_HPP
