#ifndef MGRAL_WASSERSTEIN_HPP
#define MGRAL_WASSERSTEIN_HPP

#include "mgral/assignment.hpp"
#include "mgral/types.hpp"

namespace mgral {

// W1 between two equal-size uniform empirical distributions (columns =
// points, Euclidean ground metric): minimum-cost perfect matching divided
// by the batch size. Exact, no entropic approximation.
template <class S>
S batch_wasserstein(const MatrixX<S>& a, const MatrixX<S>& b) {
  require(a.cols() == b.cols() && a.cols() >= 1,
          "batch_wasserstein: batches must be non-empty and of equal size");
  require(a.rows() == b.rows(), "batch_wasserstein: dimension mismatch");
  const int n = static_cast<int>(a.cols());
  MatrixX<S> cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost(i, j) = (a.col(i) - b.col(j)).norm();
    }
  }
  return solve_assignment<S>(cost) / S(n);
}

}  // namespace mgral

#endif  // MGRAL_WASSERSTEIN_HPP
