#ifndef MGRAL_ASSIGNMENT_HPP
#define MGRAL_ASSIGNMENT_HPP

#include <limits>
#include <vector>

#include "mgral/types.hpp"

namespace mgral {

// Exact minimum-cost perfect matching on a square cost matrix
// (Jonker-Volgenant style shortest augmenting paths with dual potentials,
// O(n^3)). Returns the total cost re-summed from the original matrix;
// match[i] = column assigned to row i when requested.
template <class S>
S solve_assignment(const MatrixX<S>& cost, std::vector<int>* match = nullptr) {
  const int n = static_cast<int>(cost.rows());
  require(n >= 1 && cost.cols() == n, "assignment matrix must be square");
  require(cost.allFinite(), "assignment costs must be finite");
  const S inf = std::numeric_limits<S>::infinity();

  std::vector<S> u(static_cast<std::size_t>(n) + 1, S(0));
  std::vector<S> v(static_cast<std::size_t>(n) + 1, S(0));
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<S> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      S delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const S cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                      v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) {
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] =
          j - 1;
    }
  }
  S total = S(0);
  for (int i = 0; i < n; ++i) total += cost(i, row_to_col[static_cast<std::size_t>(i)]);
  if (match) *match = std::move(row_to_col);
  return total;
}

}  // namespace mgral

#endif  // MGRAL_ASSIGNMENT_HPP
