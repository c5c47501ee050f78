#ifndef MGRAL_ORACLE_HPP
#define MGRAL_ORACLE_HPP

#include <cstdint>
#include <memory>

#include "mgral/pool.hpp"

namespace mgral {

// Task-performance evaluator: what score would the downstream model reach
// if `hypothetical` were annotated on top of the pool's labeled set.
// Implementations must be deterministic given (pool.labeled, batch ids,
// seed) and return a value in [0, 1].
class PerformanceOracle {
 public:
  virtual ~PerformanceOracle() = default;
  virtual double evaluate(const SamplePool& pool,
                          const SelectionBatch& hypothetical,
                          std::uint64_t seed) const = 0;
};

// Additive-Gaussian reward noise around a base oracle; noise is drawn
// from the call's seed, so evaluations stay reproducible. Output is
// clamped to [0, 1].
class NoisyOracle final : public PerformanceOracle {
 public:
  NoisyOracle(std::shared_ptr<const PerformanceOracle> base, double sigma)
      : base_(std::move(base)), sigma_(sigma) {}

  double evaluate(const SamplePool& pool, const SelectionBatch& hypothetical,
                  std::uint64_t seed) const override;

 private:
  std::shared_ptr<const PerformanceOracle> base_;
  double sigma_;
};

}  // namespace mgral

#endif  // MGRAL_ORACLE_HPP
