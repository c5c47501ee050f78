#ifndef MGRAL_STRATEGIES_HPP
#define MGRAL_STRATEGIES_HPP

#include <functional>
#include <string>

#include "mgral/pool.hpp"
#include "mgral/rng.hpp"

namespace mgral {

enum class StrategyKind { kRandom, kEntropy, kCoreset, kMgral };

// Names accepted on the CLI and in config files:
// random | entropy | coreset | mgral.
StrategyKind parse_strategy(const std::string& name);
std::string strategy_name(StrategyKind kind);

// Uniform random B-subset of the unlabeled ids, ordered by draw.
// Consumes exactly b draws from the stream.
SelectionBatch random_select(const ALCycleState& state, int b, Rng& rng);

// Class-probability probe for one sample id, supplied by the backend.
using ProbeModel = std::function<Vector(int sample_id)>;

// Top-B unlabeled ids by Shannon entropy (natural log) of their
// predictive distribution; ties go to the smaller id.
SelectionBatch entropy_select(const ALCycleState& state, int b,
                              const ProbeModel& probe);

// Farthest-first traversal: repeatedly add the unlabeled sample with the
// largest minimum distance to labeled + already-selected. With nothing
// labeled the first pick is the sample farthest from the pool centroid.
// Ties go to the smaller id.
SelectionBatch kcenter_greedy(const ALCycleState& state, int b);

}  // namespace mgral

#endif  // MGRAL_STRATEGIES_HPP
