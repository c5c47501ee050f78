#ifndef MGRAL_REWARD_HPP
#define MGRAL_REWARD_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mgral/adam.hpp"
#include "mgral/agent.hpp"
#include "mgral/lut.hpp"
#include "mgral/pool.hpp"
#include "mgral/rng.hpp"

namespace mgral {

// The printed recurrence ref' = lambda*ref + (1-lambda)*(map - ref)
// degenerates at lambda = 0.5 (ref' = map/2); the standard EMA is the
// likely intent. Both are kept reproducible behind this switch.
enum class BaselineMode { kAsWritten, kStandardEma };

BaselineMode parse_baseline_mode(const std::string& name);
std::string baseline_mode_name(BaselineMode mode);

// Moving-average reference the advantage is measured against.
struct RewardState {
  double ref = 0.0;
  double lambda = 0.5;
  BaselineMode mode = BaselineMode::kAsWritten;
  bool initialized = false;
};

// Performance gain of this iteration over the previous measurement.
double delta_map(double map_i, double map_prev);

// Advances the reference. First call adopts map_i directly; afterwards
// as-written mode computes (2*lambda-1)*ref + (1-lambda)*map_i (the exact
// rearrangement of the printed recurrence) and standard-ema computes
// lambda*ref + (1-lambda)*map_i.
RewardState update_reference(const RewardState& state, double map_i);

// map_i minus the reference as it stood BEFORE this iteration's update.
double policy_advantage(double map_i, const RewardState& state);

// Audit row for one RL iteration; loss == -advantage * logprob.
struct IterationRecord {
  int cycle = 0;
  int iteration = 0;
  std::vector<int> ids;
  double performance = 0.0;
  EstimateResult::Source source = EstimateResult::Source::kLut;
  double advantage = 0.0;
  double loss = 0.0;
  double logprob = 0.0;
  double ref_before = 0.0;
};

struct RlOptions {
  int budget = 1;
  AdamOptions adam;
  double clip_norm = 5.0;
};

// Maps a candidate batch to an estimated performance; the harness wires
// this to a lookup table with direct-oracle fallback.
using PerformanceEstimator = std::function<EstimateResult(const SelectionBatch&)>;

// One policy-gradient step: sample a trajectory over a fresh permutation,
// estimate its performance, update the agent against the pre-update
// reference, then advance the reference. Throws without touching the
// agent or the reward state if estimation or the update fails. A zero
// advantage (including the very first iteration, which only seeds the
// reference) leaves the agent bitwise unchanged.
IterationRecord rl_iteration(AgentParams& agent, const ALCycleState& state,
                             RewardState& reward,
                             const PerformanceEstimator& estimator,
                             int iteration, const RlOptions& opt, Rng& rng);

// Line-delimited audit log, one JSON object per iteration.
void append_iteration_record(const IterationRecord& rec,
                             const std::filesystem::path& path);
std::vector<IterationRecord> load_iteration_records(
    const std::filesystem::path& path);

}  // namespace mgral

#endif  // MGRAL_REWARD_HPP
