#include "mgral/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace mgral {

BaselineMode parse_baseline_mode(const std::string& name) {
  if (name == "as-written") return BaselineMode::kAsWritten;
  if (name == "standard-ema") return BaselineMode::kStandardEma;
  throw ConfigError("unknown baseline mode: " + name +
                    " (expected as-written or standard-ema)");
}

std::string baseline_mode_name(BaselineMode mode) {
  return mode == BaselineMode::kAsWritten ? "as-written" : "standard-ema";
}

double delta_map(double map_i, double map_prev) {
  require(std::isfinite(map_i) && std::isfinite(map_prev),
          "non-finite performance value");
  return map_i - map_prev;
}

RewardState update_reference(const RewardState& state, double map_i) {
  if (!(state.lambda >= 0.0 && state.lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  require(std::isfinite(map_i), "non-finite performance value");
  RewardState next = state;
  if (!state.initialized) {
    next.ref = map_i;
    next.initialized = true;
    return next;
  }
  if (state.mode == BaselineMode::kAsWritten) {
    next.ref = (2.0 * state.lambda - 1.0) * state.ref +
               (1.0 - state.lambda) * map_i;
  } else {
    next.ref = state.lambda * state.ref + (1.0 - state.lambda) * map_i;
  }
  return next;
}

double policy_advantage(double map_i, const RewardState& state) {
  require(state.initialized, "reward reference not initialized");
  require(std::isfinite(map_i), "non-finite performance value");
  return map_i - state.ref;
}

IterationRecord rl_iteration(AgentParams& agent, const ALCycleState& state,
                             RewardState& reward,
                             const PerformanceEstimator& estimator,
                             int iteration, const RlOptions& opt, Rng& rng) {
  if (!(reward.lambda >= 0.0 && reward.lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  require(opt.budget >= 1, "budget must be positive");
  require(opt.budget <= state.pool.unlabeled_count(),
          "budget exceeds unlabeled count");

  Trajectory traj = sample_trajectory(agent, state.pool, opt.budget, rng);
  const EstimateResult est = estimator(traj.batch);
  const double perf = std::clamp(est.value, 0.0, 1.0);

  const double ref_before = reward.initialized ? reward.ref : perf;
  const double advantage =
      reward.initialized ? policy_advantage(perf, reward) : 0.0;

  if (advantage != 0.0) {
    AgentBlocks grads = backprop_policy(agent, traj, advantage);
    clip_global_norm(grads, opt.clip_norm);
    adam_update(agent, grads, opt.adam);
  }
  reward = update_reference(reward, perf);

  IterationRecord rec;
  rec.cycle = state.cycle;
  rec.iteration = iteration;
  rec.ids = traj.batch.ids;
  rec.performance = perf;
  rec.source = est.source;
  rec.advantage = advantage;
  rec.loss = -advantage * traj.logprob;
  rec.logprob = traj.logprob;
  rec.ref_before = ref_before;
  return rec;
}

void append_iteration_record(const IterationRecord& rec,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  require(out.good(), "cannot write iteration log: " + path.string());
  nlohmann::json j;
  j["cycle"] = rec.cycle;
  j["i"] = rec.iteration;
  j["ids"] = rec.ids;
  j["performance"] = rec.performance;
  j["source"] =
      rec.source == EstimateResult::Source::kLut ? "lut" : "direct";
  j["advantage"] = rec.advantage;
  j["loss"] = rec.loss;
  j["logprob"] = rec.logprob;
  j["ref_before"] = rec.ref_before;
  out << j.dump() << "\n";
}

std::vector<IterationRecord> load_iteration_records(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read iteration log: " + path.string());
  std::vector<IterationRecord> recs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    IterationRecord rec;
    rec.cycle = j.at("cycle").get<int>();
    rec.iteration = j.at("i").get<int>();
    rec.ids = j.at("ids").get<std::vector<int>>();
    rec.performance = j.at("performance").get<double>();
    rec.source = j.at("source").get<std::string>() == "direct"
                     ? EstimateResult::Source::kDirect
                     : EstimateResult::Source::kLut;
    rec.advantage = j.at("advantage").get<double>();
    rec.loss = j.at("loss").get<double>();
    rec.logprob = j.at("logprob").get<double>();
    rec.ref_before = j.at("ref_before").get<double>();
    recs.push_back(std::move(rec));
  }
  return recs;
}

}  // namespace mgral
