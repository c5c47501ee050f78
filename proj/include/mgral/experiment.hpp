#ifndef MGRAL_EXPERIMENT_HPP
#define MGRAL_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgral/lut.hpp"
#include "mgral/pool.hpp"
#include "mgral/reward.hpp"
#include "mgral/worlds.hpp"

namespace mgral {

// Everything a full comparison run needs. Reference operating point from
// the source method: lr 3.5e-4, lambda 0.5 as-written, hidden 257 (d=256
// plus the prev-score slot), 200 lookup entries, 2200/800 RL iterations
// per cycle. The defaults below are the desk-scale substitution used for
// tests and the demo: a separable cluster world where the learned policy
// has to fill coverage gaps, with training knobs sized for 150-iteration
// cycles (the reference knobs stall at this scale).
struct ExperimentConfig {
  std::string backend = "cluster";  // cluster | coverage
  int clusters = 5;
  int per_cluster = 40;
  int dim = 8;
  double sigma = 0.1;
  int count = 200;      // coverage backend pool size
  double radius = 0.5;  // coverage backend radius

  int initial_labeled = 5;
  int budget = 1;
  int cycles = 5;
  int rl_iterations = 150;

  double lr = 0.02;
  double lambda = 0.95;
  std::string baseline_mode = "standard-ema";
  double clip_norm = 5.0;

  int lut_entries = 60;
  int lut_neighbors = 5;
  double lut_epsilon = 1e-8;

  double noise_sigma = 0.0;
  bool standardize = true;
  bool warm_start = false;

  std::vector<std::string> strategies = {"random", "entropy", "coreset",
                                         "mgral"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";

  int pool_size() const {
    return backend == "cluster" ? clusters * per_cluster : count;
  }
  int hidden() const { return dim + 1; }
};

// Throws ConfigError on any violation; called before any work starts.
void validate_config(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path);

// A generated world plus its oracles, kept alive together. `oracle` is
// what training rewards come from (noise-wrapped when configured);
// `truth` is always the noise-free backend and is what curve points use.
struct WorldBundle {
  std::shared_ptr<ClusterWorld> cluster;
  std::shared_ptr<CoverageWorld> coverage;
  std::shared_ptr<const PerformanceOracle> oracle;
  std::shared_ptr<const PerformanceOracle> truth;

  const SamplePool& base_pool() const;
};

WorldBundle make_world(const ExperimentConfig& cfg, std::uint64_t world_seed);

// One row of the comparison output, also the CSV row format.
struct CurveRow {
  std::string strategy;
  std::uint64_t seed = 0;
  int cycle = 0;
  int labeled = 0;
  double performance = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

// Runs one (strategy, seed) cell: T cycles of selection on top of a
// strategy-independent world and initial labeled set, writing config,
// world snapshot, per-cycle lookup tables, iteration log, final agent
// checkpoint, and the curve CSV into outdir. Returns the T+1 curve rows.
std::vector<CurveRow> run_al_experiment(const ExperimentConfig& cfg,
                                        const std::string& strategy,
                                        std::uint64_t seed,
                                        const std::filesystem::path& outdir);

// Full strategy x seed matrix; writes curves.csv and summary.csv under
// outdir plus one subdirectory per cell. A failing cell aborts the matrix
// with a report of the cells already completed.
std::vector<CurveRow> compare_strategies(const ExperimentConfig& cfg,
                                         const std::filesystem::path& outdir);

// CSV with header strategy,seed,cycle,labeled,performance; doubles
// rendered with 17 significant digits so re-parsing is bit-exact.
void write_curve_csv(const std::vector<CurveRow>& rows,
                     const std::filesystem::path& path);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

// Per (strategy, cycle) mean and population std of performance across
// seeds: strategy,cycle,labeled,mean,std.
void write_summary_csv(const std::vector<CurveRow>& rows,
                       const std::filesystem::path& path);

}  // namespace mgral

#endif  // MGRAL_EXPERIMENT_HPP
