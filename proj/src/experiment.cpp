#include "mgral/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mgral/agent.hpp"
#include "mgral/strategies.hpp"

namespace mgral {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  check(cfg.backend == "cluster" || cfg.backend == "coverage",
        "backend must be cluster or coverage");
  check(cfg.dim >= 1, "dim must be positive");
  if (cfg.backend == "cluster") {
    check(cfg.clusters >= 2, "clusters must be at least 2");
    check(cfg.per_cluster >= 1, "per_cluster must be positive");
    check(cfg.sigma > 0.0, "sigma must be positive");
  } else {
    check(cfg.count >= 1, "count must be positive");
    check(cfg.radius > 0.0, "radius must be positive");
  }
  check(cfg.pool_size() >= 2, "pool must hold at least 2 samples");
  check(cfg.initial_labeled >= 0, "initial_labeled must be non-negative");
  check(cfg.budget >= 1, "budget must be positive");
  check(cfg.cycles >= 0, "cycles must be non-negative");
  check(cfg.rl_iterations >= 1, "rl_iterations must be positive");
  check(cfg.budget * cfg.cycles + cfg.initial_labeled <= cfg.pool_size(),
        "budget*cycles + initial_labeled exceeds pool size");
  check(cfg.lr > 0.0, "lr must be positive");
  check(cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "lambda must lie in [0, 1]");
  parse_baseline_mode(cfg.baseline_mode);
  check(cfg.clip_norm > 0.0, "clip_norm must be positive");
  check(cfg.lut_entries >= 2, "lut_entries must be at least 2");
  check(cfg.lut_neighbors >= 1, "lut_neighbors must be positive");
  check(cfg.lut_epsilon > 0.0, "lut_epsilon must be positive");
  check(cfg.noise_sigma >= 0.0, "noise_sigma must be non-negative");
  check(!cfg.strategies.empty(), "at least one strategy required");
  check(!cfg.seeds.empty(), "at least one seed required");
  for (const auto& s : cfg.strategies) {
    const StrategyKind kind = parse_strategy(s);
    if (kind == StrategyKind::kEntropy) {
      check(cfg.backend == "cluster",
            "entropy strategy needs the cluster backend");
      check(cfg.initial_labeled >= 1,
            "entropy strategy needs at least one initially labeled sample");
    }
  }
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["backend"] = cfg.backend;
  j["clusters"] = cfg.clusters;
  j["per_cluster"] = cfg.per_cluster;
  j["dim"] = cfg.dim;
  j["sigma"] = cfg.sigma;
  j["count"] = cfg.count;
  j["radius"] = cfg.radius;
  j["initial_labeled"] = cfg.initial_labeled;
  j["budget"] = cfg.budget;
  j["cycles"] = cfg.cycles;
  j["rl_iterations"] = cfg.rl_iterations;
  j["lr"] = cfg.lr;
  j["lambda"] = cfg.lambda;
  j["baseline_mode"] = cfg.baseline_mode;
  j["clip_norm"] = cfg.clip_norm;
  j["lut_entries"] = cfg.lut_entries;
  j["lut_neighbors"] = cfg.lut_neighbors;
  j["lut_epsilon"] = cfg.lut_epsilon;
  j["noise_sigma"] = cfg.noise_sigma;
  j["standardize"] = cfg.standardize;
  j["warm_start"] = cfg.warm_start;
  j["hidden"] = cfg.hidden();
  j["strategies"] = cfg.strategies;
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot read config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  check(j.is_object(), "config file must hold a JSON object");

  ExperimentConfig cfg;
  std::optional<int> hidden_seen;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "backend") cfg.backend = value.get<std::string>();
      else if (key == "clusters") cfg.clusters = value.get<int>();
      else if (key == "per_cluster") cfg.per_cluster = value.get<int>();
      else if (key == "dim") cfg.dim = value.get<int>();
      else if (key == "sigma") cfg.sigma = value.get<double>();
      else if (key == "count") cfg.count = value.get<int>();
      else if (key == "radius") cfg.radius = value.get<double>();
      else if (key == "initial_labeled") cfg.initial_labeled = value.get<int>();
      else if (key == "budget") cfg.budget = value.get<int>();
      else if (key == "cycles") cfg.cycles = value.get<int>();
      else if (key == "rl_iterations") cfg.rl_iterations = value.get<int>();
      else if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "lambda") cfg.lambda = value.get<double>();
      else if (key == "baseline_mode") cfg.baseline_mode = value.get<std::string>();
      else if (key == "clip_norm") cfg.clip_norm = value.get<double>();
      else if (key == "lut_entries") cfg.lut_entries = value.get<int>();
      else if (key == "lut_neighbors") cfg.lut_neighbors = value.get<int>();
      else if (key == "lut_epsilon") cfg.lut_epsilon = value.get<double>();
      else if (key == "noise_sigma") cfg.noise_sigma = value.get<double>();
      else if (key == "standardize") cfg.standardize = value.get<bool>();
      else if (key == "warm_start") cfg.warm_start = value.get<bool>();
      else if (key == "hidden") {
        hidden_seen = value.get<int>();
      } else if (key == "strategies") {
        cfg.strategies = value.get<std::vector<std::string>>();
      } else if (key == "seeds") {
        cfg.seeds = value.get<std::vector<std::uint64_t>>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  // Hidden width is derived, not free; reject a stale value.
  check(!hidden_seen || *hidden_seen == cfg.hidden(),
        "hidden must equal dim + 1");
  return cfg;
}

void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write config file: " + path.string());
  out << config_to_json(cfg).dump(2) << "\n";
}

const SamplePool& WorldBundle::base_pool() const {
  if (cluster) return cluster->pool;
  require(coverage != nullptr, "world not generated");
  return coverage->pool;
}

WorldBundle make_world(const ExperimentConfig& cfg, std::uint64_t world_seed) {
  WorldBundle bundle;
  std::shared_ptr<const PerformanceOracle> base;
  if (cfg.backend == "cluster") {
    bundle.cluster = std::make_shared<ClusterWorld>(generate_cluster_pool(
        cfg.clusters, cfg.per_cluster, cfg.dim, cfg.sigma, world_seed));
    base = std::make_shared<ClusterOracle>(*bundle.cluster);
  } else {
    bundle.coverage = std::make_shared<CoverageWorld>(generate_coverage_pool(
        cfg.count, cfg.dim, cfg.radius, world_seed));
    base = std::make_shared<CoverageOracle>(*bundle.coverage);
  }
  bundle.truth = base;
  bundle.oracle = cfg.noise_sigma > 0.0
                      ? std::make_shared<NoisyOracle>(base, cfg.noise_sigma)
                      : base;
  return bundle;
}

namespace {

std::set<int> draw_initial_labeled(int n, int count, Rng& rng) {
  std::vector<int> deck(static_cast<std::size_t>(n));
  std::iota(deck.begin(), deck.end(), 0);
  std::set<int> labeled;
  for (int j = 0; j < count; ++j) {
    const int swap_at = j + rng.uniform_int(n - j);
    std::swap(deck[static_cast<std::size_t>(j)],
              deck[static_cast<std::size_t>(swap_at)]);
    labeled.insert(deck[static_cast<std::size_t>(j)]);
  }
  return labeled;
}

void save_world_snapshot(const ExperimentConfig& cfg, std::uint64_t world_seed,
                         const std::filesystem::path& path) {
  nlohmann::json j;
  j["backend"] = cfg.backend;
  j["dim"] = cfg.dim;
  if (cfg.backend == "cluster") {
    j["clusters"] = cfg.clusters;
    j["per_cluster"] = cfg.per_cluster;
    j["sigma"] = cfg.sigma;
  } else {
    j["count"] = cfg.count;
    j["radius"] = cfg.radius;
  }
  j["noise_sigma"] = cfg.noise_sigma;
  j["world_seed"] = world_seed;
  std::ofstream out(path);
  require(out.good(), "cannot write world snapshot: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

std::vector<CurveRow> run_al_experiment(const ExperimentConfig& cfg,
                                        const std::string& strategy,
                                        std::uint64_t seed,
                                        const std::filesystem::path& outdir) {
  validate_config(cfg);
  const StrategyKind kind = parse_strategy(strategy);

  std::filesystem::create_directories(outdir);
  save_config(cfg, outdir / "config.json");

  // World and initial labeled set depend only on the master seed, never
  // on the strategy, so curves stay comparable across strategies.
  const std::uint64_t world_seed = derive_seed(seed, "world");
  const WorldBundle world = make_world(cfg, world_seed);
  save_world_snapshot(cfg, world_seed, outdir / "world.json");

  Rng init_rng(derive_seed(seed, "init"));
  const int n = world.base_pool().size();
  std::set<int> init_labeled =
      draw_initial_labeled(n, cfg.initial_labeled, init_rng);

  ALCycleState state;
  state.cycle = 0;
  state.pool = world.base_pool().with_labeled(std::move(init_labeled));

  // The agent and the feature-space strategies see the (optionally
  // standardized) view; oracles always score against the raw world.
  const Matrix view_features =
      cfg.standardize ? standardize_features(world.base_pool()).features()
                      : world.base_pool().features();

  std::vector<CurveRow> rows;
  auto record_point = [&](int t) {
    const double perf = world.truth->evaluate(state.pool, SelectionBatch{},
                                              derive_seed(seed, "curve",
                                                          std::uint64_t(t)));
    state.history.push_back(
        CurvePoint{t, state.pool.labeled_count(), perf});
    rows.push_back(
        CurveRow{strategy, seed, t, state.pool.labeled_count(), perf});
  };
  record_point(0);

  const std::filesystem::path iter_log = outdir / "iterations.jsonl";
  std::optional<AgentParams> agent;
  std::optional<Rng> rl_rng;
  if (kind == StrategyKind::kMgral) {
    std::ofstream clear_log(iter_log);  // start from an empty log
  }

  for (int t = 1; t <= cfg.cycles; ++t) {
    const std::uint64_t strat_base =
        derive_seed(seed, strategy, std::uint64_t(t));
    SelectionBatch batch;
    switch (kind) {
      case StrategyKind::kRandom: {
        Rng rng(derive_seed(strat_base, "select"));
        batch = random_select(state, cfg.budget, rng);
        break;
      }
      case StrategyKind::kEntropy: {
        const ClusterWorld& cw = *world.cluster;
        const std::set<int>& labeled = state.pool.labeled();
        batch = entropy_select(state, cfg.budget, [&](int id) {
          return predictive_distribution(cw, labeled, id).probabilities;
        });
        break;
      }
      case StrategyKind::kCoreset: {
        ALCycleState view_state;
        view_state.cycle = t;
        view_state.pool = SamplePool(view_features, state.pool.labeled());
        batch = kcenter_greedy(view_state, cfg.budget);
        break;
      }
      case StrategyKind::kMgral: {
        ALCycleState view_state;
        view_state.cycle = t;
        view_state.pool = SamplePool(view_features, state.pool.labeled());

        Rng agent_rng(derive_seed(strat_base, "agent"));
        if (!agent || !cfg.warm_start) {
          agent = init_agent(cfg.dim, agent_rng);
        }

        LookupTable lut =
            build_lut(view_state, *world.oracle, cfg.lut_entries, cfg.budget,
                      derive_seed(strat_base, "lut"));
        const auto estimator = [&](const SelectionBatch& b) {
          return estimate_performance(lut, b, view_state.pool,
                                      cfg.lut_neighbors, *world.oracle,
                                      cfg.lut_epsilon);
        };

        RewardState reward;
        reward.lambda = cfg.lambda;
        reward.mode = parse_baseline_mode(cfg.baseline_mode);
        RlOptions opt;
        opt.budget = cfg.budget;
        opt.adam.lr = cfg.lr;
        opt.clip_norm = cfg.clip_norm;

        rl_rng = Rng(derive_seed(strat_base, "rl"));
        for (int i = 0; i < cfg.rl_iterations; ++i) {
          IterationRecord rec =
              rl_iteration(*agent, view_state, reward, estimator, i, opt,
                           *rl_rng);
          append_iteration_record(rec, iter_log);
        }
        save_lut(lut, outdir / ("lut_cycle_" + std::to_string(t) + ".jsonl"));

        ScoredPool scored =
            score_pool(*agent, view_state.pool, view_state.pool.unlabeled_ids());
        batch = select_top_b_ids(scored.order, scored.logits, cfg.budget);
        break;
      }
    }
    state = apply_selection(state, batch);
    record_point(t);
  }

  if (agent) {
    save_agent_checkpoint(*agent, rl_rng.value_or(Rng(0)),
                          outdir / "agent_final.json");
  }
  write_curve_csv(rows, outdir / "curve.csv");
  return rows;
}

std::vector<CurveRow> compare_strategies(const ExperimentConfig& cfg,
                                         const std::filesystem::path& outdir) {
  validate_config(cfg);
  std::filesystem::create_directories(outdir);

  std::vector<CurveRow> rows;
  std::vector<std::string> completed;
  for (const auto& strategy : cfg.strategies) {
    for (std::uint64_t seed : cfg.seeds) {
      const std::filesystem::path cell_dir =
          outdir / (strategy + "_seed" + std::to_string(seed));
      try {
        auto cell = run_al_experiment(cfg, strategy, seed, cell_dir);
        rows.insert(rows.end(), cell.begin(), cell.end());
      } catch (const std::exception& e) {
        std::string done = completed.empty() ? "none" : "";
        for (std::size_t i = 0; i < completed.size(); ++i) {
          if (i) done += ", ";
          done += completed[i];
        }
        throw std::runtime_error(
            "comparison aborted at cell " + strategy + "/seed" +
            std::to_string(seed) + ": " + e.what() +
            " (completed cells: " + done + ")");
      }
      completed.push_back(strategy + "/seed" + std::to_string(seed));
    }
  }

  std::sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.cycle < b.cycle;
  });
  write_curve_csv(rows, outdir / "curves.csv");
  write_summary_csv(rows, outdir / "summary.csv");
  return rows;
}

void write_curve_csv(const std::vector<CurveRow>& rows,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write curves file: " + path.string());
  out << "strategy,seed,cycle,labeled,performance\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.seed << ',' << r.cycle << ',' << r.labeled
        << ',' << fmt17(r.performance) << '\n';
  }
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read curves file: " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)),
          path.string() + " line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "strategy,seed,cycle,labeled,performance",
          path.string() + " line 1: unexpected header \"" + line + "\"");
  std::vector<CurveRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw std::runtime_error(path.string() + " line " +
                               std::to_string(lineno) + ": expected 5 fields, got " +
                               std::to_string(fields.size()));
    }
    CurveRow r;
    try {
      r.strategy = fields[0];
      std::size_t used = 0;
      r.seed = std::stoull(fields[1], &used);
      require(used == fields[1].size(), "trailing characters in seed");
      r.cycle = std::stoi(fields[2], &used);
      require(used == fields[2].size(), "trailing characters in cycle");
      r.labeled = std::stoi(fields[3], &used);
      require(used == fields[3].size(), "trailing characters in labeled");
      r.performance = std::stod(fields[4], &used);
      require(used == fields[4].size(), "trailing characters in performance");
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + " line " +
                               std::to_string(lineno) + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(const std::vector<CurveRow>& rows,
                       const std::filesystem::path& path) {
  std::map<std::pair<std::string, int>, std::pair<int, std::vector<double>>>
      groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.strategy, r.cycle}];
    g.first = r.labeled;
    g.second.push_back(r.performance);
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write summary file: " + path.string());
  out << "strategy,cycle,labeled,mean,std\n";
  for (const auto& [key, g] : groups) {
    const auto& perfs = g.second;
    double mean = 0.0;
    for (double p : perfs) mean += p;
    mean /= static_cast<double>(perfs.size());
    double var = 0.0;
    for (double p : perfs) var += (p - mean) * (p - mean);
    var /= static_cast<double>(perfs.size());
    out << key.first << ',' << key.second << ',' << g.first << ','
        << fmt17(mean) << ',' << fmt17(std::sqrt(var)) << '\n';
  }
}

}  // namespace mgral
