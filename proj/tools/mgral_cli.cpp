#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgral/experiment.hpp"
#include "mgral/rng.hpp"
#include "mgral/svg.hpp"

namespace {

using mgral::ExperimentConfig;

// Staging area for config flags: a config file supplies the base values
// and any flag given on the command line overrides that field.
struct ConfigCli {
  std::string path;
  ExperimentConfig staged;
  std::vector<std::function<void(ExperimentConfig&)>> appliers;

  template <class T>
  void stage(CLI::Option* opt, T& staged_field,
             T ExperimentConfig::*field) {
    appliers.push_back([opt, &staged_field, field](ExperimentConfig& cfg) {
      if (opt->count() > 0) cfg.*field = staged_field;
    });
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!path.empty()) cfg = mgral::load_config(path);
    for (const auto& apply : appliers) apply(cfg);
    mgral::validate_config(cfg);
    return cfg;
  }
};

void add_config_flags(CLI::App* sub, ConfigCli& cc) {
  sub->add_option("--config", cc.path, "JSON config file; flags override");
  auto& v = cc.staged;
  cc.stage(sub->add_option("--backend", v.backend, "cluster | coverage"),
           v.backend, &ExperimentConfig::backend);
  cc.stage(sub->add_option("--clusters", v.clusters, "cluster count"),
           v.clusters, &ExperimentConfig::clusters);
  cc.stage(sub->add_option("--per-cluster", v.per_cluster,
                           "samples per cluster"),
           v.per_cluster, &ExperimentConfig::per_cluster);
  cc.stage(sub->add_option("--dim", v.dim, "feature dimension"), v.dim,
           &ExperimentConfig::dim);
  cc.stage(sub->add_option("--sigma", v.sigma, "cluster spread"), v.sigma,
           &ExperimentConfig::sigma);
  cc.stage(sub->add_option("--count", v.count, "coverage pool size"), v.count,
           &ExperimentConfig::count);
  cc.stage(sub->add_option("--radius", v.radius, "coverage radius"), v.radius,
           &ExperimentConfig::radius);
  cc.stage(sub->add_option("--initial-labeled", v.initial_labeled,
                           "initially labeled count"),
           v.initial_labeled, &ExperimentConfig::initial_labeled);
  cc.stage(sub->add_option("--budget", v.budget, "batch size B per cycle"),
           v.budget, &ExperimentConfig::budget);
  cc.stage(sub->add_option("--cycles", v.cycles, "AL cycles T"), v.cycles,
           &ExperimentConfig::cycles);
  cc.stage(sub->add_option("--rl-iterations", v.rl_iterations,
                           "RL iterations per cycle"),
           v.rl_iterations, &ExperimentConfig::rl_iterations);
  cc.stage(sub->add_option("--lr", v.lr, "Adam learning rate"), v.lr,
           &ExperimentConfig::lr);
  cc.stage(sub->add_option("--lambda", v.lambda, "baseline momentum"),
           v.lambda, &ExperimentConfig::lambda);
  cc.stage(sub->add_option("--baseline-mode", v.baseline_mode,
                           "as-written | standard-ema"),
           v.baseline_mode, &ExperimentConfig::baseline_mode);
  cc.stage(sub->add_option("--clip-norm", v.clip_norm,
                           "global gradient norm clip"),
           v.clip_norm, &ExperimentConfig::clip_norm);
  cc.stage(sub->add_option("--lut-entries", v.lut_entries,
                           "lookup table size M"),
           v.lut_entries, &ExperimentConfig::lut_entries);
  cc.stage(sub->add_option("--lut-neighbors", v.lut_neighbors,
                           "neighbors k in the weighted estimate"),
           v.lut_neighbors, &ExperimentConfig::lut_neighbors);
  cc.stage(sub->add_option("--lut-epsilon", v.lut_epsilon,
                           "distance weight epsilon"),
           v.lut_epsilon, &ExperimentConfig::lut_epsilon);
  cc.stage(sub->add_option("--noise-sigma", v.noise_sigma,
                           "additive reward noise"),
           v.noise_sigma, &ExperimentConfig::noise_sigma);
  cc.stage(sub->add_flag("--standardize,!--no-standardize", v.standardize,
                         "standardize features for the agent view"),
           v.standardize, &ExperimentConfig::standardize);
  cc.stage(sub->add_flag("--warm-start,!--no-warm-start", v.warm_start,
                         "carry agent parameters across cycles"),
           v.warm_start, &ExperimentConfig::warm_start);
  cc.stage(sub->add_option("--strategies", v.strategies,
                           "strategies to compare")
               ->delimiter(','),
           v.strategies, &ExperimentConfig::strategies);
  cc.stage(sub->add_option("--seeds", v.seeds, "seeds to run")->delimiter(','),
           v.seeds, &ExperimentConfig::seeds);
  cc.stage(sub->add_option("--output-dir", v.output_dir,
                           "default artifact directory"),
           v.output_dir, &ExperimentConfig::output_dir);
}

std::set<int> labeled_or_default(const ExperimentConfig& cfg,
                                 std::uint64_t seed,
                                 const std::vector<int>& labeled,
                                 bool labeled_given) {
  if (labeled_given) return {labeled.begin(), labeled.end()};
  // Same draw the run subcommand makes, so files line up by default.
  mgral::Rng rng(mgral::derive_seed(seed, "init"));
  std::vector<int> deck(static_cast<std::size_t>(cfg.pool_size()));
  std::iota(deck.begin(), deck.end(), 0);
  std::set<int> out;
  for (int j = 0; j < cfg.initial_labeled; ++j) {
    const int swap_at =
        j + rng.uniform_int(static_cast<int>(deck.size()) - j);
    std::swap(deck[static_cast<std::size_t>(j)],
              deck[static_cast<std::size_t>(swap_at)]);
    out.insert(deck[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch active-learning engine with an RL sampling agent"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one (strategy, seed) cell");
  ConfigCli run_cfg;
  add_config_flags(run, run_cfg);
  std::string run_strategy;
  std::uint64_t run_seed = 0;
  std::string run_out;
  run->add_option("--strategy", run_strategy,
                  "random | entropy | coreset | mgral")
      ->required();
  run->add_option("--seed", run_seed, "master seed")->required();
  run->add_option("--out", run_out, "artifact directory for this cell");
  run->callback([&]() {
    const ExperimentConfig cfg = run_cfg.resolve();
    const std::string out =
        run_out.empty() ? cfg.output_dir + "/" + run_strategy + "_seed" +
                              std::to_string(run_seed)
                        : run_out;
    const auto rows = mgral::run_al_experiment(cfg, run_strategy, run_seed, out);
    const auto& last = rows.back();
    std::cout << "cycle " << last.cycle << ": performance " << last.performance
              << " with " << last.labeled << " labeled\n";
    std::cout << "artifacts in " << out << "\n";
  });

  // compare
  auto* compare = app.add_subcommand("compare", "run the strategy x seed matrix");
  ConfigCli cmp_cfg;
  add_config_flags(compare, cmp_cfg);
  std::string cmp_out;
  compare->add_option("--out", cmp_out, "output directory");
  compare->callback([&]() {
    const ExperimentConfig cfg = cmp_cfg.resolve();
    const std::string out = cmp_out.empty() ? cfg.output_dir : cmp_out;
    const auto rows = mgral::compare_strategies(cfg, out);
    std::cout << "wrote " << out << "/curves.csv (" << rows.size()
              << " rows) and " << out << "/summary.csv\n";
  });

  // build-lut
  auto* build = app.add_subcommand("build-lut", "build a standalone lookup table");
  ConfigCli build_cfg;
  add_config_flags(build, build_cfg);
  std::uint64_t build_seed = 0;
  std::vector<int> build_labeled;
  std::string build_out = "lut.jsonl";
  build->add_option("--seed", build_seed, "master seed")->required();
  auto* build_labeled_opt =
      build->add_option("--labeled", build_labeled, "labeled sample ids")
          ->delimiter(',');
  build->add_option("--out", build_out, "output file");
  build->callback([&]() {
    const ExperimentConfig cfg = build_cfg.resolve();
    const auto world = mgral::make_world(cfg, mgral::derive_seed(build_seed, "world"));
    const std::set<int> labeled = labeled_or_default(
        cfg, build_seed, build_labeled, build_labeled_opt->count() > 0);
    const mgral::Matrix view =
        cfg.standardize
            ? mgral::standardize_features(world.base_pool()).features()
            : world.base_pool().features();
    mgral::ALCycleState state;
    state.pool = mgral::SamplePool(view, labeled);
    const auto lut = mgral::build_lut(state, *world.oracle, cfg.lut_entries,
                                      cfg.budget,
                                      mgral::derive_seed(build_seed, "build-lut"));
    mgral::save_lut(lut, build_out);
    std::cout << "wrote " << build_out << " (" << lut.entries.size()
              << " entries, budget " << lut.budget << ")\n";
  });

  // estimate
  auto* estimate = app.add_subcommand("estimate", "query a saved lookup table");
  ConfigCli est_cfg;
  add_config_flags(estimate, est_cfg);
  std::uint64_t est_seed = 0;
  std::vector<int> est_ids;
  std::vector<int> est_labeled;
  std::string est_lut;
  estimate->add_option("--seed", est_seed, "master seed the table was built with")
      ->required();
  estimate->add_option("--lut", est_lut, "lookup table file")->required();
  estimate->add_option("--ids", est_ids, "candidate batch sample ids")
      ->required()
      ->delimiter(',');
  auto* est_labeled_opt =
      estimate->add_option("--labeled", est_labeled, "labeled sample ids")
          ->delimiter(',');
  estimate->callback([&]() {
    const ExperimentConfig cfg = est_cfg.resolve();
    const auto world = mgral::make_world(cfg, mgral::derive_seed(est_seed, "world"));
    const std::set<int> labeled = labeled_or_default(
        cfg, est_seed, est_labeled, est_labeled_opt->count() > 0);
    const mgral::Matrix view =
        cfg.standardize
            ? mgral::standardize_features(world.base_pool()).features()
            : world.base_pool().features();
    const mgral::SamplePool pool(view, labeled);
    auto lut = mgral::load_lut(est_lut);
    const auto res = mgral::estimate_performance(
        lut, mgral::make_batch(est_ids), pool, cfg.lut_neighbors,
        *world.oracle, cfg.lut_epsilon);
    std::cout << "estimate " << res.value << " source "
              << (res.source == mgral::EstimateResult::Source::kLut ? "lut"
                                                                    : "direct")
              << " min_distance " << res.min_distance << " threshold "
              << res.threshold << "\n";
  });

  // plot
  auto* plot = app.add_subcommand("plot", "render a curves CSV as SVG");
  std::string plot_in;
  std::string plot_out;
  plot->add_option("--in", plot_in, "curves CSV")->required();
  plot->add_option("--out", plot_out, "output SVG")->required();
  plot->callback([&]() {
    mgral::emit_curve_svg(plot_in, plot_out);
    std::cout << "wrote " << plot_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const mgral::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
