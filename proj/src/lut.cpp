#include "mgral/lut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "mgral/wasserstein.hpp"

namespace mgral {

namespace {

Matrix gather_features(const SamplePool& pool, const std::vector<int>& ids) {
  Matrix out(pool.dim(), static_cast<int>(ids.size()));
  for (int i = 0; i < out.cols(); ++i) {
    out.col(i) = pool.feature(ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<int> random_subset(const std::vector<int>& candidates, int b,
                               Rng& rng) {
  std::vector<int> deck = candidates;
  for (int j = 0; j < b; ++j) {
    const int swap_at =
        j + rng.uniform_int(static_cast<int>(deck.size()) - j);
    std::swap(deck[static_cast<std::size_t>(j)],
              deck[static_cast<std::size_t>(swap_at)]);
  }
  deck.resize(static_cast<std::size_t>(b));
  return deck;
}

}  // namespace

LookupTable build_lut(const ALCycleState& state, const PerformanceOracle& oracle,
                      int entries, int budget, std::uint64_t master_seed) {
  require(entries >= 2,
          "need at least 2 lookup entries for threshold statistics");
  require(budget >= 1, "budget must be positive");
  require(budget <= state.pool.unlabeled_count(),
          "budget exceeds unlabeled count");
  const std::vector<int> unlabeled = state.pool.unlabeled_ids();

  LookupTable lut;
  lut.budget = budget;
  lut.fingerprint = labeled_fingerprint(state.pool);
  lut.master_seed = master_seed;
  lut.entries.resize(static_cast<std::size_t>(entries));

  // Index-derived seeds keep the table independent of scheduling.
  auto build_entry = [&](int l) {
    const std::uint64_t entry_seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(l));
    Rng rng(entry_seed);
    LUTEntry e;
    e.ids = make_batch(random_subset(unlabeled, budget, rng));
    e.seed = entry_seed;
    e.performance = oracle.evaluate(state.pool, e.ids, entry_seed);
    lut.entries[static_cast<std::size_t>(l)] = std::move(e);
  };

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers =
      std::max(1, std::min<int>(static_cast<int>(hw ? hw : 1), entries));
  if (workers == 1) {
    for (int l = 0; l < entries; ++l) build_entry(l);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&, w]() {
        for (int l = w; l < entries; l += workers) build_entry(l);
      }));
    }
    for (auto& f : futs) f.get();
  }
  return lut;
}

double fallback_threshold(const std::vector<double>& distances) {
  require(distances.size() >= 2,
          "fallback threshold needs at least 2 distances");
  double mean = 0.0;
  for (double d : distances) mean += d;
  mean /= static_cast<double>(distances.size());
  double var = 0.0;
  for (double d : distances) var += (d - mean) * (d - mean);
  var /= static_cast<double>(distances.size());
  return mean - std::sqrt(var);
}

EstimateResult estimate_performance(LookupTable& lut, const SelectionBatch& query,
                                    const SamplePool& pool, int k,
                                    const PerformanceOracle& oracle,
                                    double eps) {
  require(query.budget() == lut.budget, "query size differs from table budget");
  require(labeled_fingerprint(pool) == lut.fingerprint,
          "stale lookup table: labeled set changed since build");
  require(k >= 1, "need at least one neighbor");

  const Matrix query_feats = gather_features(pool, query.ids);
  std::vector<double> dist(lut.entries.size());
  for (std::size_t l = 0; l < lut.entries.size(); ++l) {
    dist[l] = batch_wasserstein<double>(
        query_feats, gather_features(pool, lut.entries[l].ids.ids));
  }
  const double threshold = fallback_threshold(dist);
  const std::size_t min_at = static_cast<std::size_t>(
      std::min_element(dist.begin(), dist.end()) - dist.begin());

  EstimateResult res;
  res.min_distance = dist[min_at];
  res.threshold = threshold;

  // An exact hit overrides everything else.
  for (std::size_t l = 0; l < dist.size(); ++l) {
    if (dist[l] == 0.0) {
      res.value = lut.entries[l].performance;
      res.source = EstimateResult::Source::kLut;
      return res;
    }
  }

  if (dist[min_at] > threshold) {
    const std::uint64_t entry_seed = derive_seed(
        lut.master_seed, static_cast<std::uint64_t>(lut.entries.size()));
    res.value = oracle.evaluate(pool, query, entry_seed);
    res.source = EstimateResult::Source::kDirect;
    lut.entries.push_back(LUTEntry{query, res.value, entry_seed});
    return res;
  }

  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(use),
                    order.end(), [&dist](std::size_t a, std::size_t b) {
                      if (dist[a] != dist[b]) return dist[a] < dist[b];
                      return a < b;
                    });
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < use; ++j) {
    const double w = 1.0 / (dist[order[j]] + eps);
    num += w * lut.entries[order[j]].performance;
    den += w;
  }
  res.value = num / den;
  res.source = EstimateResult::Source::kLut;
  return res;
}

void save_lut(const LookupTable& lut, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write lookup table: " + path.string());
  nlohmann::json header;
  header["budget"] = lut.budget;
  header["entries"] = lut.entries.size();
  header["fingerprint"] = lut.fingerprint;
  header["master_seed"] = lut.master_seed;
  out << header.dump() << "\n";
  for (const auto& e : lut.entries) {
    nlohmann::json line;
    line["ids"] = e.ids.ids;
    line["performance"] = e.performance;
    line["seed"] = e.seed;
    out << line.dump() << "\n";
  }
}

LookupTable load_lut(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read lookup table: " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty lookup table file");
  nlohmann::json header = nlohmann::json::parse(line);
  LookupTable lut;
  lut.budget = header.at("budget").get<int>();
  lut.fingerprint = header.at("fingerprint").get<std::uint64_t>();
  lut.master_seed = header.at("master_seed").get<std::uint64_t>();
  const auto count = header.at("entries").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    LUTEntry e;
    e.ids = make_batch(j.at("ids").get<std::vector<int>>());
    e.performance = j.at("performance").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    lut.entries.push_back(std::move(e));
  }
  require(lut.entries.size() == count, "lookup table entry count mismatch");
  return lut;
}

}  // namespace mgral
