#include "mgral/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mgral {

StrategyKind parse_strategy(const std::string& name) {
  if (name == "random") return StrategyKind::kRandom;
  if (name == "entropy") return StrategyKind::kEntropy;
  if (name == "coreset") return StrategyKind::kCoreset;
  if (name == "mgral") return StrategyKind::kMgral;
  throw ConfigError("unknown strategy: " + name +
                    " (expected random, entropy, coreset or mgral)");
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kEntropy: return "entropy";
    case StrategyKind::kCoreset: return "coreset";
    case StrategyKind::kMgral: return "mgral";
  }
  throw std::invalid_argument("unknown strategy kind");
}

SelectionBatch random_select(const ALCycleState& state, int b, Rng& rng) {
  require(b >= 0 && b <= state.pool.unlabeled_count(),
          "budget exceeds unlabeled count");
  std::vector<int> deck = state.pool.unlabeled_ids();
  for (int j = 0; j < b; ++j) {
    const int swap_at =
        j + rng.uniform_int(static_cast<int>(deck.size()) - j);
    std::swap(deck[static_cast<std::size_t>(j)],
              deck[static_cast<std::size_t>(swap_at)]);
  }
  deck.resize(static_cast<std::size_t>(b));
  return make_batch(std::move(deck));
}

SelectionBatch entropy_select(const ALCycleState& state, int b,
                              const ProbeModel& probe) {
  require(b >= 0 && b <= state.pool.unlabeled_count(),
          "budget exceeds unlabeled count");
  const std::vector<int> ids = state.pool.unlabeled_ids();
  std::vector<double> entropy(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const Vector p = probe(ids[j]);
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    }
    entropy[j] = h;
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (entropy[a] != entropy[c]) return entropy[a] > entropy[c];
    return ids[a] < ids[c];
  });
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) out.push_back(ids[order[static_cast<std::size_t>(j)]]);
  return make_batch(std::move(out));
}

SelectionBatch kcenter_greedy(const ALCycleState& state, int b) {
  const SamplePool& pool = state.pool;
  require(b >= 0 && b <= pool.unlabeled_count(),
          "budget exceeds unlabeled count");
  std::vector<int> candidates = pool.unlabeled_ids();
  std::vector<double> min_dist(candidates.size(),
                               std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t best) {
    const int chosen = candidates[best];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
    min_dist.erase(min_dist.begin() + static_cast<std::ptrdiff_t>(best));
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      min_dist[j] = std::min(
          min_dist[j], (pool.feature(candidates[j]) - pool.feature(chosen)).norm());
    }
    return chosen;
  };
  auto argmax = [&](const std::vector<double>& score) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < candidates.size(); ++j) {
      if (score[j] > score[best] ||
          (score[j] == score[best] && candidates[j] < candidates[best])) {
        best = j;
      }
    }
    return best;
  };

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(b));
  int pick = 0;
  if (pool.labeled().empty()) {
    if (b > 0) {
      // No covered set yet: seed with the sample farthest from the pool
      // centroid, then continue farthest-first from there.
      const Vector centroid = pool.features().rowwise().mean();
      std::vector<double> centroid_dist(candidates.size());
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        centroid_dist[j] = (pool.feature(candidates[j]) - centroid).norm();
      }
      out.push_back(take(argmax(centroid_dist)));
      pick = 1;
    }
  } else {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      for (int lid : pool.labeled()) {
        min_dist[j] = std::min(
            min_dist[j], (pool.feature(candidates[j]) - pool.feature(lid)).norm());
      }
    }
  }
  for (; pick < b; ++pick) {
    out.push_back(take(argmax(min_dist)));
  }
  return make_batch(std::move(out));
}

}  // namespace mgral
