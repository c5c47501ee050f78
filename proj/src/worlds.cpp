#include "mgral/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mgral/rng.hpp"

namespace mgral {

double NoisyOracle::evaluate(const SamplePool& pool,
                             const SelectionBatch& hypothetical,
                             std::uint64_t seed) const {
  const double base = base_->evaluate(pool, hypothetical, seed);
  Rng rng(derive_seed(seed, "reward-noise"));
  return std::clamp(base + sigma_ * rng.normal(), 0.0, 1.0);
}

ClusterWorld generate_cluster_pool(int num_clusters, int per_cluster, int dim,
                                   double sigma, std::uint64_t seed) {
  require(num_clusters >= 2, "need at least 2 clusters");
  require(per_cluster >= 1, "per-cluster count must be positive");
  require(dim >= 1, "dimension must be positive");
  require(sigma > 0.0, "sigma must be positive");
  Rng rng(seed);

  Matrix centroids(dim, num_clusters);
  const double min_sep = 4.0 * sigma;
  for (int c = 0; c < num_clusters; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      Vector cand(dim);
      for (int r = 0; r < dim; ++r) cand[r] = rng.uniform_sym();
      placed = true;
      for (int prev = 0; prev < c; ++prev) {
        if ((cand - centroids.col(prev)).norm() < min_sep) {
          placed = false;
          break;
        }
      }
      if (placed) centroids.col(c) = cand;
    }
    if (!placed) {
      throw std::runtime_error(
          "could not separate cluster centroids by 4*sigma in 1000 attempts; "
          "use fewer clusters or a smaller sigma");
    }
  }

  const int n = num_clusters * per_cluster;
  ClusterWorld world;
  Matrix pool_feats(dim, n);
  world.hidden_labels.resize(static_cast<std::size_t>(n));
  world.test_features.resize(dim, n);
  world.test_labels.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < num_clusters; ++c) {
    for (int k = 0; k < per_cluster; ++k) {
      const int i = c * per_cluster + k;
      for (int r = 0; r < dim; ++r) {
        pool_feats(r, i) = centroids(r, c) + sigma * rng.normal();
      }
      world.hidden_labels[static_cast<std::size_t>(i)] = c;
    }
  }
  for (int c = 0; c < num_clusters; ++c) {
    for (int k = 0; k < per_cluster; ++k) {
      const int i = c * per_cluster + k;
      for (int r = 0; r < dim; ++r) {
        world.test_features(r, i) = centroids(r, c) + sigma * rng.normal();
      }
      world.test_labels[static_cast<std::size_t>(i)] = c;
    }
  }
  world.pool = SamplePool(std::move(pool_feats), {});
  world.centroids = std::move(centroids);
  world.num_clusters = num_clusters;
  return world;
}

CoverageWorld generate_coverage_pool(int count, int dim, double radius,
                                     std::uint64_t seed) {
  require(count >= 1, "pool count must be positive");
  require(dim >= 1, "dimension must be positive");
  require(radius > 0.0 && std::isfinite(radius), "radius must be finite positive");
  Rng rng(seed);
  Matrix feats(dim, count);
  for (int i = 0; i < count; ++i) {
    for (int r = 0; r < dim; ++r) feats(r, i) = rng.uniform_sym();
  }
  CoverageWorld world;
  world.pool = SamplePool(std::move(feats), {});
  world.radius = radius;
  return world;
}

namespace {

// Per-class means of the annotated features; returns (class ids, d x k means).
std::pair<std::vector<int>, Matrix> annotated_centroids(
    const ClusterWorld& world, const std::set<int>& labeled,
    const SelectionBatch& hypothetical) {
  std::map<int, std::pair<Vector, int>> sums;
  auto add = [&](int id) {
    require(id >= 0 && id < world.pool.size(), "sample id out of range");
    const int cls = world.hidden_labels[static_cast<std::size_t>(id)];
    auto it = sums.find(cls);
    if (it == sums.end()) {
      sums.emplace(cls, std::make_pair(Vector(world.pool.feature(id)), 1));
    } else {
      it->second.first += world.pool.feature(id);
      it->second.second += 1;
    }
  };
  for (int id : labeled) add(id);
  for (int id : hypothetical.ids) {
    require(!labeled.count(id), "hypothetical batch overlaps labeled set");
    add(id);
  }
  std::vector<int> classes;
  Matrix means(world.pool.dim(), static_cast<int>(sums.size()));
  int col = 0;
  for (auto& [cls, acc] : sums) {
    classes.push_back(cls);
    means.col(col++) = acc.first / static_cast<double>(acc.second);
  }
  return {std::move(classes), std::move(means)};
}

}  // namespace

double cluster_oracle(const ClusterWorld& world, const std::set<int>& labeled,
                      const SelectionBatch& hypothetical) {
  if (labeled.empty() && hypothetical.ids.empty()) {
    return 1.0 / static_cast<double>(world.num_clusters);
  }
  auto [classes, means] = annotated_centroids(world, labeled, hypothetical);
  int correct = 0;
  const int n_test = static_cast<int>(world.test_features.cols());
  for (int i = 0; i < n_test; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_cls = classes.front();
    for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
      const double dist = (world.test_features.col(i) - means.col(c)).norm();
      if (dist < best) {  // ties keep the smaller class id (map order)
        best = dist;
        best_cls = classes[static_cast<std::size_t>(c)];
      }
    }
    if (best_cls == world.test_labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

double coverage_oracle(const CoverageWorld& world, const std::set<int>& labeled,
                       const SelectionBatch& hypothetical) {
  std::vector<int> annotated(labeled.begin(), labeled.end());
  for (int id : hypothetical.ids) {
    require(!labeled.count(id), "hypothetical batch overlaps labeled set");
    annotated.push_back(id);
  }
  if (annotated.empty()) return 0.0;
  const int n = world.pool.size();
  int covered = 0;
  for (int i = 0; i < n; ++i) {
    for (int a : annotated) {
      if ((world.pool.feature(i) - world.pool.feature(a)).norm() <=
          world.radius) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(n);
}

PredictiveDistribution predictive_distribution(const ClusterWorld& world,
                                               const std::set<int>& labeled,
                                               int sample_id) {
  require(!labeled.empty(), "predictive_distribution needs labeled samples");
  require(sample_id >= 0 && sample_id < world.pool.size(),
          "sample id out of range");
  auto [classes, means] = annotated_centroids(world, labeled, {});
  Vector neg_dist(static_cast<int>(classes.size()));
  for (int c = 0; c < neg_dist.size(); ++c) {
    neg_dist[c] = -(world.pool.feature(sample_id) - means.col(c)).norm();
  }
  const double m = neg_dist.maxCoeff();
  Vector ex = (neg_dist.array() - m).exp();
  PredictiveDistribution out;
  out.classes = std::move(classes);
  out.probabilities = ex / ex.sum();
  return out;
}

double ClusterOracle::evaluate(const SamplePool& pool,
                               const SelectionBatch& hypothetical,
                               std::uint64_t /*seed*/) const {
  return cluster_oracle(*world_, pool.labeled(), hypothetical);
}

double CoverageOracle::evaluate(const SamplePool& pool,
                                const SelectionBatch& hypothetical,
                                std::uint64_t /*seed*/) const {
  return coverage_oracle(*world_, pool.labeled(), hypothetical);
}

}  // namespace mgral
