#ifndef MGRAL_WORLDS_HPP
#define MGRAL_WORLDS_HPP

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "mgral/oracle.hpp"
#include "mgral/pool.hpp"

namespace mgral {

// Synthetic classification task with planted cluster structure. Hidden
// labels are only ever read by the oracle, never by a strategy.
struct ClusterWorld {
  SamplePool pool;
  std::vector<int> hidden_labels;  // pool sample id -> cluster id
  Matrix test_features;            // d x n_test
  std::vector<int> test_labels;
  Matrix centroids;  // d x C
  int num_clusters = 0;
};

// Synthetic covering task: performance = fraction of the pool within
// radius r of an annotated sample.
struct CoverageWorld {
  SamplePool pool;
  double radius = 0.0;
};

// Centroids uniform in [-1,1]^d with pairwise separation >= 4*sigma
// (rejection-resampled); pool and test points are centroid + N(0, sigma^2 I),
// per_cluster of each per cluster.
ClusterWorld generate_cluster_pool(int num_clusters, int per_cluster, int dim,
                                   double sigma, std::uint64_t seed);

// Points uniform in [-1,1]^d.
CoverageWorld generate_coverage_pool(int count, int dim, double radius,
                                     std::uint64_t seed);

// Nearest-centroid accuracy on the held-out test set after annotating
// labeled + hypothetical. Classes with no annotated sample never win;
// no annotated samples at all scores chance (1/C).
double cluster_oracle(const ClusterWorld& world, const std::set<int>& labeled,
                      const SelectionBatch& hypothetical);

// Fraction of pool points within radius of an annotated point.
double coverage_oracle(const CoverageWorld& world, const std::set<int>& labeled,
                       const SelectionBatch& hypothetical);

// Probe model for the entropy baseline: softmax over negative distances
// to the per-class centroids of the labeled samples. Classes absent from
// the labeled set are excluded. Returns one probability per present
// class, ordered by class id (paired with `present_classes`).
struct PredictiveDistribution {
  std::vector<int> classes;
  Vector probabilities;
};
PredictiveDistribution predictive_distribution(const ClusterWorld& world,
                                               const std::set<int>& labeled,
                                               int sample_id);

// PerformanceOracle adapters. They read only the labeled set and batch
// ids from the passed pool (features may be a standardized view); the
// world's own features are what the task model consumes. The seed is
// accepted and ignored: these backends are purposely noise-free.
class ClusterOracle final : public PerformanceOracle {
 public:
  explicit ClusterOracle(const ClusterWorld& world) : world_(&world) {}
  double evaluate(const SamplePool& pool, const SelectionBatch& hypothetical,
                  std::uint64_t seed) const override;

 private:
  const ClusterWorld* world_;
};

class CoverageOracle final : public PerformanceOracle {
 public:
  explicit CoverageOracle(const CoverageWorld& world) : world_(&world) {}
  double evaluate(const SamplePool& pool, const SelectionBatch& hypothetical,
                  std::uint64_t seed) const override;

 private:
  const CoverageWorld* world_;
};

}  // namespace mgral

#endif  // MGRAL_WORLDS_HPP
