#ifndef MGRAL_POOL_HPP
#define MGRAL_POOL_HPP

#include <filesystem>
#include <set>
#include <vector>

#include "mgral/types.hpp"

namespace mgral {

// Ordered batch of sample ids picked for annotation. Ids must be distinct;
// the budget is the id count.
struct SelectionBatch {
  std::vector<int> ids;

  int budget() const { return static_cast<int>(ids.size()); }
};

SelectionBatch make_batch(std::vector<int> ids);

// The active-learning state every strategy operates on: a fixed feature
// matrix (one column per sample) plus the labeled/unlabeled partition.
// Samples are referenced by dense integer id == column index, never by
// feature equality.
class SamplePool {
 public:
  SamplePool() = default;
  // features: d x n, column i = feature vector of sample id i.
  SamplePool(Matrix features, std::set<int> labeled);

  int size() const { return static_cast<int>(features_.cols()); }
  int dim() const { return static_cast<int>(features_.rows()); }
  const Matrix& features() const { return features_; }
  Eigen::Ref<const Vector> feature(int id) const { return features_.col(id); }

  const std::set<int>& labeled() const { return labeled_; }
  bool is_labeled(int id) const { return labeled_.count(id) != 0; }
  int labeled_count() const { return static_cast<int>(labeled_.size()); }
  int unlabeled_count() const { return size() - labeled_count(); }
  std::vector<int> unlabeled_ids() const;

  // Value-semantics update used by apply_selection.
  SamplePool with_labeled(std::set<int> labeled) const;

 private:
  Matrix features_;      // d x n
  std::set<int> labeled_;
};

struct CurvePoint {
  int cycle = 0;
  int labeled = 0;
  double performance = 0.0;
};

// One AL run's evolving state: cycle counter, pool partition, and the
// performance history recorded so far.
struct ALCycleState {
  int cycle = 0;
  SamplePool pool;
  std::vector<CurvePoint> history;
};

// Per-dimension shift/scale to pool-wide mean 0 and population std 1.
// Dimensions with zero variance map to all-zeros.
SamplePool standardize_features(const SamplePool& pool);

// Marks batch ids as labeled and advances the cycle counter. Pure: the
// input state is left untouched.
ALCycleState apply_selection(const ALCycleState& state,
                             const SelectionBatch& batch);

// Pool snapshot (JSON: dim, features, labeled). Doubles are written in
// shortest round-trip form, so load(save(p)) is bit-exact.
void save_pool_snapshot(const SamplePool& pool,
                        const std::filesystem::path& path);
SamplePool load_pool_snapshot(const std::filesystem::path& path);

// Stable hash of the sorted labeled-id set; ties LUTs to the partition
// they were built against.
std::uint64_t labeled_fingerprint(const SamplePool& pool);

}  // namespace mgral

#endif  // MGRAL_POOL_HPP
