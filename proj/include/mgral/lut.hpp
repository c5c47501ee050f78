#ifndef MGRAL_LUT_HPP
#define MGRAL_LUT_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mgral/oracle.hpp"
#include "mgral/pool.hpp"
#include "mgral/rng.hpp"

namespace mgral {

struct LUTEntry {
  SelectionBatch ids;
  double performance = 0.0;
  std::uint64_t seed = 0;
};

// Pre-evaluated (batch -> performance) records for one AL cycle. The
// fingerprint pins the labeled set the table was built against; a table
// is rebuilt whenever the partition changes.
struct LookupTable {
  std::vector<LUTEntry> entries;
  int budget = 0;
  std::uint64_t fingerprint = 0;
  std::uint64_t master_seed = 0;
};

struct EstimateResult {
  double value = 0.0;
  enum class Source { kLut, kDirect } source = Source::kLut;
  double min_distance = 0.0;
  double threshold = 0.0;
};

// Evaluates M uniform random size-B unlabeled batches. Entry l draws its
// batch and oracle seed from hash(master seed, l), so the table is
// identical no matter how the evaluations are scheduled; they run on a
// small thread pool.
LookupTable build_lut(const ALCycleState& state, const PerformanceOracle& oracle,
                      int entries, int budget, std::uint64_t master_seed);

// mean(distances) - population std(distances); below this the nearest
// record is considered too far to trust.
double fallback_threshold(const std::vector<double>& distances);

// Distance-weighted estimate from the k nearest entries (weights
// 1/(d+eps)); an exact-distance-0 entry short-circuits to its recorded
// value. If even the closest entry is beyond the fallback threshold the
// oracle is consulted directly and the result is appended to the table.
EstimateResult estimate_performance(LookupTable& lut, const SelectionBatch& query,
                                    const SamplePool& pool, int k,
                                    const PerformanceOracle& oracle,
                                    double eps = 1e-8);

// Line-delimited persistence: one JSON header line (budget, entry count,
// fingerprint, master seed) then one JSON object per entry.
void save_lut(const LookupTable& lut, const std::filesystem::path& path);
LookupTable load_lut(const std::filesystem::path& path);

}  // namespace mgral

#endif  // MGRAL_LUT_HPP
