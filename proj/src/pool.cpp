#include "mgral/pool.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "mgral/rng.hpp"

namespace mgral {

SelectionBatch make_batch(std::vector<int> ids) {
  std::unordered_set<int> seen;
  for (int id : ids) {
    require(seen.insert(id).second,
            "duplicate id " + std::to_string(id) + " in selection batch");
  }
  return SelectionBatch{std::move(ids)};
}

SamplePool::SamplePool(Matrix features, std::set<int> labeled)
    : features_(std::move(features)), labeled_(std::move(labeled)) {
  require(features_.cols() >= 1, "empty pool");
  require(features_.allFinite(), "pool features must be finite");
  if (!labeled_.empty()) {
    require(*labeled_.begin() >= 0 && *labeled_.rbegin() < size(),
            "labeled id out of range");
  }
}

std::vector<int> SamplePool::unlabeled_ids() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(unlabeled_count()));
  for (int i = 0; i < size(); ++i) {
    if (!labeled_.count(i)) out.push_back(i);
  }
  return out;
}

SamplePool SamplePool::with_labeled(std::set<int> labeled) const {
  return SamplePool(features_, std::move(labeled));
}

SamplePool standardize_features(const SamplePool& pool) {
  const Matrix& f = pool.features();
  require(f.cols() >= 1, "empty pool");
  const double n = static_cast<double>(f.cols());
  Vector mean = f.rowwise().mean();
  Matrix centered = f.colwise() - mean;
  Vector var = centered.array().square().rowwise().sum() / n;
  Matrix out(f.rows(), f.cols());
  for (int r = 0; r < f.rows(); ++r) {
    if (var[r] > 0.0) {
      out.row(r) = centered.row(r) / std::sqrt(var[r]);
    } else {
      out.row(r).setZero();
    }
  }
  return SamplePool(std::move(out), pool.labeled());
}

ALCycleState apply_selection(const ALCycleState& state,
                             const SelectionBatch& batch) {
  std::set<int> labeled = state.pool.labeled();
  for (int id : batch.ids) {
    require(id >= 0 && id < state.pool.size(),
            "sample id " + std::to_string(id) + " out of range");
    require(labeled.insert(id).second,
            "sample id " + std::to_string(id) + " is already labeled");
  }
  ALCycleState next;
  next.cycle = state.cycle + 1;
  next.pool = state.pool.with_labeled(std::move(labeled));
  next.history = state.history;
  return next;
}

void save_pool_snapshot(const SamplePool& pool,
                        const std::filesystem::path& path) {
  nlohmann::json j;
  j["dim"] = pool.dim();
  auto& feats = j["features"] = nlohmann::json::array();
  for (int i = 0; i < pool.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int r = 0; r < pool.dim(); ++r) row.push_back(pool.features()(r, i));
    feats.push_back(std::move(row));
  }
  j["labeled"] = std::vector<int>(pool.labeled().begin(), pool.labeled().end());
  std::ofstream out(path);
  require(out.good(), "cannot write pool snapshot: " + path.string());
  out << j.dump(2) << "\n";
}

SamplePool load_pool_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read pool snapshot: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  const int d = j.at("dim").get<int>();
  const auto& feats = j.at("features");
  require(!feats.empty(), "empty pool");
  Matrix f(d, static_cast<int>(feats.size()));
  for (int i = 0; i < f.cols(); ++i) {
    const auto& row = feats.at(static_cast<std::size_t>(i));
    require(static_cast<int>(row.size()) == d,
            "feature dimension mismatch in snapshot");
    for (int r = 0; r < d; ++r) {
      f(r, i) = row.at(static_cast<std::size_t>(r)).get<double>();
    }
  }
  auto labeled_vec = j.at("labeled").get<std::vector<int>>();
  return SamplePool(std::move(f),
                    std::set<int>(labeled_vec.begin(), labeled_vec.end()));
}

std::uint64_t labeled_fingerprint(const SamplePool& pool) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (int id : pool.labeled()) {
    h = hash_combine(h, static_cast<std::uint64_t>(id));
  }
  return h;
}

}  // namespace mgral
