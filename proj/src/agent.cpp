#include "mgral/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace mgral {

namespace {

double sigmoid1(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// logsumexp over a subset of logits.
double logsumexp_over(const Vector& logits, const std::vector<int>& idx) {
  double m = -std::numeric_limits<double>::infinity();
  for (int p : idx) m = std::max(m, logits[p]);
  double s = 0.0;
  for (int p : idx) s += std::exp(logits[p] - m);
  return m + std::log(s);
}

void check_order(const SamplePool& pool, const std::vector<int>& order) {
  require(static_cast<int>(order.size()) == pool.unlabeled_count(),
          "visit order must cover exactly the unlabeled ids");
  std::vector<char> seen(static_cast<std::size_t>(pool.size()), 0);
  for (int id : order) {
    require(id >= 0 && id < pool.size(),
            "visit order id " + std::to_string(id) + " out of range");
    require(!pool.is_labeled(id),
            "visit order mentions labeled id " + std::to_string(id));
    require(!seen[static_cast<std::size_t>(id)],
            "visit order repeats id " + std::to_string(id));
    seen[static_cast<std::size_t>(id)] = 1;
  }
}

}  // namespace

AgentBlocks AgentBlocks::zeros_like(const AgentBlocks& other) {
  AgentBlocks z;
  z.lstm = LstmParams<double>::zeros(other.lstm.hidden(), other.lstm.input());
  z.dec = DecoderParams<double>::zeros(other.dec.hidden());
  return z;
}

void AgentBlocks::setZero() {
  lstm.setZero();
  dec.w1.setZero();
  dec.b1.setZero();
  dec.w2.setZero();
  dec.b2.setZero();
}

AgentParams init_agent(int feature_dim, Rng& rng) {
  require(feature_dim >= 1, "feature dimension must be positive");
  const int h = feature_dim + 1;
  AgentParams agent;
  agent.feature_dim = feature_dim;
  agent.w.lstm = LstmParams<double>::zeros(h, h);
  agent.w.dec = DecoderParams<double>::zeros(h);
  auto fill = [&rng](Matrix& m) {
    for (int c = 0; c < m.cols(); ++c) {
      for (int r = 0; r < m.rows(); ++r) m(r, c) = 0.08 * rng.uniform_sym();
    }
  };
  for (int g = 0; g < 4; ++g) {
    fill(agent.w.lstm.wx[g]);
    fill(agent.w.lstm.wh[g]);
  }
  agent.w.lstm.b[kForget].setOnes();
  fill(agent.w.dec.w1);
  fill(agent.w.dec.w2);
  agent.m = AgentBlocks::zeros_like(agent.w);
  agent.v = AgentBlocks::zeros_like(agent.w);
  return agent;
}

ScoredPool score_pool(const AgentParams& agent, const SamplePool& pool,
                      const std::vector<int>& order) {
  check_order(pool, order);
  require(pool.dim() == agent.feature_dim,
          "pool dimension does not match agent");
  const int k_steps = static_cast<int>(order.size());
  const int h = agent.hidden();
  const int h2 = agent.w.dec.mid();

  ScoredPool out;
  out.order = order;
  out.logits.resize(k_steps);
  ForwardCache& cc = out.cache;
  cc.x.resize(h, k_steps);  // input width == hidden width (d+1)
  cc.h = Matrix::Zero(h, k_steps + 1);
  cc.c = Matrix::Zero(h, k_steps + 1);
  cc.gi.resize(h, k_steps);
  cc.gf.resize(h, k_steps);
  cc.gg.resize(h, k_steps);
  cc.go.resize(h, k_steps);
  cc.tanh_c.resize(h, k_steps);
  cc.dec_t1.resize(h2, k_steps);
  cc.version = agent.version;

  double prev = 0.0;
  for (int k = 0; k < k_steps; ++k) {
    Vector x(h);
    x.head(agent.feature_dim) = pool.feature(order[static_cast<std::size_t>(k)]);
    x[agent.feature_dim] = prev;
    cc.x.col(k) = x;
    auto acts = lstm_step_detailed<double>(agent.w.lstm, cc.h.col(k),
                                           cc.c.col(k), x);
    cc.gi.col(k) = acts.gi;
    cc.gf.col(k) = acts.gf;
    cc.gg.col(k) = acts.gg;
    cc.go.col(k) = acts.go;
    cc.c.col(k + 1) = acts.c;
    cc.tanh_c.col(k) = acts.tanh_c;
    cc.h.col(k + 1) = acts.h;
    auto dec = decode_detailed<double>(agent.w.dec, acts.h);
    cc.dec_t1.col(k) = dec.t1;
    out.logits[k] = dec.logit;
    prev = sigmoid1(dec.logit);
  }
  return out;
}

double plackett_luce_logprob(const Vector& logits,
                             const std::vector<int>& positions) {
  std::vector<int> remaining(static_cast<std::size_t>(logits.size()));
  std::iota(remaining.begin(), remaining.end(), 0);
  double lp = 0.0;
  for (int chosen : positions) {
    auto it = std::find(remaining.begin(), remaining.end(), chosen);
    require(it != remaining.end(), "position repeated or out of range");
    lp += logits[chosen] - logsumexp_over(logits, remaining);
    remaining.erase(it);
  }
  return lp;
}

std::pair<std::vector<int>, double> sample_batch(const Vector& logits, int b,
                                                 Rng& rng) {
  require(b >= 0 && b <= logits.size(),
          "budget exceeds number of candidates");
  std::vector<int> remaining(static_cast<std::size_t>(logits.size()));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(b));
  double lp = 0.0;
  for (int j = 0; j < b; ++j) {
    const double lse = logsumexp_over(logits, remaining);
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t pick = remaining.size() - 1;  // guard against rounding
    for (std::size_t t = 0; t < remaining.size(); ++t) {
      acc += std::exp(logits[remaining[t]] - lse);
      if (u < acc) {
        pick = t;
        break;
      }
    }
    const int pos = remaining[pick];
    lp += logits[pos] - lse;
    chosen.push_back(pos);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return {std::move(chosen), lp};
}

std::vector<int> select_top_b(const Vector& logits, int b) {
  require(b >= 0 && b <= logits.size(), "budget exceeds number of candidates");
  std::vector<int> idx(static_cast<std::size_t>(logits.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) {
    if (logits[a] != logits[c]) return logits[a] > logits[c];
    return a < c;
  });
  idx.resize(static_cast<std::size_t>(b));
  return idx;
}

SelectionBatch select_top_b_ids(const std::vector<int>& ids,
                                const Vector& logits, int b) {
  require(static_cast<int>(ids.size()) == logits.size(),
          "ids/logits length mismatch");
  require(b >= 0 && b <= logits.size(), "budget exceeds number of candidates");
  std::vector<int> idx(ids.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) {
    if (logits[a] != logits[c]) return logits[a] > logits[c];
    return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(c)];
  });
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) out.push_back(ids[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]);
  return make_batch(std::move(out));
}

Trajectory sample_trajectory(const AgentParams& agent, const SamplePool& pool,
                             int b, Rng& rng) {
  require(b <= pool.unlabeled_count(), "budget exceeds unlabeled count");
  std::vector<int> order = pool.unlabeled_ids();
  // Fisher-Yates; fresh permutation per trajectory.
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const std::size_t swap_at =
        j + static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(order.size() - j)));
    std::swap(order[j], order[swap_at]);
  }
  ScoredPool scored = score_pool(agent, pool, order);
  auto [positions, lp] = sample_batch(scored.logits, b, rng);
  Trajectory traj;
  traj.order = std::move(scored.order);
  traj.logits = std::move(scored.logits);
  traj.positions = std::move(positions);
  std::vector<int> ids;
  ids.reserve(traj.positions.size());
  for (int p : traj.positions) ids.push_back(traj.order[static_cast<std::size_t>(p)]);
  traj.batch = make_batch(std::move(ids));
  traj.logprob = lp;
  traj.cache = std::move(scored.cache);
  return traj;
}

AgentBlocks backprop_policy(const AgentParams& agent, const Trajectory& traj,
                            double advantage) {
  require(traj.cache.version == agent.version,
          "stale trajectory cache: agent parameters changed since forward");
  const int k_steps = static_cast<int>(traj.order.size());
  AgentBlocks grads = AgentBlocks::zeros_like(agent.w);
  if (advantage == 0.0) return grads;

  // dL/dlogit from the Plackett-Luce term, L = -advantage * logprob.
  Vector dlogit = Vector::Zero(k_steps);
  {
    std::vector<int> remaining(static_cast<std::size_t>(k_steps));
    std::iota(remaining.begin(), remaining.end(), 0);
    for (int chosen : traj.positions) {
      const double lse = logsumexp_over(traj.logits, remaining);
      for (int p : remaining) {
        dlogit[p] += advantage * std::exp(traj.logits[p] - lse);
      }
      dlogit[chosen] -= advantage;
      remaining.erase(std::find(remaining.begin(), remaining.end(), chosen));
    }
  }

  const ForwardCache& cc = traj.cache;
  const int d = agent.feature_dim;
  Vector dh_next = Vector::Zero(agent.hidden());
  Vector dc_next = Vector::Zero(agent.hidden());
  double pending_prev = 0.0;  // gradient reaching logit[k] through x[k+1]
  for (int k = k_steps - 1; k >= 0; --k) {
    const double g_logit = dlogit[k] + pending_prev;
    Vector dh = decode_backward<double>(agent.w.dec, cc.h.col(k + 1),
                                        cc.dec_t1.col(k), g_logit, grads.dec);
    dh += dh_next;
    LstmStepActs<double> acts;
    acts.gi = cc.gi.col(k);
    acts.gf = cc.gf.col(k);
    acts.gg = cc.gg.col(k);
    acts.go = cc.go.col(k);
    acts.c = cc.c.col(k + 1);
    acts.tanh_c = cc.tanh_c.col(k);
    acts.h = cc.h.col(k + 1);
    auto g = lstm_step_backward<double>(agent.w.lstm, cc.h.col(k), cc.c.col(k),
                                        cc.x.col(k), acts, dh, dc_next, grads.lstm);
    if (k > 0) {
      // x[k]'s last slot is sigmoid(logit[k-1]).
      const double s = cc.x(d, k);
      pending_prev = g.dx[d] * s * (1.0 - s);
    } else {
      pending_prev = 0.0;
    }
    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }
  return grads;
}

double clip_global_norm(AgentBlocks& grads, double max_norm) {
  double sq = 0.0;
  for_each_block(grads, [&sq](const std::string&, const auto& blk) {
    sq += blk.squaredNorm();
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for_each_block(grads,
                   [scale](const std::string&, auto& blk) { blk *= scale; });
  }
  return norm;
}

void adam_update(AgentParams& agent, const AgentBlocks& grads,
                 const AdamOptions& opt) {
  for_each_block(grads, [](const std::string& name, const auto& blk) {
    require(blk.allFinite(), "non-finite gradient in block " + name);
  });
  agent.step += 1;
  const long t = agent.step;
  for_each_block4(agent.w, grads, agent.m, agent.v,
                  [t, &opt](auto& w, const auto& g, auto& m, auto& v) {
                    adam_step(w, g, m, v, t, opt);
                  });
  agent.version += 1;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  require(rows > 0, "empty matrix in checkpoint");
  const int cols = static_cast<int>(j.at(0).size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

nlohmann::json blocks_to_json(const AgentBlocks& blocks) {
  nlohmann::json j;
  for_each_block(blocks, [&j](const std::string& name, const auto& blk) {
    if constexpr (std::remove_cvref_t<decltype(blk)>::ColsAtCompileTime == 1) {
      j[name] = vector_to_json(blk);
    } else {
      j[name] = matrix_to_json(blk);
    }
  });
  return j;
}

void blocks_from_json(const nlohmann::json& j, AgentBlocks& blocks) {
  for_each_block(blocks, [&j](const std::string& name, auto& blk) {
    if constexpr (std::remove_cvref_t<decltype(blk)>::ColsAtCompileTime == 1) {
      blk = vector_from_json(j.at(name));
    } else {
      blk = matrix_from_json(j.at(name));
    }
  });
}

}  // namespace

void save_agent_checkpoint(const AgentParams& agent, const Rng& rng,
                           const std::filesystem::path& path) {
  nlohmann::json j;
  j["feature_dim"] = agent.feature_dim;
  j["step"] = agent.step;
  j["version"] = agent.version;
  j["weights"] = blocks_to_json(agent.w);
  j["adam_m"] = blocks_to_json(agent.m);
  j["adam_v"] = blocks_to_json(agent.v);
  j["rng"] = {{"seed", rng.seed()}, {"pos", rng.pos()}};
  std::ofstream out(path);
  require(out.good(), "cannot write checkpoint: " + path.string());
  out << j.dump(2) << "\n";
}

std::pair<AgentParams, Rng> load_agent_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read checkpoint: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  AgentParams agent;
  agent.feature_dim = j.at("feature_dim").get<int>();
  const int h = agent.hidden();
  agent.w.lstm = LstmParams<double>::zeros(h, h);
  agent.w.dec = DecoderParams<double>::zeros(h);
  agent.m = AgentBlocks::zeros_like(agent.w);
  agent.v = AgentBlocks::zeros_like(agent.w);
  blocks_from_json(j.at("weights"), agent.w);
  blocks_from_json(j.at("adam_m"), agent.m);
  blocks_from_json(j.at("adam_v"), agent.v);
  agent.step = j.at("step").get<long>();
  agent.version = j.at("version").get<std::uint64_t>();
  Rng rng(j.at("rng").at("seed").get<std::uint64_t>(),
          j.at("rng").at("pos").get<std::uint64_t>());
  return {std::move(agent), rng};
}

}  // namespace mgral
