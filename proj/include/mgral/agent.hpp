#ifndef MGRAL_AGENT_HPP
#define MGRAL_AGENT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mgral/adam.hpp"
#include "mgral/decoder.hpp"
#include "mgral/lstm.hpp"
#include "mgral/pool.hpp"
#include "mgral/rng.hpp"

namespace mgral {

// LSTM cell + decoder head, treated as one flat parameter set by the
// optimizer and the gradient checks.
struct AgentBlocks {
  LstmParams<double> lstm;
  DecoderParams<double> dec;

  static AgentBlocks zeros_like(const AgentBlocks& other);
  void setZero();
};

// Applies f(name, block) to every parameter block, in a fixed order.
template <class F>
void for_each_block(AgentBlocks& a, F&& f) {
  static const char* kGateNames[4] = {"input", "forget", "cell", "output"};
  for (int g = 0; g < 4; ++g) {
    f(std::string("lstm.wx.") + kGateNames[g], a.lstm.wx[g]);
    f(std::string("lstm.wh.") + kGateNames[g], a.lstm.wh[g]);
    f(std::string("lstm.b.") + kGateNames[g], a.lstm.b[g]);
  }
  f(std::string("decoder.w1"), a.dec.w1);
  f(std::string("decoder.b1"), a.dec.b1);
  f(std::string("decoder.w2"), a.dec.w2);
  f(std::string("decoder.b2"), a.dec.b2);
}

template <class F>
void for_each_block(const AgentBlocks& a, F&& f) {
  for_each_block(const_cast<AgentBlocks&>(a),
                 [&f](const std::string& name, const auto& blk) { f(name, blk); });
}

// Lock-step visit of four same-shaped block sets (params, grads, m, v).
template <class F>
void for_each_block4(AgentBlocks& a, const AgentBlocks& b, AgentBlocks& c,
                     AgentBlocks& d, F&& f) {
  for (int g = 0; g < 4; ++g) {
    f(a.lstm.wx[g], b.lstm.wx[g], c.lstm.wx[g], d.lstm.wx[g]);
    f(a.lstm.wh[g], b.lstm.wh[g], c.lstm.wh[g], d.lstm.wh[g]);
    f(a.lstm.b[g], b.lstm.b[g], c.lstm.b[g], d.lstm.b[g]);
  }
  f(a.dec.w1, b.dec.w1, c.dec.w1, d.dec.w1);
  f(a.dec.b1, b.dec.b1, c.dec.b1, d.dec.b1);
  f(a.dec.w2, b.dec.w2, c.dec.w2, d.dec.w2);
  f(a.dec.b2, b.dec.b2, c.dec.b2, d.dec.b2);
}

// Trainable policy: weights plus Adam state. `version` increments on every
// parameter change and is what invalidates stale forward caches.
struct AgentParams {
  AgentBlocks w;
  AgentBlocks m, v;  // Adam first/second moments
  long step = 0;
  std::uint64_t version = 0;
  int feature_dim = 0;

  int hidden() const { return feature_dim + 1; }
};

// Fresh agent for feature dimension d: hidden width d+1, weights uniform
// in [-0.08, 0.08], biases 0 except forget-gate bias 1.
AgentParams init_agent(int feature_dim, Rng& rng);

// Everything the backward pass needs from one scoring sweep. Column k of
// each matrix belongs to step k; h/c carry the initial zero state in
// column 0.
struct ForwardCache {
  Matrix x;       // (d+1) x K
  Matrix h, c;    // H x (K+1)
  Matrix gi, gf, gg, go, tanh_c;  // H x K
  Matrix dec_t1;  // H2 x K
  std::uint64_t version = 0;
};

// Scores of one full pass over the unlabeled pool in a given visit order.
struct ScoredPool {
  std::vector<int> order;  // visited unlabeled ids
  Vector logits;           // logits[k] belongs to order[k]
  ForwardCache cache;
};

// Sequential scoring: step k consumes concat(feature(order[k]), prev)
// where prev = sigmoid(previous logit), 0 at k = 0.
ScoredPool score_pool(const AgentParams& agent, const SamplePool& pool,
                      const std::vector<int>& order);

// Plackett-Luce log-probability of drawing `positions` (in that order,
// without replacement) from softmax(logits).
double plackett_luce_logprob(const Vector& logits,
                             const std::vector<int>& positions);

// Sequential softmax sampling without replacement. Returns the drawn
// positions and their joint log-probability.
std::pair<std::vector<int>, double> sample_batch(const Vector& logits, int b,
                                                 Rng& rng);

// Positions of the b largest logits, ties to the smaller position.
std::vector<int> select_top_b(const Vector& logits, int b);

// Id-level deterministic selection used at inference; ties to the
// smaller sample id.
SelectionBatch select_top_b_ids(const std::vector<int>& ids,
                                const Vector& logits, int b);

// One sampled trajectory: the unit the policy gradient is computed from.
struct Trajectory {
  std::vector<int> order;
  Vector logits;
  std::vector<int> positions;  // chosen positions into `order`
  SelectionBatch batch;        // order[positions]
  double logprob = 0.0;
  ForwardCache cache;
};

Trajectory sample_trajectory(const AgentParams& agent, const SamplePool& pool,
                             int b, Rng& rng);

// Gradients of L = -advantage * logprob through the Plackett-Luce term,
// the decoder, the LSTM chain, and the prev-score feedback path.
AgentBlocks backprop_policy(const AgentParams& agent, const Trajectory& traj,
                            double advantage);

// Global L2-norm clip across all blocks; returns the pre-clip norm.
double clip_global_norm(AgentBlocks& grads, double max_norm);

// Adam over every block; throws naming the offending block on non-finite
// gradients. Bumps step and version.
void adam_update(AgentParams& agent, const AgentBlocks& grads,
                 const AdamOptions& opt);

// Checkpoint: weights, Adam moments, counters, RNG position. Bit-exact
// round-trip.
void save_agent_checkpoint(const AgentParams& agent, const Rng& rng,
                           const std::filesystem::path& path);
std::pair<AgentParams, Rng> load_agent_checkpoint(
    const std::filesystem::path& path);

}  // namespace mgral

#endif  // MGRAL_AGENT_HPP
