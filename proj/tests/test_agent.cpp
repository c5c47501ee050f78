#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <vector>

#include "mgral/agent.hpp"

using namespace mgral;

namespace {

void fill_uniform(Rng& rng, double scale, Matrix& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.uniform_sym();
  }
}

void fill_uniform(Rng& rng, double scale, Vector& v) {
  for (int r = 0; r < v.size(); ++r) v[r] = scale * rng.uniform_sym();
}

LstmParams<double> random_lstm(int h, int in, Rng& rng, double scale = 0.6) {
  auto p = LstmParams<double>::zeros(h, in);
  for (int g = 0; g < 4; ++g) {
    fill_uniform(rng, scale, p.wx[g]);
    fill_uniform(rng, scale, p.wh[g]);
    fill_uniform(rng, scale, p.b[g]);
  }
  return p;
}

DecoderParams<double> random_decoder(int h, Rng& rng, double scale = 0.6) {
  auto p = DecoderParams<double>::zeros(h);
  fill_uniform(rng, scale, p.w1);
  fill_uniform(rng, scale, p.b1);
  fill_uniform(rng, scale, p.w2);
  fill_uniform(rng, scale, p.b2);
  return p;
}

SamplePool random_pool(int n, int d, Rng& rng) {
  Matrix f(d, n);
  fill_uniform(rng, 1.0, f);
  return SamplePool(std::move(f), {});
}

double scalar_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Plain-loop re-evaluation of the gate equations, kept deliberately
// independent of the Eigen formulation.
void scalar_lstm_step(const LstmParams<double>& p, const Vector& h,
                      const Vector& c, const Vector& x, Vector& h_out,
                      Vector& c_out) {
  const int hd = p.hidden();
  h_out.resize(hd);
  c_out.resize(hd);
  for (int r = 0; r < hd; ++r) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      double acc = p.b[g][r];
      for (int j = 0; j < p.input(); ++j) acc += p.wx[g](r, j) * x[j];
      for (int j = 0; j < hd; ++j) acc += p.wh[g](r, j) * h[j];
      z[g] = acc;
    }
    const double gi = scalar_sigmoid(z[kInput]);
    const double gf = scalar_sigmoid(z[kForget]);
    const double gg = std::tanh(z[kCell]);
    const double go = scalar_sigmoid(z[kOutput]);
    c_out[r] = gf * c[r] + gi * gg;
    h_out[r] = go * std::tanh(c_out[r]);
  }
}

double scalar_decode(const DecoderParams<double>& p, const Vector& h) {
  double logit = p.b2(0);
  for (int r = 0; r < p.mid(); ++r) {
    double acc = p.b1[r];
    for (int j = 0; j < p.hidden(); ++j) acc += p.w1(r, j) * h[j];
    logit += p.w2(0, r) * std::tanh(acc);
  }
  return logit;
}

struct BlockRef {
  std::string name;
  double* data;
  long size;
};

std::vector<BlockRef> block_refs(AgentBlocks& b) {
  std::vector<BlockRef> out;
  for_each_block(b, [&out](const std::string& name, auto& blk) {
    out.push_back({name, blk.data(), static_cast<long>(blk.size())});
  });
  return out;
}

}  // namespace

TEST_CASE("lstm_step with all-zero parameters yields zero state") {
  auto p = LstmParams<double>::zeros(2, 3);
  Vector h = Vector::Zero(2), c = Vector::Zero(2), x(3);
  x << 0.7, -2.0, 5.0;
  auto [h2, c2] = lstm_step<double>(p, h, c, x);
  CHECK(h2.isZero(0.0));
  CHECK(c2.isZero(0.0));
}

TEST_CASE("saturated forget gate carries the cell state through") {
  auto p = LstmParams<double>::zeros(2, 2);
  p.b[kForget].setConstant(50.0);
  Vector h = Vector::Zero(2);
  Vector c(2);
  c << 1.0, -1.0;
  Vector x = Vector::Zero(2);
  auto [h2, c2] = lstm_step<double>(p, h, c, x);
  CHECK(c2[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c2[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("lstm_step matches element-wise scalar re-evaluation") {
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_lstm(3, 3, rng);
    Vector h(3), c(3), x(3);
    fill_uniform(rng, 1.0, h);
    fill_uniform(rng, 1.0, c);
    fill_uniform(rng, 1.0, x);
    auto [h2, c2] = lstm_step<double>(p, h, c, x);
    Vector h_ref, c_ref;
    scalar_lstm_step(p, h, c, x, h_ref, c_ref);
    CHECK((h2 - h_ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c2 - c_ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lstm_step rejects non-finite input") {
  auto p = LstmParams<double>::zeros(2, 2);
  Vector h = Vector::Zero(2), c = Vector::Zero(2), x(2);
  x << std::nan(""), 0.0;
  CHECK_THROWS(lstm_step<double>(p, h, c, x));
}

TEST_CASE("decode_score with zero weights returns the output bias") {
  auto p = DecoderParams<double>::zeros(4);
  p.b2(0) = 0.3;
  Vector h(4);
  h << 1.0, -2.0, 0.5, 9.0;
  CHECK(decode_score<double>(p, h) == 0.3);
}

TEST_CASE("decode_score at h = 0 reduces to the bias path") {
  Rng rng(7);
  auto p = random_decoder(5, rng);
  const Vector h = Vector::Zero(5);
  const double expect = (p.w2 * p.b1.array().tanh().matrix())(0) + p.b2(0);
  CHECK(decode_score<double>(p, h) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("decode_score matches scalar re-evaluation") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_decoder(6, rng);
    Vector h(6);
    fill_uniform(rng, 1.5, h);
    CHECK(decode_score<double>(p, h) ==
          doctest::Approx(scalar_decode(p, h)).epsilon(1e-12));
  }
}

TEST_CASE("init_agent follows the initialization conventions") {
  Rng rng(3);
  AgentParams agent = init_agent(4, rng);
  CHECK(agent.hidden() == 5);
  CHECK(agent.w.lstm.b[kForget] == Vector::Ones(5));
  CHECK(agent.w.lstm.b[kInput].isZero(0.0));
  CHECK(agent.w.dec.b1.isZero(0.0));
  CHECK(agent.w.dec.b2.isZero(0.0));
  double max_abs = 0.0;
  for (int g = 0; g < 4; ++g) {
    max_abs = std::max(max_abs, agent.w.lstm.wx[g].cwiseAbs().maxCoeff());
    max_abs = std::max(max_abs, agent.w.lstm.wh[g].cwiseAbs().maxCoeff());
  }
  CHECK(max_abs <= 0.08);
  CHECK(max_abs > 0.0);
  CHECK(agent.step == 0);
}

TEST_CASE("score_pool with a zero agent emits the decoder bias everywhere") {
  AgentParams agent;
  agent.feature_dim = 2;
  agent.w.lstm = LstmParams<double>::zeros(3, 3);
  agent.w.dec = DecoderParams<double>::zeros(3);
  agent.w.dec.b2(0) = -0.25;
  agent.m = AgentBlocks::zeros_like(agent.w);
  agent.v = AgentBlocks::zeros_like(agent.w);
  Rng rng(5);
  SamplePool pool = random_pool(4, 2, rng);
  ScoredPool sp = score_pool(agent, pool, {2, 0, 3, 1});
  for (int k = 0; k < 4; ++k) CHECK(sp.logits[k] == -0.25);
}

TEST_CASE("score_pool on one sample produces one logit") {
  Rng rng(9);
  AgentParams agent = init_agent(2, rng);
  SamplePool pool = random_pool(3, 2, rng).with_labeled({0, 2});
  ScoredPool sp = score_pool(agent, pool, {1});
  CHECK(sp.logits.size() == 1);
}

TEST_CASE("score_pool chains lstm_step and decode_score with the prev score") {
  Rng rng(13);
  AgentParams agent = init_agent(2, rng);
  SamplePool pool = random_pool(3, 2, rng);
  ScoredPool sp = score_pool(agent, pool, {0, 1, 2});

  Vector h = Vector::Zero(3), c = Vector::Zero(3);
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vector x(3);
    x.head(2) = pool.feature(k);
    x[2] = prev;
    auto [h2, c2] = lstm_step<double>(agent.w.lstm, h, c, x);
    h = h2;
    c = c2;
    const double logit = decode_score<double>(agent.w.dec, h);
    CHECK(sp.logits[k] == doctest::Approx(logit).epsilon(1e-12));
    prev = scalar_sigmoid(logit);
  }
}

TEST_CASE("score_pool rejects an order that touches labeled ids") {
  Rng rng(17);
  AgentParams agent = init_agent(2, rng);
  SamplePool pool = random_pool(3, 2, rng).with_labeled({1});
  CHECK_THROWS_WITH(score_pool(agent, pool, {0, 1}),
                    "visit order mentions labeled id 1");
  CHECK_THROWS_WITH(score_pool(agent, pool, {0, 2, 1}),
                    "visit order must cover exactly the unlabeled ids");
}

TEST_CASE("score_pool is deterministic") {
  Rng rng(19);
  AgentParams agent = init_agent(3, rng);
  SamplePool pool = random_pool(6, 3, rng);
  ScoredPool a = score_pool(agent, pool, {5, 0, 2, 4, 1, 3});
  ScoredPool b = score_pool(agent, pool, {5, 0, 2, 4, 1, 3});
  CHECK(a.logits == b.logits);
}

TEST_CASE("sample_batch with equal logits has the symmetric log-probability") {
  Vector logits = Vector::Zero(3);
  Rng rng(23);
  auto [positions, lp] = sample_batch(logits, 2, rng);
  CHECK(positions.size() == 2);
  CHECK(positions[0] != positions[1]);
  CHECK(lp == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("sample_batch is all but forced by a saturated logit") {
  Vector logits(4);
  logits << -1.0, 50.0, 0.0, -3.0;
  Rng rng(29);
  auto [positions, lp] = sample_batch(logits, 1, rng);
  CHECK(positions == std::vector<int>{1});
  CHECK(lp == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("sample_batch rejects budgets beyond the candidate count") {
  Vector logits = Vector::Zero(2);
  Rng rng(1);
  CHECK_THROWS(sample_batch(logits, 3, rng));
}

TEST_CASE("sample_batch agrees with plackett_luce_logprob") {
  Rng rng(31);
  Vector logits(5);
  fill_uniform(rng, 2.0, logits);
  for (int trial = 0; trial < 20; ++trial) {
    auto [positions, lp] = sample_batch(logits, 3, rng);
    CHECK(lp == doctest::Approx(plackett_luce_logprob(logits, positions))
                    .epsilon(1e-12));
  }
}

TEST_CASE("sampling frequencies match the Plackett-Luce distribution") {
  Vector logits(4);
  logits << 1.0, 0.0, 0.0, -1.0;
  const int n_draws = 100000;
  Rng rng(37);
  std::map<std::pair<int, int>, int> counts;
  for (int i = 0; i < n_draws; ++i) {
    auto [positions, lp] = sample_batch(logits, 2, rng);
    counts[{positions[0], positions[1]}] += 1;
  }
  double z = 0.0;
  for (int i = 0; i < 4; ++i) z += std::exp(logits[i]);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      const double p = std::exp(logits[a]) / z * std::exp(logits[b]) /
                       (z - std::exp(logits[a]));
      const double mean = n_draws * p;
      const double sd = std::sqrt(n_draws * p * (1.0 - p));
      CHECK(std::abs(counts[{a, b}] - mean) <= 3.0 * sd);
    }
  }
}

TEST_CASE("plackett_luce_logprob normalizes over all ordered selections") {
  Rng rng(41);
  for (int n = 2; n <= 6; ++n) {
    for (int b = 1; b <= std::min(3, n); ++b) {
      Vector logits(n);
      fill_uniform(rng, 1.5, logits);
      double total = 0.0;
      std::vector<int> seq(static_cast<std::size_t>(b));
      // odometer over all ordered b-tuples of distinct positions
      std::function<void(int)> walk = [&](int depth) {
        if (depth == b) {
          total += std::exp(plackett_luce_logprob(logits, seq));
          return;
        }
        for (int p = 0; p < n; ++p) {
          bool used = false;
          for (int q = 0; q < depth; ++q) used |= (seq[static_cast<std::size_t>(q)] == p);
          if (used) continue;
          seq[static_cast<std::size_t>(depth)] = p;
          walk(depth + 1);
        }
      };
      walk(0);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("select_top_b picks the largest logits with id tie-breaks") {
  Vector logits(3);
  logits << 0.1, 0.9, 0.5;
  CHECK(select_top_b(logits, 2) == std::vector<int>{1, 2});

  Vector equal = Vector::Zero(4);
  CHECK(select_top_b(equal, 2) == std::vector<int>{0, 1});
  CHECK(select_top_b(logits, 3) == std::vector<int>{1, 2, 0});
}

TEST_CASE("select_top_b is invariant under constant logit shifts") {
  Rng rng(43);
  Vector logits(8);
  fill_uniform(rng, 1.0, logits);
  const auto base = select_top_b(logits, 3);
  Vector shifted = logits.array() + 17.25;
  CHECK(select_top_b(shifted, 3) == base);
}

TEST_CASE("select_top_b_ids resolves ties toward the smaller sample id") {
  Vector logits(3);
  logits << 0.5, 0.5, 1.0;
  SelectionBatch batch = select_top_b_ids({9, 4, 7}, logits, 2);
  CHECK(batch.ids == std::vector<int>{7, 4});
}

TEST_CASE("backprop_policy with zero advantage returns exact zeros") {
  Rng rng(47);
  AgentParams agent = init_agent(2, rng);
  SamplePool pool = random_pool(5, 2, rng);
  Trajectory traj = sample_trajectory(agent, pool, 2, rng);
  AgentBlocks grads = backprop_policy(agent, traj, 0.0);
  for_each_block(grads, [](const std::string&, const auto& blk) {
    CHECK(blk.isZero(0.0));
  });
}

TEST_CASE("backprop_policy gradients are linear in the advantage") {
  Rng rng(53);
  AgentParams agent = init_agent(3, rng);
  SamplePool pool = random_pool(6, 3, rng);
  Trajectory traj = sample_trajectory(agent, pool, 2, rng);
  AgentBlocks g1 = backprop_policy(agent, traj, 0.3);
  AgentBlocks g2 = backprop_policy(agent, traj, 0.6);
  auto r1 = block_refs(g1);
  auto r2 = block_refs(g2);
  for (std::size_t b = 0; b < r1.size(); ++b) {
    for (long i = 0; i < r1[b].size; ++i) {
      CHECK(r2[b].data[i] == 2.0 * r1[b].data[i]);
    }
  }
}

TEST_CASE("backprop_policy rejects a stale forward cache") {
  Rng rng(59);
  AgentParams agent = init_agent(2, rng);
  SamplePool pool = random_pool(5, 2, rng);
  Trajectory traj = sample_trajectory(agent, pool, 2, rng);
  AgentBlocks grads = backprop_policy(agent, traj, 0.5);
  adam_update(agent, grads, AdamOptions{});
  CHECK_THROWS_WITH(backprop_policy(agent, traj, 0.5),
                    "stale trajectory cache: agent parameters changed since "
                    "forward");
}

TEST_CASE("backprop_policy matches central finite differences") {
  for (std::uint64_t seed : {101ULL, 202ULL}) {
    Rng rng(seed);
    AgentParams agent = init_agent(2, rng);
    SamplePool pool = random_pool(6, 2, rng);
    Trajectory traj = sample_trajectory(agent, pool, 2, rng);
    const double advantage = 0.8;
    AgentBlocks grads = backprop_policy(agent, traj, advantage);

    AgentParams probe = agent;
    auto refs = block_refs(probe.w);
    auto grefs = block_refs(grads);
    const double h = 1e-5;
    for (std::size_t b = 0; b < refs.size(); ++b) {
      for (long i = 0; i < refs[b].size; ++i) {
        const double keep = refs[b].data[i];
        refs[b].data[i] = keep + h;
        ScoredPool up = score_pool(probe, pool, traj.order);
        refs[b].data[i] = keep - h;
        ScoredPool dn = score_pool(probe, pool, traj.order);
        refs[b].data[i] = keep;
        const double l_up =
            -advantage * plackett_luce_logprob(up.logits, traj.positions);
        const double l_dn =
            -advantage * plackett_luce_logprob(dn.logits, traj.positions);
        const double fd = (l_up - l_dn) / (2.0 * h);
        const double an = grefs[b].data[i];
        // FD noise is ~1e-11 absolute, so tiny gradients get an absolute
        // floor and everything else a relative bound.
        const double abs_err = std::abs(fd - an);
        const double err = abs_err <= 1e-8
                               ? 0.0
                               : abs_err / std::max(std::abs(fd), std::abs(an));
        INFO(refs[b].name, "[", i, "] fd=", fd, " an=", an);
        CHECK(err < 1e-4);
      }
    }
  }
}

TEST_CASE("a positive-advantage step raises the batch log-probability") {
  Rng rng(61);
  AgentParams agent = init_agent(3, rng);
  SamplePool pool = random_pool(8, 3, rng);
  for (int trial = 0; trial < 3; ++trial) {
    Trajectory traj = sample_trajectory(agent, pool, 3, rng);
    AgentBlocks grads = backprop_policy(agent, traj, 0.5);
    AdamOptions opt;
    opt.lr = 1e-4;
    adam_update(agent, grads, opt);
    ScoredPool rescored = score_pool(agent, pool, traj.order);
    const double lp2 = plackett_luce_logprob(rescored.logits, traj.positions);
    CHECK(lp2 > traj.logprob);
  }
}

TEST_CASE("adam first step moves a unit-gradient scalar by about -lr") {
  Matrix w(1, 1), g(1, 1), m(1, 1), v(1, 1);
  w(0, 0) = 0.5;
  g(0, 0) = 1.0;
  m.setZero();
  v.setZero();
  AdamOptions opt;
  adam_step(w, g, m, v, 1, opt);
  CHECK(w(0, 0) == doctest::Approx(0.5 - opt.lr).epsilon(1e-7));
}

TEST_CASE("adam with zero gradients leaves parameters alone") {
  Rng rng(67);
  AgentParams agent = init_agent(2, rng);
  const AgentParams before = agent;
  AgentBlocks zero = AgentBlocks::zeros_like(agent.w);
  adam_update(agent, zero, AdamOptions{});
  CHECK(agent.step == before.step + 1);
  auto ra = block_refs(agent.w);
  AgentParams copy = before;
  auto rb = block_refs(copy.w);
  for (std::size_t b = 0; b < ra.size(); ++b) {
    for (long i = 0; i < ra[b].size; ++i) CHECK(ra[b].data[i] == rb[b].data[i]);
  }
}

TEST_CASE("adam follows the hand-computed moment recursion") {
  const double g = 0.7;
  Matrix w(1, 1), grad(1, 1), m(1, 1), v(1, 1);
  w(0, 0) = 1.0;
  grad(0, 0) = g;
  m.setZero();
  v.setZero();
  AdamOptions opt;
  opt.lr = 0.01;

  double m_ref = 0.0, v_ref = 0.0, w_ref = 1.0;
  for (long t = 1; t <= 2; ++t) {
    adam_step(w, grad, m, v, t, opt);
    m_ref = opt.beta1 * m_ref + (1.0 - opt.beta1) * g;
    v_ref = opt.beta2 * v_ref + (1.0 - opt.beta2) * g * g;
    const double mh = m_ref / (1.0 - std::pow(opt.beta1, double(t)));
    const double vh = v_ref / (1.0 - std::pow(opt.beta2, double(t)));
    w_ref -= opt.lr * mh / (std::sqrt(vh) + opt.eps);
    CHECK(w(0, 0) == doctest::Approx(w_ref).epsilon(1e-12));
  }
}

TEST_CASE("adam_update names the block holding a non-finite gradient") {
  Rng rng(71);
  AgentParams agent = init_agent(2, rng);
  AgentBlocks grads = AgentBlocks::zeros_like(agent.w);
  grads.lstm.wh[kForget](0, 0) = std::nan("");
  CHECK_THROWS_WITH(adam_update(agent, grads, AdamOptions{}),
                    "non-finite gradient in block lstm.wh.forget");
}

TEST_CASE("clip_global_norm rescales only above the threshold") {
  Rng rng(73);
  AgentParams agent = init_agent(2, rng);
  AgentBlocks grads = AgentBlocks::zeros_like(agent.w);
  grads.dec.w2(0, 0) = 3.0;
  grads.lstm.b[kInput][0] = 4.0;
  const double pre = clip_global_norm(grads, 5.0);
  CHECK(pre == doctest::Approx(5.0));
  CHECK(grads.dec.w2(0, 0) == doctest::Approx(3.0));

  const double pre2 = clip_global_norm(grads, 2.5);
  CHECK(pre2 == doctest::Approx(5.0));
  double sq = 0.0;
  for_each_block(grads, [&sq](const std::string&, const auto& blk) {
    sq += blk.squaredNorm();
  });
  CHECK(std::sqrt(sq) == doctest::Approx(2.5));
}

TEST_CASE("agent checkpoints round-trip bit-exactly") {
  Rng rng(79);
  AgentParams agent = init_agent(3, rng);
  SamplePool pool = random_pool(7, 3, rng);
  for (int i = 0; i < 3; ++i) {
    Trajectory traj = sample_trajectory(agent, pool, 2, rng);
    AgentBlocks grads = backprop_policy(agent, traj, 0.25 * (i + 1));
    adam_update(agent, grads, AdamOptions{});
  }
  const auto path = std::filesystem::temp_directory_path() / "agent_rt.json";
  save_agent_checkpoint(agent, rng, path);
  auto [loaded, rng2] = load_agent_checkpoint(path);
  std::filesystem::remove(path);

  CHECK(loaded.step == agent.step);
  CHECK(loaded.version == agent.version);
  CHECK(loaded.feature_dim == agent.feature_dim);
  CHECK(rng2.seed() == rng.seed());
  CHECK(rng2.pos() == rng.pos());
  auto cmp = [](AgentBlocks& a, AgentBlocks& b) {
    auto ra = block_refs(a);
    auto rb = block_refs(b);
    for (std::size_t k = 0; k < ra.size(); ++k) {
      for (long i = 0; i < ra[k].size; ++i) {
        CHECK(ra[k].data[i] == rb[k].data[i]);
      }
    }
  };
  cmp(loaded.w, agent.w);
  cmp(loaded.m, agent.m);
  cmp(loaded.v, agent.v);
  CHECK(rng2.next_u64() == rng.next_u64());
}
