#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qcopt/datagen.hpp"
#include "qcopt/error.hpp"
#include "qcopt/ppo.hpp"
#include "qcopt/unitary.hpp"

using namespace qcopt;

namespace {

NetConfig small_net(int layers = 2) {
  NetConfig c;
  c.hidden = 4;
  c.layers = layers;
  return c;
}

void perturb(PolicyValueNet& net, std::uint64_t seed, double sd = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sd);
  for (double& p : net.params()) p += nd(rng);
}

Env toy_env(std::uint64_t i, int T = 6) {
  return Env(make_episode({3, 10, 11, 5}, i), EnvConfig{T, 0, {}, nullptr});
}

std::vector<Trajectory> toy_batch(const PolicyValueNet& net, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) {
    Env env = toy_env(static_cast<std::uint64_t>(i));
    out.push_back(rollout(&net, env, SampleMode::Stochastic, rng));
  }
  return out;
}

// One step on a fixed 2-qubit circuit with a hand-set reward and value.
Trajectory single_step(const PolicyValueNet& net, double reward, double value, double logp_shift) {
  Env env(Circuit(2, {cnot(0, 1), cnot(1, 0)}), EnvConfig{1, 4, {}, nullptr});
  const PolicyEval ev = forward(net, env.observation(), env.mask());
  std::size_t a = 0;
  while (!env.mask().bits[a]) ++a;
  Trajectory tr;
  tr.steps.push_back({env.observation(), env.mask(), a, reward, value, std::log(ev.probs[a]) + logp_shift});
  return tr;
}

double log_prob_of(const PolicyValueNet& net, const TrajectoryStep& st) {
  return std::log(forward(net, st.observation, st.mask).probs[st.action]);
}

}  // namespace

TEST(Net, UniformAtInitialisation) {
  PolicyValueNet net(NetConfig{}, 1);
  Env env = toy_env(0);
  const PolicyEval ev = forward(net, env.observation(), env.mask());
  const double k = static_cast<double>(env.mask().count());
  ASSERT_GT(k, 0);
  for (std::size_t i = 0; i < ev.probs.size(); ++i) {
    if (env.mask().bits[i]) {
      EXPECT_NEAR(ev.probs[i], 1.0 / k, 1e-12);
    } else {
      EXPECT_EQ(ev.probs[i], 0.0);
    }
  }
  EXPECT_TRUE(std::isfinite(ev.value));
}

TEST(Net, MaskIsExact) {
  PolicyValueNet net(small_net(3), 2);
  perturb(net, 3, 1.0);
  Env env = toy_env(1);
  ActionMask one = env.mask();
  std::fill(one.bits.begin(), one.bits.end(), 0);
  one.bits[7] = 1;
  const PolicyEval ev = forward(net, env.observation(), one);
  EXPECT_EQ(ev.probs[7], 1.0);
  for (std::size_t i = 0; i < ev.probs.size(); ++i) {
    if (i != 7) EXPECT_EQ(ev.probs[i], 0.0);
  }

  const PolicyEval full = forward(net, env.observation(), env.mask());
  double sum = 0.0;
  for (std::size_t i = 0; i < full.probs.size(); ++i) {
    if (!env.mask().bits[i]) EXPECT_EQ(full.probs[i], 0.0);
    sum += full.probs[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);

  std::fill(one.bits.begin(), one.bits.end(), 0);
  try {
    forward(net, env.observation(), one);
    FAIL() << "expected AllMasked";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AllMasked);
  }
}

TEST(Net, SizeIndependent) {
  PolicyValueNet net(NetConfig{}, 3);
  perturb(net, 4, 0.1);
  for (int nq : {12, 50}) {
    const Circuit c = prune(random_circuit({nq, nq * 12, 5, 0}));
    Env env = Env::reset(c, 1, 0);
    const PolicyEval ev = forward(net, env.observation(), env.mask());
    EXPECT_EQ(ev.probs.size(), static_cast<std::size_t>(nq) * env.capacity() * 5);
    EXPECT_TRUE(std::isfinite(ev.value));
    const PolicyEval again = forward(net, env.observation(), env.mask());
    EXPECT_EQ(ev.probs, again.probs);
    EXPECT_EQ(ev.value, again.value);
  }
}

TEST(Returns, Examples) {
  Trajectory tr;
  tr.steps.resize(2);
  tr.steps[0].reward = 1;
  tr.steps[1].reward = 2;
  auto ra = returns_and_advantages(tr, 0.5);
  EXPECT_DOUBLE_EQ(ra.returns[0], 2.0);
  EXPECT_DOUBLE_EQ(ra.returns[1], 2.0);
  EXPECT_DOUBLE_EQ(ra.advantages[0], 1.0);
  EXPECT_DOUBLE_EQ(ra.advantages[1], 2.0);

  ra = returns_and_advantages(tr, 1.0);
  EXPECT_DOUBLE_EQ(ra.returns[0], 3.0);

  tr.steps[0].reward = tr.steps[1].reward = 0;
  ra = returns_and_advantages(tr, 0.9);
  for (double v : ra.returns) EXPECT_EQ(v, 0.0);
  for (double v : ra.advantages) EXPECT_EQ(v, 0.0);

  // bootstrapped one-step advantage
  tr.steps[0].value = 0.5;
  tr.steps[1].value = 1.5;
  tr.terminal_value = 2.0;
  tr.steps[1].reward = 1.0;
  ra = returns_and_advantages(tr, 0.5);
  EXPECT_DOUBLE_EQ(ra.advantages[0], 0.0 + 0.5 * 1.5 - 0.5);
  EXPECT_DOUBLE_EQ(ra.advantages[1], 1.0 + 0.5 * 2.0 - 1.5);
}

TEST(Ppo, GradientMatchesFiniteDifferences) {
  PolicyValueNet net(small_net(2), 5);
  perturb(net, 6);
  auto batch = toy_batch(net, 3, 7);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.3);
  for (auto& tr : batch) {
    for (auto& st : tr.steps) {
      st.log_prob += nd(rng);
      st.value += nd(rng);
    }
  }
  TrainConfig cfg;
  cfg.entropy_coef = 0.01;
  const auto targets = prepare_targets(batch, cfg);
  std::vector<double> grad;
  const LossReport rep = ppo_objective(net, batch, targets, cfg, &grad);
  EXPECT_GT(rep.clip_fraction, 0.0);  // both regions are exercised
  EXPECT_LT(rep.clip_fraction, 1.0);

  const std::vector<double> theta(net.params().begin(), net.params().end());
  auto objective_at = [&](const std::vector<double>& dir, double h) {
    for (std::size_t i = 0; i < theta.size(); ++i) net.params()[i] = theta[i] + h * dir[i];
    const double v = ppo_objective(net, batch, targets, cfg, nullptr).objective;
    std::copy(theta.begin(), theta.end(), net.params().begin());
    return v;
  };
  for (int k = 0; k < 20; ++k) {
    std::vector<double> dir(theta.size());
    for (double& d : dir) d = nd(rng);
    double analytic = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) analytic += grad[i] * dir[i];
    const double h = 1e-5;
    const double numeric = (objective_at(dir, h) - objective_at(dir, -h)) / (2 * h);
    const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-12});
    EXPECT_LT(rel, 1e-4) << "direction " << k;
  }
}

TEST(Ppo, ClippedRegionHasZeroGradient) {
  PolicyValueNet net(small_net(2), 9);
  perturb(net, 10);
  TrainConfig cfg;
  cfg.normalize_advantages = false;
  cfg.value_coef = 0.0;
  // A > 0 with ratio e > 1 + eps, then A < 0 with ratio 1/e < 1 - eps
  for (auto [reward, shift] : {std::pair{1.0, -1.0}, std::pair{-1.0, 1.0}}) {
    const std::vector<Trajectory> batch{single_step(net, reward, 0.0, shift)};
    const auto targets = prepare_targets(batch, cfg);
    std::vector<double> grad;
    const LossReport rep = ppo_objective(net, batch, targets, cfg, &grad);
    EXPECT_EQ(rep.clip_fraction, 1.0);
    for (double g : grad) EXPECT_EQ(g, 0.0);
  }
  // inside the trust region the gradient is not zero
  const std::vector<Trajectory> batch{single_step(net, 1.0, 0.0, 0.0)};
  std::vector<double> grad;
  ppo_objective(net, batch, prepare_targets(batch, cfg), cfg, &grad);
  double largest = 0.0;
  for (double g : grad) largest = std::max(largest, std::abs(g));
  EXPECT_GT(largest, 0.0);
}

TEST(Ppo, PositiveAdvantageRaisesLogProb) {
  PolicyValueNet net(small_net(3), 11);
  perturb(net, 12);
  const std::vector<Trajectory> batch{single_step(net, 1.0, 0.0, 0.0)};
  const double before = log_prob_of(net, batch[0].steps[0]);
  TrainConfig cfg;
  cfg.normalize_advantages = false;
  cfg.use_adam = false;
  cfg.learning_rate = 1e-3;
  cfg.ppo_epochs = 1;
  AdamState opt;
  ppo_update(net, opt, batch, cfg);
  EXPECT_GT(log_prob_of(net, batch[0].steps[0]), before);
}

TEST(Ppo, ZeroAdvantageAndExactValuesGiveNoUpdate) {
  PolicyValueNet net(small_net(3), 13);
  perturb(net, 14);
  // zero value head: V(s) = 0 everywhere, matching all-zero returns
  for (const auto& t : net.tensors()) {
    if (t.shape.size() == 4 && t.shape[0] == 1 && t.shape[3] == 1) {
      std::fill_n(net.params().begin() + t.offset, t.size, 0.0);
    }
  }
  net.params().back() = 0.0;
  std::vector<Trajectory> batch{single_step(net, 0.0, 0.0, 0.3), single_step(net, 0.0, 0.0, -0.2)};
  ASSERT_EQ(forward(net, batch[0].steps[0].observation, batch[0].steps[0].mask).value, 0.0);
  const std::vector<double> before(net.params().begin(), net.params().end());
  for (bool adam : {true, false}) {
    TrainConfig cfg;
    cfg.use_adam = adam;
    AdamState opt;
    ppo_update(net, opt, batch, cfg);
    EXPECT_TRUE(std::equal(before.begin(), before.end(), net.params().begin()));
  }
}

TEST(Ppo, MinibatchesKeepZeroUpdateAndAscend) {
  PolicyValueNet net(small_net(2), 20);
  perturb(net, 21);
  for (const auto& t : net.tensors()) {
    if (t.shape.size() == 4 && t.shape[0] == 1 && t.shape[3] == 1) {
      std::fill_n(net.params().begin() + t.offset, t.size, 0.0);
    }
  }
  net.params().back() = 0.0;
  std::vector<Trajectory> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(single_step(net, 0.0, 0.0, 0.1 * i));
  const std::vector<double> before(net.params().begin(), net.params().end());
  TrainConfig cfg;
  cfg.minibatches = 3;
  AdamState opt;
  ppo_update(net, opt, batch, cfg);
  EXPECT_TRUE(std::equal(before.begin(), before.end(), net.params().begin()));
  EXPECT_EQ(opt.t, 3 * cfg.ppo_epochs);

  // one rewarded step split across groups still raises its probability
  std::vector<Trajectory> pos{single_step(net, 1.0, 0.0, 0.0), single_step(net, 1.0, 0.0, 0.0)};
  const double lp = log_prob_of(net, pos[0].steps[0]);
  cfg.normalize_advantages = false;
  cfg.minibatches = 2;
  cfg.learning_rate = 1e-3;
  AdamState opt2;
  ppo_update(net, opt2, pos, cfg);
  EXPECT_GT(log_prob_of(net, pos[0].steps[0]), lp);
}

TEST(Ppo, NonfiniteLossRejected) {
  PolicyValueNet net(small_net(2), 15);
  std::vector<Trajectory> batch{single_step(net, std::nan(""), 0.0, 0.0)};
  AdamState opt;
  try {
    ppo_update(net, opt, batch, TrainConfig{});
    FAIL() << "expected NonfiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonfiniteLoss);
  }
}

TEST(Train, ZeroEpochsLeaveNetUnchanged) {
  PolicyValueNet net(small_net(2), 16);
  const std::vector<double> before(net.params().begin(), net.params().end());
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(net, [](std::uint64_t i) { return make_episode({3, 10, 1, 5}, i); }, {6, 0, {}}, cfg);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_TRUE(std::equal(before.begin(), before.end(), net.params().begin()));
}

TEST(Train, DeterministicAcrossThreadCounts) {
  auto run = [](int jobs) {
    PolicyValueNet net(small_net(2), 17);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.episodes_per_epoch = 4;
    cfg.jobs = jobs;
    cfg.seed = 3;
    cfg.minibatches = 2;
    const TrainResult r = train(net, [](std::uint64_t i) { return make_episode({3, 10, 2, 5}, i); }, {8, 0, {}}, cfg);
    EXPECT_EQ(r.curve.size(), 2u);
    return std::vector<double>(net.params().begin(), net.params().end());
  };
  const auto a = run(1);
  EXPECT_EQ(a, run(1));
  EXPECT_EQ(a, run(3));
}

TEST(Optimize, GreedyIsDeterministicAndNeverWorse) {
  PolicyValueNet net(small_net(3), 18);
  perturb(net, 19, 0.5);
  const Circuit c = make_episode({4, 20, 5, 20}, 0);
  const OptimizeResult a = optimize(net, c, 30, 1, true, 1);
  const OptimizeResult b = optimize(net, c, 30, 1, true, 2);
  EXPECT_EQ(a.best, b.best);
  EXPECT_LE(a.best_q, quality(prune(c)));
  EXPECT_TRUE(equivalent_up_to_phase(unitary_of(a.best), unitary_of(c), 1e-8));

  const OptimizeResult s = optimize(net, c, 30, 3, false, 4);
  Circuit cur = s.start;
  for (const auto& step : s.log) {
    const auto ts = enumerate_transformations(cur, KindFilter::Soft);
    const Transformation* t = find_transformation(ts, step.rule, step.locus);
    ASSERT_NE(t, nullptr);
    cur = prune(apply(cur, *t));
  }
  EXPECT_EQ(cur, s.best);
}

TEST(NetFile, RoundTrip) {
  PolicyValueNet net(small_net(3), 20);
  perturb(net, 21);
  const auto path = std::filesystem::temp_directory_path() / "qcopt_net_roundtrip.bin";
  save_net(net, path);
  const PolicyValueNet back = load_net(path);
  EXPECT_EQ(back.config(), net.config());
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    EXPECT_EQ(back.params()[i], static_cast<double>(static_cast<float>(net.params()[i])));
  }
  std::ifstream is(path, std::ios::binary);
  char head[8];
  is.read(head, 8);
  EXPECT_EQ(std::string(head, 4), "QCNP");
  EXPECT_EQ(head[4], 1);
  EXPECT_EQ(head[5], 0);
  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(load_net(path), Error);
  std::filesystem::remove(path);
}
