// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "qcopt/anneal.hpp"
#include "qcopt/datagen.hpp"
#include "qcopt/env.hpp"
#include "qcopt/error.hpp"
#include "qcopt/ppo.hpp"
#include "qcopt/qaoa.hpp"
#include "qcopt/unitary.hpp"

using namespace qcopt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  if (v.size() > 1) r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

ActionCell random_action(const Env& env, std::mt19937_64& rng) {
  const auto ts = env.soft_transformations();
  return env.transformation_to_action(ts[std::uniform_int_distribution<std::size_t>(0, ts.size() - 1)(rng)]);
}

// ---------------------------------------------------------------- 1

Outcome soundness() {
  std::size_t checked = 0, bad = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Circuit raw = random_circuit({5, 30, derive_seed(101, i), 0});
    // raw circuits carry the hard-rule instances, expanded ones the soft variety
    const Circuit ex = expand(prune(raw), 20, derive_seed(102, i)).circuit;
    for (const Circuit* c : {&raw, &ex}) {
      for (const auto& t : enumerate_transformations(*c, KindFilter::All)) {
        ++checked;
        if (!verify_local(*c, t, 1e-8)) ++bad;
      }
    }
  }
  note(fmt("local checks: %zu transformations, %zu failures", checked, bad));

  int equivalent = 0;
  std::size_t steps = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Circuit start = make_episode({5, 30, derive_seed(103, i), 20}, 0);
    Env env(start, {.episode_length = 100});
    std::mt19937_64 rng(derive_seed(104, i));
    while (!env.done()) {
      env.step(random_action(env, rng));
      ++steps;
    }
    if (equivalent_up_to_phase(unitary_of(env.state()), unitary_of(start), 1e-8)) ++equivalent;
  }
  note(fmt("episodes: %d/100 phase-equivalent after %zu random steps", equivalent, steps));
  return {bad == 0 && equivalent == 100, fmt("%zu local checks, %d/100 episodes equivalent", checked, equivalent)};
}

// ---------------------------------------------------------------- 2

Outcome pruning() {
  int worse = 0, not_idempotent = 0, leftover = 0;
  std::mt19937_64 sizes(201);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const int nq = std::uniform_int_distribution<int>(2, 8)(sizes);
    const int ng = std::uniform_int_distribution<int>(0, 60)(sizes);
    Circuit c = random_circuit({nq, ng, derive_seed(202, i), 0});
    if (i % 2 == 1) c = expand(prune(c), 15, derive_seed(203, i)).circuit;
    const Circuit p = prune(c);
    if (quality(p) > quality(c) + 1e-12) ++worse;
    if (!(prune(p) == p)) ++not_idempotent;
    if (!enumerate_transformations(p, KindFilter::Hard).empty()) ++leftover;
  }
  return {worse == 0 && not_idempotent == 0 && leftover == 0,
          fmt("10000 circuits: q increased %d, not idempotent %d, hard opportunities left %d", worse, not_idempotent, leftover)};
}

// ---------------------------------------------------------------- 3

Outcome statistics() {
  constexpr int kSeeds = 300;
  std::vector<double> n0, d1, n1, d2, n2;
  for (std::uint64_t i = 0; i < kSeeds; ++i) {
    const Circuit raw = random_circuit({12, 150, derive_seed(301, i), 0});
    const Circuit p = prune(raw);
    const Circuit e = expand(p, 500, derive_seed(302, i)).circuit;
    n0.push_back(static_cast<double>(raw.gate_count()));
    d1.push_back(p.depth());
    n1.push_back(static_cast<double>(p.gate_count()));
    d2.push_back(e.depth());
    n2.push_back(static_cast<double>(e.gate_count()));
  }
  bool ok = true;
  std::ostringstream os;
  auto check = [&](const char* what, const std::vector<double>& v, double anchor, double tol) {
    const MeanSe m = mean_se(v);
    const bool in = std::abs(m.mean - anchor) <= tol * anchor;
    ok &= in;
    note(fmt("%-22s mean %8.2f +- %.2f  anchor %7.2f  band +-%2.0f%%  %s", what, m.mean, m.se, anchor, tol * 100,
             in ? "ok" : "outside"));
    os << what << ' ' << fmt("%.1f", m.mean) << (in ? "" : "(out)") << "; ";
  };
  check("n before prune", n0, 159, 0.25);
  check("d after prune", d1, 37.15, 0.25);
  check("n after prune", n1, 115.27, 0.25);
  check("d after expansion", d2, 248, 0.35);
  check("n after expansion", n2, 508, 0.35);
  return {ok, os.str()};
}

// ---------------------------------------------------------------- 4

Outcome annealing() {
  std::vector<Circuit> originals, starts;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Circuit p = prune(random_circuit({8, 60, derive_seed(401, 2 * i), 0}));
    originals.push_back(p);
    starts.push_back(expand(p, 100, derive_seed(401, 2 * i + 1)).circuit);
  }
  AnnealConfig cfg;
  cfg.steps = 20000;
  cfg.seed = 402;
  cfg.record_trace = true;
  bool tuned = true;
  try {
    const TuneResult t = tune_acceptance(cfg, starts);
    cfg = t.config;
    note(fmt("tuned t_start %.4g t_end %.4g, pilot acceptance %.3f after %d rounds", cfg.t_start, cfg.t_end,
             t.acceptance, t.iterations));
  } catch (const Error& e) {
    tuned = false;
    note(std::string("tuning: ") + e.what());
    // still report what annealing reaches with the default schedule
  }

  std::vector<double> q0, q1, acc;
  bool monotone = true;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    AnnealConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    const AnnealResult r = anneal(starts[i], c);
    q0.push_back(quality(originals[i]));
    q1.push_back(r.best_q);
    acc.push_back(r.acceptance_fraction());
    for (std::size_t k = 1; k < r.trace.size(); ++k) monotone &= r.trace[k].best_q <= r.trace[k - 1].best_q;
  }
  const MeanSe m0 = mean_se(q0), m1 = mean_se(q1), ma = mean_se(acc);
  const bool q_ok = m1.mean <= 0.95 * m0.mean;
  const bool acc_ok = ma.mean >= 0.10 && ma.mean <= 0.25;
  note(fmt("pruned originals q %.2f, annealed q %.2f +- %.2f (ratio %.3f), acceptance %.3f, t_start %.3g t_end %.3g",
           m0.mean, m1.mean, m1.se, m1.mean / m0.mean, ma.mean, cfg.t_start, cfg.t_end));
  return {tuned && q_ok && acc_ok && monotone,
          fmt("ratio %.3f (need <= 0.95), acceptance %.3f (need 0.10-0.25), tuned %s, best trace monotone %s",
              m1.mean / m0.mean, ma.mean, tuned ? "yes" : "no", monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------- 5

std::vector<Trajectory> small_batch(const PolicyValueNet& net, std::uint64_t seed) {
  std::vector<Trajectory> batch;
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < 3; ++i) {
    Env env(make_episode({3, 10, derive_seed(seed, i), 6}, 0), {.episode_length = 8});
    batch.push_back(rollout(&net, env, SampleMode::Stochastic, rng));
  }
  return batch;
}

void jitter(PolicyValueNet& net, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  for (double& p : net.params()) p += nd(rng);
}

Outcome ppo_correctness() {
  const NetConfig nc{8, 5, 4, 2, 3};
  PolicyValueNet net(nc, 501);
  std::mt19937_64 rng(502);
  jitter(net, rng, 0.3);
  auto batch = small_batch(net, 503);
  // stale log-probs and values put some ratios outside the clip range
  std::normal_distribution<double> nd(0.0, 0.3);
  for (auto& tr : batch) {
    for (auto& st : tr.steps) {
      st.log_prob += nd(rng);
      st.value += nd(rng);
    }
  }
  TrainConfig tc;
  tc.entropy_coef = 0.01;
  const auto targets = prepare_targets(batch, tc);
  std::vector<double> grad;
  const LossReport rep = ppo_objective(net, batch, targets, tc, &grad);

  const std::vector<double> theta(net.params().begin(), net.params().end());
  auto objective_at = [&](const std::vector<double>& dir, double h) {
    for (std::size_t i = 0; i < theta.size(); ++i) net.params()[i] = theta[i] + h * dir[i];
    const double v = ppo_objective(net, batch, targets, tc, nullptr).objective;
    std::copy(theta.begin(), theta.end(), net.params().begin());
    return v;
  };
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> dir(theta.size());
    for (double& d : dir) d = nd(rng);
    double analytic = 0;
    for (std::size_t i = 0; i < dir.size(); ++i) analytic += grad[i] * dir[i];
    const double h = 1e-5;
    const double numeric = (objective_at(dir, h) - objective_at(dir, -h)) / (2 * h);
    worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-12}));
  }
  note(fmt("finite differences over 20 directions: worst relative error %.2e (clip fraction %.2f)", worst,
           rep.clip_fraction));

  bool masked_zero = true;
  std::size_t masked_cells = 0;
  for (const auto& tr : batch) {
    for (const auto& st : tr.steps) {
      const PolicyEval ev = forward(net, st.observation, st.mask);
      for (std::size_t a = 0; a < ev.probs.size(); ++a) {
        if (!st.mask.bits[a]) {
          ++masked_cells;
          masked_zero &= ev.probs[a] == 0.0;
        }
      }
    }
  }
  note(fmt("masked cells checked: %zu, all exactly zero: %s", masked_cells, masked_zero ? "yes" : "no"));

  // zero value head gives V = 0 everywhere; zero rewards make R = 0 and A = 0
  PolicyValueNet zero_net = net;
  for (const auto& t : zero_net.tensors()) {
    if (t.shape.size() == 4 && t.shape[0] == 1 && t.shape[3] == 1) {
      std::fill_n(zero_net.params().begin() + t.offset, t.size, 0.0);
    }
  }
  zero_net.params().back() = 0.0;
  auto frozen = small_batch(zero_net, 505);
  for (auto& tr : frozen) {
    tr.terminal_value = 0.0;
    for (auto& st : tr.steps) {
      st.reward = 0.0;
      st.value = forward(zero_net, st.observation, st.mask).value;
    }
  }
  const std::vector<double> before(zero_net.params().begin(), zero_net.params().end());
  bool unchanged = true;
  for (bool adam : {true, false}) {
    TrainConfig zt;
    zt.use_adam = adam;
    AdamState opt;
    ppo_update(zero_net, opt, frozen, zt);
    unchanged &= std::equal(before.begin(), before.end(), zero_net.params().begin());
  }
  note(fmt("zero-advantage update over %zu trajectories leaves parameters bit-identical: %s", frozen.size(),
           unchanged ? "yes" : "no"));
  return {worst < 1e-4 && masked_zero && unchanged,
          fmt("FD error %.2e, masked probabilities zero %s, zero update %s", worst, masked_zero ? "yes" : "no",
              unchanged ? "yes" : "no")};
}

// ---------------------------------------------------------------- 6 and 7

const GenConfig kToy{4, 20, 601, 30};
const EpisodeSettings kToyEnv{50, 0, {}};

NetConfig toy_net_config() {
  NetConfig nc;
  nc.hidden = 16;
  nc.layers = 3;
  return nc;
}

TrainConfig toy_train_config() {
  TrainConfig tc;
  tc.epochs = 200;
  tc.episodes_per_epoch = 32;
  tc.learning_rate = 3e-3;
  tc.value_coef = 0.1;
  tc.ppo_epochs = 4;
  tc.minibatches = 8;
  tc.seed = 602;
  return tc;
}

std::optional<PolicyValueNet> g_trained;

PolicyValueNet& trained_net() {
  if (g_trained) return *g_trained;
  g_trained.emplace(toy_net_config(), 603);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig tc = toy_train_config();
  train(*g_trained, [](std::uint64_t i) { return make_episode(kToy, i); }, kToyEnv, tc, [&](const EpochStats& s) {
    if (s.epoch % 20 == 0 || s.epoch + 1 == tc.epochs) {
      note(fmt("epoch %3d  d %.2f n %.2f q %.2f return %.2f  (%.0f s)", s.epoch, s.mean_d, s.mean_n, s.mean_q,
               s.mean_return, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    }
  });
  return *g_trained;
}

Outcome toy_learning() {
  PolicyValueNet& net = trained_net();
  GenConfig held = kToy;
  held.seed = 604;
  std::vector<Circuit> starts;
  std::vector<double> pruned_q, start_q;
  for (std::uint64_t i = 0; i < 200; ++i) {
    starts.push_back(make_episode(held, i));
    GenConfig g = held;
    g.seed = derive_seed(held.seed, 2 * i);  // same raw circuit make_episode starts from
    pruned_q.push_back(quality(prune(random_circuit(g))));
    start_q.push_back(quality(starts.back()));
  }
  const EvalResult rnd = evaluate(nullptr, starts, kToyEnv, SampleMode::Uniform, 605);
  // the trained policy is stochastic; argmax tends to cycle through neutral moves
  const EvalResult agent = evaluate(&net, starts, kToyEnv, SampleMode::Stochastic, 606);
  const EvalResult greedy = evaluate(&net, starts, kToyEnv, SampleMode::Greedy, 607);
  const MeanSe p = mean_se(pruned_q), s = mean_se(start_q), r = mean_se(rnd.final_q), a = mean_se(agent.final_q),
               g = mean_se(greedy.final_q);
  note(fmt("held-out 200: pruned original q %.2f, expanded start %.2f, random %.2f +- %.2f", p.mean, s.mean, r.mean, r.se));
  note(fmt("agent sampled %.2f +- %.2f, agent greedy %.2f +- %.2f", a.mean, a.se, g.mean, g.se));
  const double se = std::sqrt(a.se * a.se + r.se * r.se);
  const double margin = (r.mean - a.mean) / se;
  const bool beats_random = margin >= 3;
  const bool beats_pruned = a.mean < p.mean;
  return {beats_random && beats_pruned, fmt("agent q %.2f vs random %.2f (%.1f SE, need 3), vs pruned original %.2f (%s)",
                                            a.mean, r.mean, margin, p.mean, beats_pruned ? "below" : "not below")};
}

Outcome extrapolation() {
  PolicyValueNet& net = trained_net();
  std::vector<Circuit> starts;
  for (std::uint64_t i = 0; i < 20; ++i) starts.push_back(prune(random_circuit({50, 2500, derive_seed(701, i), 0})));
  const EpisodeSettings es{250, 0, {}};
  std::vector<double> before;
  for (const auto& c : starts) before.push_back(quality(c));
  EvalResult r;
  try {
    r = evaluate(&net, starts, es, SampleMode::Stochastic, 702);
  } catch (const Error& e) {
    return {false, std::string("evaluation failed: ") + e.what()};
  }
  const EvalResult g = evaluate(&net, starts, es, SampleMode::Greedy, 703);
  const MeanSe b = mean_se(before), f = mean_se(r.final_q), fg = mean_se(g.final_q);
  note(fmt("50 qubits, 20 pruned circuits, T=250 sampled: q %.2f -> %.2f (+- %.2f), overflows %d", b.mean, f.mean, f.se,
           r.overflows));
  note(fmt("greedy for comparison: q %.2f -> %.2f (+- %.2f)", b.mean, fg.mean, fg.se));
  return {f.mean <= b.mean, fmt("mean q %.2f -> %.2f", b.mean, f.mean)};
}

// ---------------------------------------------------------------- 8

Outcome qaoa() {
  std::mt19937_64 rng(801);
  std::uniform_real_distribution<double> ang(0.05, std::numbers::pi / 2 - 0.05);
  auto params = [&](int cycles) {
    QaoaParams p;
    for (int c = 0; c < cycles; ++c) {
      p.gamma.push_back(ang(rng));
      p.beta.push_back(ang(rng));
    }
    return p;
  };
  auto equivalent = [](const Graph& g, const QaoaParams& p) {
    const QaoaCircuit qc = compile_maxcut(g, p);
    const Unitary ref = permute_qubits(maxcut_reference_unitary(g, p), qc.qubit_of_node);
    return equivalent_up_to_phase(unitary_of(qc.circuit), ref, 1e-8);
  };
  int total = 0, good = 0;
  for (int n = 1; n <= 4; ++n) {
    std::vector<std::pair<int, int>> all;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
    }
    for (unsigned mask = 0; mask < (1u << all.size()); ++mask) {
      std::vector<std::pair<int, int>> edges;
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (mask >> k & 1u) edges.push_back(all[k]);
      }
      const Graph g = make_graph(n, edges);
      for (int cycles : {1, 2}) {
        ++total;
        good += equivalent(g, params(cycles));
      }
    }
  }
  for (int cycles : {1, 2}) {
    ++total;
    good += equivalent(complete_graph(5), params(cycles));
  }
  const QaoaCircuit six = compile_maxcut(complete_graph(6), params(2));
  note(fmt("%d/%d compilations equivalent to the reference", good, total));
  note(fmt("6-node all-to-all, 2 cycles: d=%d n=%zu (reference anchor d=75 n=142)", six.circuit.depth(),
           six.circuit.gate_count()));
  return {good == total, fmt("%d/%d equivalent; K6 C=2 d=%d n=%zu", good, total, six.circuit.depth(), six.circuit.gate_count())};
}

// ---------------------------------------------------------------- 9

Outcome bijection() {
  std::size_t transformations = 0;
  int bad_roundtrip = 0, bad_count = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Circuit c = i % 2 ? make_episode({5, 30, derive_seed(901, i), 20}, 0) : prune(random_circuit({6, 40, derive_seed(902, i), 0}));
    const Env env(c, {});
    const auto ts = env.soft_transformations();
    transformations += ts.size();
    if (env.mask().count() != ts.size()) ++bad_count;
    for (const auto& t : ts) {
      const ActionCell a = env.transformation_to_action(t);
      const Transformation& back = env.action_to_transformation(a);
      if (back.rule != t.rule || back.locus != t.locus || back.affected != t.affected ||
          !env.mask().allowed(a) || !(env.transformation_to_action(back) == a)) {
        ++bad_roundtrip;
      }
    }
  }
  return {bad_roundtrip == 0 && bad_count == 0,
          fmt("%zu transformations, round-trip failures %d, mask count mismatches %d", transformations, bad_roundtrip, bad_count)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"soundness", soundness}},
      {2, {"pruning properties", pruning}},
      {3, {"statistics anchors", statistics}},
      {4, {"annealing", annealing}},
      {5, {"PPO correctness", ppo_correctness}},
      {6, {"toy RL learning", toy_learning}},
      {7, {"size extrapolation", extrapolation}},
      {8, {"QAOA oracle", qaoa}},
      {9, {"encoding bijection", bijection}},
  };
  std::vector<int> run;
  for (int i = 1; i < argc; ++i) run.push_back(std::atoi(argv[i]));
  if (run.empty()) {
    for (const auto& [k, _] : criteria) run.push_back(k);
  }
  int failed = 0;
  for (int k : run) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    std::printf("[%d] %s\n", k, it->second.first);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s  (%s; %.0f s)\n", k, it->second.first, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
