#include "qcopt/ppo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "qcopt/datagen.hpp"
#include "qcopt/error.hpp"

namespace qcopt {

double Trajectory::total_reward() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s;
}

ReturnsAdvantages returns_and_advantages(const Trajectory& traj, double gamma) {
  const std::size_t n = traj.steps.size();
  ReturnsAdvantages ra{std::vector<double>(n), std::vector<double>(n)};
  double acc = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const auto& s = traj.steps[t];
    acc = s.reward + gamma * acc;
    ra.returns[t] = acc;
    const double next_v = t + 1 < n ? traj.steps[t + 1].value : traj.terminal_value;
    ra.advantages[t] = s.reward + gamma * next_v - s.value;
  }
  return ra;
}

std::vector<ReturnsAdvantages> prepare_targets(std::span<const Trajectory> batch, const TrainConfig& cfg) {
  std::vector<ReturnsAdvantages> out;
  out.reserve(batch.size());
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& tr : batch) {
    out.push_back(returns_and_advantages(tr, cfg.gamma));
    for (double a : out.back().advantages) {
      sum += a;
      sq += a * a;
      ++n;
    }
  }
  if (cfg.normalize_advantages && n > 1) {
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    const double sd = std::sqrt(var);
    for (auto& ra : out) {
      for (double& a : ra.advantages) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
    }
  }
  return out;
}

LossReport ppo_objective(const PolicyValueNet& net, std::span<const Trajectory> batch,
                         std::span<const ReturnsAdvantages> targets, const TrainConfig& cfg,
                         std::vector<double>* grad) {
  LossReport rep;
  for (const auto& tr : batch) rep.steps += tr.steps.size();
  if (grad) grad->assign(net.num_params(), 0.0);
  if (rep.steps == 0) return rep;
  const double inv_n = 1.0 / static_cast<double>(rep.steps);
  std::size_t clipped = 0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Trajectory& tr = batch[b];
    if (tr.steps.empty()) continue;
    const int cells = tr.steps.front().observation.num_qubits * tr.steps.front().observation.capacity;
    const std::size_t chunk = std::max<std::size_t>(1, 16384 / std::max(1, cells));
    for (std::size_t s0 = 0; s0 < tr.steps.size(); s0 += chunk) {
      const std::size_t s1 = std::min(tr.steps.size(), s0 + chunk);
      std::vector<const Observation*> obs;
      for (std::size_t s = s0; s < s1; ++s) obs.push_back(&tr.steps[s].observation);
      const NetInput in = make_input(obs);
      NetCache cache;
      const NetOutput out = net.forward(in, grad ? &cache : nullptr);
      const Eigen::Index width = static_cast<Eigen::Index>(cells) * out.logits.cols();
      RowMatrix dlogits;
      std::vector<double> dvalues(s1 - s0, 0.0);
      if (grad) dlogits = RowMatrix::Zero(out.logits.rows(), out.logits.cols());

      for (std::size_t s = s0; s < s1; ++s) {
        const auto& st = tr.steps[s];
        const std::size_t i = s - s0;
        const double* lg = out.logits.data() + i * width;
        const std::vector<double> p = masked_softmax(std::span<const double>(lg, width), st.mask);
        const double logp = std::log(p[st.action]);
        const double ratio = std::exp(logp - st.log_prob);
        const double adv = targets[b].advantages[s];
        const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const bool flat = (adv > 0 && ratio > 1.0 + cfg.clip) || (adv < 0 && ratio < 1.0 - cfg.clip);
        rep.surrogate += std::min(ratio * adv, clipped_ratio * adv) * inv_n;
        clipped += flat;
        double h = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (p[j] > 0) h -= p[j] * std::log(p[j]);
        }
        rep.entropy += h * inv_n;
        const double verr = out.values[i] - targets[b].returns[s];
        rep.value_loss += verr * verr * inv_n;
        if (!grad) continue;
        const double g = flat ? 0.0 : ratio * adv * inv_n;
        double* dl = dlogits.data() + i * width;
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (!st.mask.bits[j]) continue;
          dl[j] = g * ((j == st.action ? 1.0 : 0.0) - p[j]);
          if (cfg.entropy_coef != 0.0 && p[j] > 0) dl[j] -= cfg.entropy_coef * inv_n * p[j] * (std::log(p[j]) + h);
        }
        dvalues[i] = -2.0 * cfg.value_coef * verr * inv_n;
      }
      if (grad) net.backward(in, cache, dlogits, dvalues, *grad);
    }
  }
  rep.objective = rep.surrogate - cfg.value_coef * rep.value_loss + cfg.entropy_coef * rep.entropy;
  rep.clip_fraction = static_cast<double>(clipped) * inv_n;
  if (grad) {
    double sq = 0.0;
    for (double g : *grad) sq += g * g;
    rep.grad_norm = std::sqrt(sq);
  }
  return rep;
}

LossReport ppo_update(PolicyValueNet& net, AdamState& opt, std::span<const Trajectory> batch,
                      const TrainConfig& cfg) {
  if (batch.empty()) throw Error(Errc::DomainError, "empty batch");
  const auto targets = prepare_targets(batch, cfg);
  const std::size_t np = net.num_params();
  if (opt.m.size() != np) {
    opt.m.assign(np, 0.0);
    opt.v.assign(np, 0.0);
    opt.t = 0;
  }
  std::vector<double> grad;
  LossReport first;
  bool have_first = false;
  auto theta = net.params();
  const std::size_t groups = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.minibatches)), 1, batch.size());
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Trajectory> sub_batch;
  std::vector<ReturnsAdvantages> sub_targets;
  for (int pass = 0; pass < std::max(1, cfg.ppo_epochs); ++pass) {
    if (groups > 1) {
      std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(opt.t)));
      std::shuffle(order.begin(), order.end(), rng);
    }
    for (std::size_t g = 0; g < groups; ++g) {
      std::span<const Trajectory> part = batch;
      std::span<const ReturnsAdvantages> part_targets = targets;
      if (groups > 1) {
        // advantages stay normalised over the whole batch
        sub_batch.clear();
        sub_targets.clear();
        for (std::size_t k = g * batch.size() / groups; k < (g + 1) * batch.size() / groups; ++k) {
          sub_batch.push_back(batch[order[k]]);
          sub_targets.push_back(targets[order[k]]);
        }
        part = sub_batch;
        part_targets = sub_targets;
      }
      const LossReport rep = ppo_objective(net, part, part_targets, cfg, &grad);
      if (!std::isfinite(rep.objective) || !std::isfinite(rep.grad_norm)) {
        throw Error(Errc::NonfiniteLoss, "objective or gradient is not finite");
      }
      if (!have_first && groups == 1) first = rep;
      have_first = true;
      if (cfg.use_adam) {
        ++opt.t;
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(opt.t));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(opt.t));
        for (std::size_t i = 0; i < np; ++i) {
          opt.m[i] = cfg.adam_beta1 * opt.m[i] + (1 - cfg.adam_beta1) * grad[i];
          opt.v[i] = cfg.adam_beta2 * opt.v[i] + (1 - cfg.adam_beta2) * grad[i] * grad[i];
          theta[i] += cfg.learning_rate * (opt.m[i] / c1) / (std::sqrt(opt.v[i] / c2) + cfg.adam_eps);
        }
      } else {
        ++opt.t;
        for (std::size_t i = 0; i < np; ++i) theta[i] += cfg.learning_rate * grad[i];
      }
    }
  }
  // with minibatches the report describes the final parameters on the whole batch
  if (groups > 1) first = ppo_objective(net, batch, targets, cfg, nullptr);
  return first;
}

std::size_t sample_action(std::span<const double> probs, SampleMode mode, std::mt19937_64& rng) {
  if (probs.empty()) throw Error(Errc::AllMasked, "no legal action");
  if (mode == SampleMode::Greedy) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  if (last == probs.size()) throw Error(Errc::AllMasked, "no legal action");
  return last;
}

Trajectory rollout(const PolicyValueNet* net, Env& env, SampleMode mode, std::mt19937_64& rng,
                   const std::function<void(const Env&, const StepRecord&)>& visit) {
  if (!net && mode != SampleMode::Uniform) throw Error(Errc::DomainError, "a network is required");
  Trajectory tr;
  tr.start_q = env.q();
  while (!env.done()) {
    TrajectoryStep st{env.observation(), env.mask(), 0, 0.0, 0.0, 0.0};
    std::vector<double> probs;
    if (mode == SampleMode::Uniform) {
      const double k = static_cast<double>(st.mask.count());
      probs.resize(st.mask.size());
      for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = st.mask.bits[i] ? 1.0 / k : 0.0;
      if (net) st.value = net->forward(make_input(st.observation)).values[0];
    } else {
      PolicyEval ev = forward(*net, st.observation, st.mask);
      probs = std::move(ev.probs);
      st.value = ev.value;
    }
    st.action = sample_action(probs, mode, rng);
    st.log_prob = std::log(probs[st.action]);
    const ActionCell cell = st.mask.cell(st.action);
    const Transformation& t = env.action_to_transformation(cell);
    const StepRecord rec{t.rule, t.locus};
    const StepOutcome out = env.step(cell);
    st.reward = out.reward;
    tr.steps.push_back(std::move(st));
    if (visit) visit(env, rec);
  }
  const StepInfo info = env.info();
  tr.overflow = info.overflow;
  tr.final_q = info.q;
  tr.final_depth = info.depth;
  tr.final_gate_count = info.gate_count;
  if (net && !info.overflow && !info.stuck) tr.terminal_value = net->forward(make_input(env.observation())).values[0];
  return tr;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::size_t err_index = n;
  std::mutex mu;
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(jobs));
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

EnvConfig env_config(const EpisodeSettings& s) {
  EnvConfig c;
  c.episode_length = s.episode_length;
  c.capacity = s.capacity;
  c.quality = s.quality;
  return c;
}

}  // namespace

TrainResult train(PolicyValueNet& net, const EpisodeSource& source, const EpisodeSettings& env,
                  const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
  TrainResult res;
  AdamState opt;
  const auto per_epoch = static_cast<std::size_t>(std::max(1, cfg.episodes_per_epoch));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Trajectory> batch(per_epoch);
    parallel_for(per_epoch, cfg.jobs, [&](std::size_t i) {
      const std::uint64_t idx = static_cast<std::uint64_t>(epoch) * per_epoch + i;
      Env e(source(idx), env_config(env));
      std::mt19937_64 rng(derive_seed(cfg.seed, idx));
      batch[i] = rollout(&net, e, SampleMode::Stochastic, rng);
    });
    EpochStats st;
    st.epoch = epoch;
    for (const auto& tr : batch) {
      st.mean_d += tr.final_depth;
      st.mean_n += static_cast<double>(tr.final_gate_count);
      st.mean_q += tr.final_q;
      st.mean_return += tr.total_reward();
      st.overflows += tr.overflow;
    }
    const double k = static_cast<double>(per_epoch);
    st.mean_d /= k;
    st.mean_n /= k;
    st.mean_q /= k;
    st.mean_return /= k;
    const bool any = std::any_of(batch.begin(), batch.end(), [](const Trajectory& t) { return !t.steps.empty(); });
    if (any) st.loss = ppo_update(net, opt, batch, cfg);
    res.curve.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  return res;
}

EvalResult evaluate(const PolicyValueNet* net, std::span<const Circuit> starts, const EpisodeSettings& env,
                    SampleMode mode, std::uint64_t seed, int jobs) {
  std::vector<Trajectory> trs(starts.size());
  parallel_for(starts.size(), jobs, [&](std::size_t i) {
    Env e(starts[i], env_config(env));
    std::mt19937_64 rng(derive_seed(seed, i));
    trs[i] = rollout(net, e, mode, rng);
  });
  EvalResult res;
  for (const auto& tr : trs) {
    res.final_q.push_back(tr.final_q);
    res.returns.push_back(tr.total_reward());
    res.overflows += tr.overflow;
  }
  return res;
}

OptimizeResult optimize(const PolicyValueNet& net, const Circuit& c, int episode_length, int attempts, bool greedy,
                        std::uint64_t seed, int capacity) {
  OptimizeResult res{prune(c), {}, 0.0, {}};
  res.best = res.start;
  EnvConfig cfg;
  cfg.episode_length = episode_length;
  cfg.capacity = capacity;
  res.best_q = Env(res.start, cfg).q();
  for (int a = 0; a < attempts; ++a) {
    Env env(res.start, cfg);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(a)));
    std::vector<StepRecord> path;
    const SampleMode mode = greedy && a == 0 ? SampleMode::Greedy : SampleMode::Stochastic;
    rollout(&net, env, mode, rng, [&](const Env& e, const StepRecord& rec) {
      path.push_back(rec);
      if (e.q() < res.best_q) {
        res.best = e.state();
        res.best_q = e.q();
        res.log = path;
      }
    });
  }
  return res;
}

}  // namespace qcopt
