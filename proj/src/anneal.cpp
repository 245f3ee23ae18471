#include "qcopt/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qcopt/error.hpp"

namespace qcopt {

double temperature_at(const AnnealConfig& cfg, int k) {
  if (cfg.steps < 1 || !(cfg.t_end > 0.0) || cfg.t_start < cfg.t_end) {
    throw Error(Errc::DomainError, "need steps >= 1 and t_start >= t_end > 0");
  }
  return cfg.t_start * std::pow(cfg.t_end / cfg.t_start, static_cast<double>(k) / cfg.steps);
}

double acceptance_probability(double dq, double temperature) {
  if (dq <= 0.0) return 1.0;
  if (temperature <= 0.0) return 0.0;
  return std::exp(-dq / temperature);
}

AnnealResult anneal(const Circuit& c, const AnnealConfig& cfg) {
  const RuleCatalog& catalog = cfg.catalog ? *cfg.catalog : RuleCatalog::standard();
  const QualityFn qf = cfg.quality ? cfg.quality : weighted_quality();
  temperature_at(cfg, 0);  // validates

  AnnealResult res{c, qf(c), -1, {}, {}, 0, 0, false};
  if (cfg.record_trace) res.trace.reserve(static_cast<std::size_t>(cfg.steps));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Circuit cur = c;
  double q = res.best_q;
  std::vector<Transformation> soft = enumerate_transformations(cur, KindFilter::Soft, catalog);
  std::vector<StepRecord> path;

  for (int k = 0; k < cfg.steps; ++k) {
    if (soft.empty()) {
      res.exhausted = true;
      break;
    }
    const double temp = temperature_at(cfg, k);
    std::uniform_int_distribution<std::size_t> pick(0, soft.size() - 1);
    const Transformation& t = soft[pick(rng)];
    Circuit next = prune(apply(cur, t), catalog);
    const double nq = qf(next);
    const double u = unit(rng);
    const bool accept = u < acceptance_probability(nq - q, temp);
    ++res.proposals;
    if (accept) {
      ++res.accepted;
      path.push_back({t.rule, t.locus});
      cur = std::move(next);
      q = nq;
      soft = enumerate_transformations(cur, KindFilter::Soft, catalog);
      if (q < res.best_q) {
        res.best = cur;
        res.best_q = q;
        res.best_step = k;
        res.log = path;
      }
    }
    if (cfg.record_trace) {
      res.trace.push_back({k, temp, q, cur.depth(), cur.gate_count(), accept, res.best_q});
    }
  }
  return res;
}

namespace {

double pilot_acceptance(const AnnealConfig& cfg, std::span<const Circuit> samples) {
  long prop = 0, acc = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    AnnealConfig c = cfg;
    c.seed = cfg.seed + i;
    c.record_trace = false;
    const AnnealResult r = anneal(samples[i], c);
    prop += r.proposals;
    acc += r.accepted;
  }
  return prop ? static_cast<double>(acc) / prop : 0.0;
}

}  // namespace

TuneResult tune_acceptance(const AnnealConfig& cfg, std::span<const Circuit> samples, const TuneConfig& tune) {
  if (samples.size() < 10) throw Error(Errc::TuningFailed, "need at least 10 sample circuits");
  temperature_at(cfg, 0);
  samples = samples.first(std::min<std::size_t>(samples.size(), std::max(10, tune.max_samples)));

  AnnealConfig pilot = cfg;
  pilot.steps = std::min(cfg.steps, tune.pilot_steps);
  const double ratio = cfg.t_end / cfg.t_start;
  const double target = 0.5 * (tune.min_acceptance + tune.max_acceptance);
  const double slack = 0.25 * (tune.max_acceptance - tune.min_acceptance);

  auto measure = [&](double log_t) {
    pilot.t_start = std::exp(log_t);
    pilot.t_end = pilot.t_start * ratio;
    return pilot_acceptance(pilot, samples);
  };

  // Bracket the target in log(t_start), then bisect.
  double lo = std::log(cfg.t_start), hi = lo;
  double acc = measure(lo);
  TuneResult best{cfg, acc, 1};
  auto in_band = [&](double a) { return a >= tune.min_acceptance && a <= tune.max_acceptance; };
  auto consider = [&](double log_t, double a) {
    if (in_band(a) && (!in_band(best.acceptance) || std::abs(a - target) < std::abs(best.acceptance - target))) {
      best.config.t_start = std::exp(log_t);
      best.config.t_end = best.config.t_start * ratio;
      best.acceptance = a;
    }
  };
  consider(lo, acc);
  int it = 1;
  if (acc > target) {
    while (it < tune.max_iterations) {
      lo -= std::log(4.0);
      const double a = measure(lo);
      ++it;
      consider(lo, a);
      if (a <= target) break;
      hi = lo;
    }
  } else {
    while (it < tune.max_iterations) {
      hi += std::log(4.0);
      const double a = measure(hi);
      ++it;
      consider(hi, a);
      if (a >= target) break;
      lo = hi;
    }
  }
  while (it < tune.max_iterations && !(in_band(best.acceptance) && std::abs(best.acceptance - target) <= slack)) {
    const double mid = 0.5 * (lo + hi);
    const double a = measure(mid);
    ++it;
    consider(mid, a);
    (a > target ? hi : lo) = mid;
  }
  best.iterations = it;
  if (!in_band(best.acceptance)) {
    throw Error(Errc::TuningFailed, "acceptance " + std::to_string(best.acceptance) + " outside band after " +
                                        std::to_string(it) + " pilot rounds");
  }
  return best;
}

}  // namespace qcopt
