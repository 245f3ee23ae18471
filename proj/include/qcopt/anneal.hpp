#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcopt/circuit.hpp"
#include "qcopt/env.hpp"
#include "qcopt/rules.hpp"

namespace qcopt {

struct AnnealConfig {
  int steps = 20000;
  double t_start = 1.0;
  double t_end = 0.01;
  std::uint64_t seed = 0;
  bool record_trace = true;
  QualityFn quality;  // empty: weighted_quality()
  const RuleCatalog* catalog = nullptr;
};

/// t_start * (t_end / t_start)^(k / steps). Throws DomainError on a bad config.
double temperature_at(const AnnealConfig& cfg, int k);

/// Metropolis probability: 1 for dq <= 0, exp(-dq / T) otherwise.
double acceptance_probability(double dq, double temperature);

struct AnnealTraceRow {
  int step = 0;
  double temperature = 0.0;
  double q = 0.0;  // current state after the step
  int depth = 0;
  std::size_t gate_count = 0;
  bool accepted = false;
  double best_q = 0.0;
};

struct AnnealResult {
  Circuit best;
  double best_q = 0.0;
  int best_step = -1;  // -1: the start circuit
  std::vector<AnnealTraceRow> trace;
  std::vector<StepRecord> log;  // accepted moves leading from the start to `best`
  int proposals = 0;
  int accepted = 0;
  bool exhausted = false;  // no soft transformation at some state

  double acceptance_fraction() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

AnnealResult anneal(const Circuit& c, const AnnealConfig& cfg);

struct TuneConfig {
  double min_acceptance = 0.10;
  double max_acceptance = 0.25;
  int pilot_steps = 2000;  // schedule compressed to this many steps
  int max_iterations = 24;
  int max_samples = 10;
};

struct TuneResult {
  AnnealConfig config;
  double acceptance = 0.0;
  int iterations = 0;
};

/// Rescales t_start and t_end (keeping their ratio) by bisection on a log
/// scale until pilot acceptance lies in the band. Throws TuningFailed.
TuneResult tune_acceptance(const AnnealConfig& cfg, std::span<const Circuit> samples, const TuneConfig& tune = {});

}  // namespace qcopt
