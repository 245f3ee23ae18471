#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "qcopt/env.hpp"
#include "qcopt/net.hpp"

namespace qcopt {

struct TrajectoryStep {
  Observation observation;
  ActionMask mask;
  std::size_t action = 0;  // flat (qubit, moment, rule) index
  double reward = 0.0;
  double value = 0.0;     // V(s_t) at collection time
  double log_prob = 0.0;  // at collection time
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double terminal_value = 0.0;  // V(s_T); 0 when s_T is terminal
  // episode summary
  double start_q = 0.0;
  double final_q = 0.0;
  int final_depth = 0;
  std::size_t final_gate_count = 0;
  bool overflow = false;

  double total_reward() const;
};

struct ReturnsAdvantages {
  std::vector<double> returns;     // discounted suffix sums
  std::vector<double> advantages;  // r_t + gamma V(s_{t+1}) - V(s_t)
};

ReturnsAdvantages returns_and_advantages(const Trajectory& traj, double gamma);

struct TrainConfig {
  double gamma = 0.99;
  double value_coef = 0.5;  // lambda
  double clip = 0.2;        // epsilon
  double learning_rate = 1e-3;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  int episodes_per_epoch = 32;
  int epochs = 200;
  int ppo_epochs = 4;  // gradient passes per batch
  int minibatches = 1;  // shuffled episode groups per pass, one step each
  std::uint64_t seed = 0;
  int jobs = 1;
  // Adam; plain gradient ascent when use_adam is false
  bool use_adam = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

/// Per-step targets for a batch, advantages normalised if configured.
std::vector<ReturnsAdvantages> prepare_targets(std::span<const Trajectory> batch, const TrainConfig& cfg);

struct LossReport {
  double objective = 0.0;  // surrogate - lambda * value loss (+ entropy bonus)
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  std::size_t steps = 0;
};

/// Mean clipped surrogate minus lambda times the mean squared value error.
/// If `grad` is given it receives dObjective/dtheta.
LossReport ppo_objective(const PolicyValueNet& net, std::span<const Trajectory> batch,
                         std::span<const ReturnsAdvantages> targets, const TrainConfig& cfg,
                         std::vector<double>* grad);

/// cfg.ppo_epochs ascent steps on the objective. Throws Error(NonfiniteLoss).
LossReport ppo_update(PolicyValueNet& net, AdamState& opt, std::span<const Trajectory> batch,
                      const TrainConfig& cfg);

enum class SampleMode { Stochastic, Greedy, Uniform };

std::size_t sample_action(std::span<const double> probs, SampleMode mode, std::mt19937_64& rng);

/// One episode in `env`. `net` may be null only for SampleMode::Uniform.
/// `visit` sees every state after each step.
Trajectory rollout(const PolicyValueNet* net, Env& env, SampleMode mode, std::mt19937_64& rng,
                   const std::function<void(const Env&, const StepRecord&)>& visit = {});

struct EpisodeSettings {
  int episode_length = 250;
  int capacity = 0;  // 0: twice the start depth
  QualityFn quality;
};

using EpisodeSource = std::function<Circuit(std::uint64_t index)>;

struct EpochStats {
  int epoch = 0;
  double mean_d = 0.0;
  double mean_n = 0.0;
  double mean_q = 0.0;
  double mean_return = 0.0;
  int overflows = 0;
  LossReport loss;
};

struct TrainResult {
  std::vector<EpochStats> curve;
};

/// Collects cfg.episodes_per_epoch fresh episodes per epoch with the current
/// stochastic policy and runs ppo_update on them.
TrainResult train(PolicyValueNet& net, const EpisodeSource& source, const EpisodeSettings& env,
                  const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch = {});

struct EvalResult {
  std::vector<double> final_q;
  std::vector<double> returns;
  int overflows = 0;
};

/// Runs one episode per circuit; episode i uses seed derive_seed(seed, i).
EvalResult evaluate(const PolicyValueNet* net, std::span<const Circuit> starts, const EpisodeSettings& env,
                    SampleMode mode, std::uint64_t seed, int jobs = 1);

struct OptimizeResult {
  Circuit start;  // pruned input, the first visited state
  Circuit best;
  double best_q = 0.0;
  std::vector<StepRecord> log;  // steps from `start` to `best`
};

/// Best state over all steps of `attempts` episodes. With `greedy` the first
/// attempt takes argmax actions.
OptimizeResult optimize(const PolicyValueNet& net, const Circuit& c, int episode_length, int attempts, bool greedy,
                        std::uint64_t seed, int capacity = 0);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace qcopt
