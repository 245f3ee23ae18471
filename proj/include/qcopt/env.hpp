#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qcopt/circuit.hpp"
#include "qcopt/rules.hpp"

namespace qcopt {

struct QualityWeights {
  double alpha = 1.0;  // per moment
  double beta = 0.2;   // per gate
};

/// alpha * depth + beta * gate count; lower is better.
double quality(const Circuit& c, const QualityWeights& w = {});

/// Any circuit-to-scalar cost can stand in for `quality`.
using QualityFn = std::function<double(const Circuit&)>;
QualityFn weighted_quality(QualityWeights w = {});

// Observation channels.
enum class GateClass : std::uint8_t {
  ZRotHalfPi = 0,
  ZRotPi,
  ZRotThreeHalfPi,
  ZRotGeneric,
  PhasedXFlip,  // axis 0 or pi, angle pi
  PhasedXGeneric,
  CNotControlLow,
  CNotTargetLow,
};
inline constexpr int kNumGateClasses = 8;
inline constexpr double kGateClassTol = 1e-6;

GateClass gate_class(const Gate& g);

/// One-hot grid, row-major (qubit, moment, channel). Moments >= depth are zero.
struct Observation {
  int num_qubits = 0;
  int capacity = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int qubit, int moment, int channel) const {
    return data[(static_cast<std::size_t>(qubit) * capacity + moment) * kNumGateClasses + channel];
  }
  /// Flat 8-bit layout, identical to `data`.
  std::span<const std::uint8_t> bytes() const { return data; }
};

Observation encode_observation(const Circuit& c, int capacity);

struct ActionCell {
  int qubit = 0;
  int moment = 0;
  int rule = 0;  // soft-rule channel
  auto operator<=>(const ActionCell&) const = default;
};

/// Legal-action grid, row-major (qubit, moment, rule channel).
struct ActionMask {
  int num_qubits = 0;
  int capacity = 0;
  int num_rules = 0;
  std::vector<std::uint8_t> bits;  // one byte per cell, 0 or 1

  std::size_t size() const { return bits.size(); }
  std::size_t flat_index(const ActionCell& cell) const {
    return (static_cast<std::size_t>(cell.qubit) * capacity + cell.moment) * num_rules + cell.rule;
  }
  ActionCell cell(std::size_t flat) const;
  bool allowed(const ActionCell& cell) const;
  std::size_t count() const;

  /// 1 bit per cell, cell i at bit (i % 8) of byte i / 8.
  std::vector<std::uint8_t> pack() const;
  static ActionMask unpack(int num_qubits, int capacity, int num_rules, std::span<const std::uint8_t> packed);
};

struct EnvConfig {
  int episode_length = 250;
  int capacity = 0;  // 0: twice the start depth
  QualityFn quality;  // empty: weighted_quality()
  const RuleCatalog* catalog = nullptr;  // null: standard catalog
};

struct StepInfo {
  int depth = 0;
  std::size_t gate_count = 0;
  double q = 0.0;
  bool overflow = false;  // depth exceeded the moment capacity
  bool stuck = false;     // no soft transformation left
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;   // q(previous) - q(next), plus `penalty`
  double penalty = 0.0;  // -q(next) on overflow, else 0
  bool done = false;
  StepInfo info;
};

/// Single-actor optimisation episode over soft transformations.
class Env {
 public:
  /// Throws Error(CapacityExceeded) if depth(start) exceeds the capacity.
  Env(const Circuit& start, EnvConfig cfg);
  static Env reset(const Circuit& start, int episode_length, int capacity);

  const Circuit& state() const { return state_; }
  const Observation& observation() const { return obs_; }
  const ActionMask& mask() const { return mask_; }
  std::span<const Transformation> soft_transformations() const { return soft_; }
  int num_qubits() const { return state_.num_qubits(); }
  int capacity() const { return capacity_; }
  int num_rules() const { return static_cast<int>(catalog_->soft_rules().size()); }
  int steps_taken() const { return steps_; }
  int episode_length() const { return cfg_.episode_length; }
  bool done() const { return done_; }
  double q() const { return q_; }
  double quality_of(const Circuit& c) const { return cfg_.quality(c); }
  StepInfo info() const;

  /// Throws Error(MaskedAction) for a cell without a transformation.
  StepOutcome step(const ActionCell& cell);

  const Transformation& action_to_transformation(const ActionCell& cell) const;
  ActionCell transformation_to_action(const Transformation& t) const;

 private:
  void refresh();

  EnvConfig cfg_;
  const RuleCatalog* catalog_;
  Circuit state_;
  int capacity_ = 0;
  int steps_ = 0;
  bool done_ = false;
  bool overflow_ = false;
  double q_ = 0.0;
  Observation obs_;
  ActionMask mask_;
  std::vector<Transformation> soft_;
  std::vector<std::int32_t> cell_to_index_;
};

}  // namespace qcopt
