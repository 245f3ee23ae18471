#include "qcopt/env.hpp"

#include <algorithm>
#include <numbers>

#include "qcopt/error.hpp"

namespace qcopt {

double quality(const Circuit& c, const QualityWeights& w) {
  return w.alpha * c.depth() + w.beta * static_cast<double>(c.gate_count());
}

QualityFn weighted_quality(QualityWeights w) {
  return [w](const Circuit& c) { return quality(c, w); };
}

GateClass gate_class(const Gate& g) {
  constexpr double pi = std::numbers::pi;
  if (const auto* z = std::get_if<ZRot>(&g)) {
    if (angle_near(z->theta, pi / 2, kGateClassTol)) return GateClass::ZRotHalfPi;
    if (angle_near(z->theta, pi, kGateClassTol)) return GateClass::ZRotPi;
    if (angle_near(z->theta, 3 * pi / 2, kGateClassTol)) return GateClass::ZRotThreeHalfPi;
    return GateClass::ZRotGeneric;
  }
  if (const auto* x = std::get_if<PhasedX>(&g)) {
    const bool axis = angle_near(x->axis_phase, 0.0, kGateClassTol) || angle_near(x->axis_phase, pi, kGateClassTol);
    return axis && angle_near(x->angle, pi, kGateClassTol) ? GateClass::PhasedXFlip : GateClass::PhasedXGeneric;
  }
  const auto& c = std::get<CNot>(g);
  return c.control < c.target ? GateClass::CNotControlLow : GateClass::CNotTargetLow;
}

Observation encode_observation(const Circuit& c, int capacity) {
  Observation obs{c.num_qubits(), capacity, {}};
  obs.data.assign(static_cast<std::size_t>(c.num_qubits()) * capacity * kNumGateClasses, 0);
  for (GateId id = 0; id < c.gate_count(); ++id) {
    const int m = c.moment(id);
    if (m >= capacity) continue;
    const Gate& g = c.gate(id);
    const auto ch = static_cast<std::size_t>(gate_class(g));
    obs.data[(static_cast<std::size_t>(min_qubit(g)) * capacity + m) * kNumGateClasses + ch] = 1;
  }
  return obs;
}

ActionCell ActionMask::cell(std::size_t flat) const {
  ActionCell out;
  out.rule = static_cast<int>(flat % num_rules);
  flat /= num_rules;
  out.moment = static_cast<int>(flat % capacity);
  out.qubit = static_cast<int>(flat / capacity);
  return out;
}

bool ActionMask::allowed(const ActionCell& c) const {
  if (c.qubit < 0 || c.qubit >= num_qubits || c.moment < 0 || c.moment >= capacity || c.rule < 0 ||
      c.rule >= num_rules) {
    return false;
  }
  return bits[flat_index(c)] != 0;
}

std::size_t ActionMask::count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

std::vector<std::uint8_t> ActionMask::pack() const {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

ActionMask ActionMask::unpack(int num_qubits, int capacity, int num_rules, std::span<const std::uint8_t> packed) {
  ActionMask m{num_qubits, capacity, num_rules, {}};
  m.bits.resize(static_cast<std::size_t>(num_qubits) * capacity * num_rules);
  if (packed.size() < (m.bits.size() + 7) / 8) throw Error(Errc::Parse, "packed mask too short");
  for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return m;
}

Env::Env(const Circuit& start, EnvConfig cfg)
    : cfg_(std::move(cfg)), catalog_(cfg_.catalog ? cfg_.catalog : &RuleCatalog::standard()), state_(start) {
  if (!cfg_.quality) cfg_.quality = weighted_quality();
  capacity_ = cfg_.capacity > 0 ? cfg_.capacity : std::max(1, 2 * start.depth());
  if (start.depth() > capacity_) {
    throw Error(Errc::CapacityExceeded, "start depth " + std::to_string(start.depth()) + " exceeds capacity " +
                                            std::to_string(capacity_));
  }
  q_ = cfg_.quality(state_);
  refresh();
  done_ = cfg_.episode_length <= 0 || soft_.empty();
}

Env Env::reset(const Circuit& start, int episode_length, int capacity) {
  EnvConfig cfg;
  cfg.episode_length = episode_length;
  cfg.capacity = capacity;
  return Env(start, std::move(cfg));
}

void Env::refresh() {
  obs_ = encode_observation(state_, capacity_);
  const int nr = num_rules();
  mask_ = ActionMask{state_.num_qubits(), capacity_, nr, {}};
  mask_.bits.assign(static_cast<std::size_t>(state_.num_qubits()) * capacity_ * nr, 0);
  cell_to_index_.assign(mask_.bits.size(), -1);
  soft_ = enumerate_transformations(state_, KindFilter::Soft, *catalog_);
  for (std::size_t i = 0; i < soft_.size(); ++i) {
    const ActionCell cell = transformation_to_action(soft_[i]);
    if (cell.moment >= capacity_) continue;
    const std::size_t flat = mask_.flat_index(cell);
    if (cell_to_index_[flat] >= 0) {
      throw Error(Errc::InjectivityViolation, "two transformations map onto one action cell");
    }
    cell_to_index_[flat] = static_cast<std::int32_t>(i);
    mask_.bits[flat] = 1;
  }
}

StepInfo Env::info() const {
  return {state_.depth(), state_.gate_count(), q_, overflow_, soft_.empty()};
}

ActionCell Env::transformation_to_action(const Transformation& t) const {
  const int ch = catalog_->soft_channel(t.rule);
  if (ch < 0) throw Error(Errc::MaskedAction, "hard transformations have no action cell");
  return {t.locus.qubit, t.locus.moment, ch};
}

const Transformation& Env::action_to_transformation(const ActionCell& cell) const {
  if (!mask_.allowed(cell)) {
    throw Error(Errc::MaskedAction, "no transformation at (" + std::to_string(cell.qubit) + ", " +
                                        std::to_string(cell.moment) + ", " + std::to_string(cell.rule) + ")");
  }
  return soft_[static_cast<std::size_t>(cell_to_index_[mask_.flat_index(cell)])];
}

StepOutcome Env::step(const ActionCell& cell) {
  if (done_) throw Error(Errc::MaskedAction, "episode is over");
  const Transformation& t = action_to_transformation(cell);
  Circuit next = prune(apply(state_, t), *catalog_);
  const double next_q = cfg_.quality(next);
  StepOutcome out;
  out.reward = q_ - next_q;
  state_ = std::move(next);
  q_ = next_q;
  ++steps_;
  overflow_ = state_.depth() > capacity_;
  if (overflow_) {
    out.penalty = -q_;
    out.reward += out.penalty;
  }
  refresh();
  done_ = overflow_ || steps_ >= cfg_.episode_length || soft_.empty();
  out.done = done_;
  out.observation = obs_;
  out.info = info();
  return out;
}

}  // namespace qcopt
