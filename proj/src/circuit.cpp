#include "qcopt/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <numeric>

#include "qcopt/error.hpp"

namespace qcopt {
namespace {

void validate(int num_qubits, const Gate& g) {
  auto in_range = [&](int q) { return q >= 0 && q < num_qubits; };
  if (const auto* c = std::get_if<CNot>(&g)) {
    if (!in_range(c->control) || !in_range(c->target)) {
      throw Error(Errc::InvalidCircuit, "qubit index out of range in " + to_string(g));
    }
    if (c->control == c->target) {
      throw Error(Errc::InvalidCircuit, "CNot control equals target");
    }
    if (std::abs(c->control - c->target) != 1) {
      throw Error(Errc::InvalidCircuit,
                  "connectivity violation: " + to_string(g) + " is not nearest-neighbour");
    }
  } else if (!in_range(min_qubit(g))) {
    throw Error(Errc::InvalidCircuit, "qubit index out of range in " + to_string(g));
  }
}

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

Schedule schedule_asap(int num_qubits, std::span<const Gate> gates) {
  Schedule s;
  s.moment_of.resize(gates.size());
  std::vector<int> free_at(static_cast<std::size_t>(std::max(num_qubits, 0)), 0);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    int m = 0;
    for (int q : qubits_of(gates[i])) m = std::max(m, free_at[q]);
    for (int q : qubits_of(gates[i])) free_at[q] = m + 1;
    s.moment_of[i] = m;
    s.depth = std::max(s.depth, m + 1);
  }
  return s;
}

Schedule schedule_asap(const Circuit& c) { return schedule_asap(c.num_qubits(), c.gates()); }

Circuit::Circuit(int num_qubits) : Circuit(num_qubits, {}) {}

Circuit::Circuit(int num_qubits, std::vector<Gate> gates) : num_qubits_(num_qubits) {
  if (num_qubits < 0) throw Error(Errc::InvalidCircuit, "negative qubit count");
  for (auto& g : gates) {
    g = canonicalized(g);
    validate(num_qubits, g);
  }
  const Schedule s = schedule_asap(num_qubits, gates);
  depth_ = s.depth;

  std::vector<std::size_t> order(gates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s.moment_of[a] != s.moment_of[b]) return s.moment_of[a] < s.moment_of[b];
    return min_qubit(gates[a]) < min_qubit(gates[b]);
  });

  gates_.reserve(gates.size());
  moments_.reserve(gates.size());
  wires_.assign(static_cast<std::size_t>(num_qubits), {});
  cells_.assign(static_cast<std::size_t>(num_qubits) * static_cast<std::size_t>(depth_), -1);
  Fnv1a hash;
  hash.add(static_cast<std::uint64_t>(num_qubits));
  for (std::size_t idx : order) {
    const auto id = static_cast<GateId>(gates_.size());
    const Gate& g = gates[idx];
    const int m = s.moment_of[idx];
    gates_.push_back(g);
    moments_.push_back(m);
    for (int q : qubits_of(g)) {
      wires_[q].push_back(id);
      cells_[static_cast<std::size_t>(q) * depth_ + m] = static_cast<std::int32_t>(id);
    }
    hash.add(static_cast<std::uint64_t>(g.index()));
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, CNot>) {
            hash.add(static_cast<std::uint64_t>(x.control));
            hash.add(static_cast<std::uint64_t>(x.target));
          } else if constexpr (std::is_same_v<T, ZRot>) {
            hash.add(static_cast<std::uint64_t>(x.qubit));
            hash.add(x.theta);
          } else {
            hash.add(static_cast<std::uint64_t>(x.qubit));
            hash.add(x.axis_phase);
            hash.add(x.angle);
          }
        },
        g);
  }
  fingerprint_ = hash.value();
}

std::span<const GateId> Circuit::wire(int qubit) const { return wires_.at(static_cast<std::size_t>(qubit)); }

std::optional<GateId> Circuit::gate_at(int qubit, int moment) const {
  if (qubit < 0 || qubit >= num_qubits_ || moment < 0 || moment >= depth_) return std::nullopt;
  const std::int32_t id = cells_[static_cast<std::size_t>(qubit) * depth_ + moment];
  if (id < 0) return std::nullopt;
  return static_cast<GateId>(id);
}

int Circuit::position_on_wire(GateId id, int qubit) const {
  const auto& w = wires_[static_cast<std::size_t>(qubit)];
  const int m = moments_[id];
  auto it = std::lower_bound(w.begin(), w.end(), m,
                             [&](GateId g, int moment) { return moments_[g] < moment; });
  if (it == w.end() || *it != id) return -1;
  return static_cast<int>(it - w.begin());
}

std::optional<GateId> Circuit::next_on_wire(GateId id, int qubit) const {
  const int pos = position_on_wire(id, qubit);
  const auto& w = wires_[static_cast<std::size_t>(qubit)];
  if (pos < 0 || pos + 1 >= static_cast<int>(w.size())) return std::nullopt;
  return w[static_cast<std::size_t>(pos) + 1];
}

std::optional<GateId> Circuit::prev_on_wire(GateId id, int qubit) const {
  const int pos = position_on_wire(id, qubit);
  if (pos <= 0) return std::nullopt;
  return wires_[static_cast<std::size_t>(qubit)][static_cast<std::size_t>(pos) - 1];
}

Circuit Circuit::appended(const Gate& g) const {
  std::vector<Gate> gs(gates_.begin(), gates_.end());
  gs.push_back(g);
  return Circuit(num_qubits_, std::move(gs));
}

}  // namespace qcopt
