#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcopt/gate.hpp"

namespace qcopt {

using GateId = std::uint32_t;

struct Schedule {
  std::vector<int> moment_of;  // indexed like the gate list it was computed from
  int depth = 0;
};

/// As-soon-as-possible moments for a gate list given in a valid time order.
Schedule schedule_asap(int num_qubits, std::span<const Gate> gates);

/// Immutable circuit on a 1D nearest-neighbour chain.
///
/// Gates are stored in canonical order: sorted by ASAP moment, then by the
/// smallest qubit index. Two circuits with the same gate DAG therefore compare
/// equal regardless of the linear order they were built from.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int num_qubits);
  /// `gates` must be in an order consistent with time on every wire. Throws
  /// Error(InvalidCircuit) on out-of-range qubits or non-adjacent CNots.
  Circuit(int num_qubits, std::vector<Gate> gates);

  int num_qubits() const { return num_qubits_; }
  std::span<const Gate> gates() const { return gates_; }
  const Gate& gate(GateId id) const { return gates_[id]; }
  std::size_t gate_count() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  int depth() const { return depth_; }
  int moment(GateId id) const { return moments_[id]; }
  std::span<const int> moments() const { return moments_; }

  /// Gate ids on one qubit line, in time order.
  std::span<const GateId> wire(int qubit) const;
  /// Gate occupying (qubit, moment), if any.
  std::optional<GateId> gate_at(int qubit, int moment) const;
  std::optional<GateId> next_on_wire(GateId id, int qubit) const;
  std::optional<GateId> prev_on_wire(GateId id, int qubit) const;

  /// Order-sensitive hash of the canonical gate list.
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// New circuit with `g` appended at the end of time.
  Circuit appended(const Gate& g) const;

  bool operator==(const Circuit& other) const {
    return num_qubits_ == other.num_qubits_ && gates_ == other.gates_;
  }

 private:
  int position_on_wire(GateId id, int qubit) const;

  int num_qubits_ = 0;
  int depth_ = 0;
  std::vector<Gate> gates_;
  std::vector<int> moments_;
  std::vector<std::vector<GateId>> wires_;
  std::vector<std::int32_t> cells_;  // qubit-major (qubit * depth + moment) -> gate id or -1
  std::uint64_t fingerprint_ = 0;
};

inline int depth(const Circuit& c) { return c.depth(); }
inline std::size_t gate_count(const Circuit& c) { return c.gate_count(); }
Schedule schedule_asap(const Circuit& c);

}  // namespace qcopt
