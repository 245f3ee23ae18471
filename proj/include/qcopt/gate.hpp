#pragma once

#include <array>
#include <numbers>
#include <string>
#include <variant>

namespace qcopt {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi).
double canonical_angle(double radians);

/// True if `radians` lies within `tol` of `target` modulo 2pi.
bool angle_near(double radians, double target, double tol);

/// diag(1, e^{i theta})
struct ZRot {
  int qubit = 0;
  double theta = 0.0;
  bool operator==(const ZRot&) const = default;
};

/// Z(axis_phase) . Rx(angle) . Z(-axis_phase): a rotation about an axis in the XY plane.
struct PhasedX {
  int qubit = 0;
  double axis_phase = 0.0;
  double angle = 0.0;
  bool operator==(const PhasedX&) const = default;
};

struct CNot {
  int control = 0;
  int target = 1;
  bool operator==(const CNot&) const = default;
};

using Gate = std::variant<ZRot, PhasedX, CNot>;

Gate zrot(int qubit, double theta);
Gate phased_x(int qubit, double axis_phase, double angle);
Gate cnot(int control, int target);

/// Returns the gate with all angles reduced into [0, 2pi).
Gate canonicalized(const Gate& g);

/// Qubits a gate acts on, in ascending order.
struct GateQubits {
  std::array<int, 2> q{};
  int size = 0;
  const int* begin() const { return q.data(); }
  const int* end() const { return q.data() + size; }
};

GateQubits qubits_of(const Gate& g);
int min_qubit(const Gate& g);
bool acts_on(const Gate& g, int qubit);

inline bool is_zrot(const Gate& g) { return std::holds_alternative<ZRot>(g); }
inline bool is_phased_x(const Gate& g) { return std::holds_alternative<PhasedX>(g); }
inline bool is_cnot(const Gate& g) { return std::holds_alternative<CNot>(g); }
inline bool is_single_qubit(const Gate& g) { return !is_cnot(g); }

/// Moves a gate onto other qubit indices: `map[old] = new`.
template <typename Map>
Gate relabeled(const Gate& g, const Map& map) {
  return std::visit(
      [&](const auto& x) -> Gate {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CNot>) {
          return CNot{map[x.control], map[x.target]};
        } else {
          T y = x;
          y.qubit = map[x.qubit];
          return y;
        }
      },
      g);
}

std::string to_string(const Gate& g);

}  // namespace qcopt
