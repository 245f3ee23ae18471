#include "qcopt/gate.hpp"

#include <cmath>
#include <sstream>

namespace qcopt {

double canonical_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool angle_near(double radians, double target, double tol) {
  double d = canonical_angle(radians - target);
  return d < tol || kTwoPi - d < tol;
}

Gate zrot(int qubit, double theta) { return ZRot{qubit, canonical_angle(theta)}; }

Gate phased_x(int qubit, double axis_phase, double angle) {
  return PhasedX{qubit, canonical_angle(axis_phase), canonical_angle(angle)};
}

Gate cnot(int control, int target) { return CNot{control, target}; }

Gate canonicalized(const Gate& g) {
  if (const auto* z = std::get_if<ZRot>(&g)) return zrot(z->qubit, z->theta);
  if (const auto* x = std::get_if<PhasedX>(&g)) return phased_x(x->qubit, x->axis_phase, x->angle);
  return g;
}

GateQubits qubits_of(const Gate& g) {
  GateQubits out;
  if (const auto* c = std::get_if<CNot>(&g)) {
    out.q = {std::min(c->control, c->target), std::max(c->control, c->target)};
    out.size = 2;
  } else if (const auto* z = std::get_if<ZRot>(&g)) {
    out.q = {z->qubit, 0};
    out.size = 1;
  } else {
    out.q = {std::get<PhasedX>(g).qubit, 0};
    out.size = 1;
  }
  return out;
}

int min_qubit(const Gate& g) { return qubits_of(g).q[0]; }

bool acts_on(const Gate& g, int qubit) {
  for (int q : qubits_of(g)) {
    if (q == qubit) return true;
  }
  return false;
}

std::string to_string(const Gate& g) {
  std::ostringstream os;
  os.precision(6);
  if (const auto* z = std::get_if<ZRot>(&g)) {
    os << "ZRot(q" << z->qubit << ", " << z->theta << ")";
  } else if (const auto* x = std::get_if<PhasedX>(&g)) {
    os << "PhasedX(q" << x->qubit << ", " << x->axis_phase << ", " << x->angle << ")";
  } else {
    const auto& c = std::get<CNot>(g);
    os << "CNot(" << c.control << ", " << c.target << ")";
  }
  return os.str();
}

}  // namespace qcopt
