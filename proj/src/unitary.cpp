#include "qcopt/unitary.hpp"

#include <cmath>
#include <complex>

#include "qcopt/error.hpp"

namespace qcopt {
namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// Angles closer than this to 0 mod 2pi are dropped during synthesis.
constexpr double kSynthesisSnap = 1e-9;

double snap(double radians) {
  const double r = canonical_angle(radians);
  return (r < kSynthesisSnap || kTwoPi - r < kSynthesisSnap) ? 0.0 : r;
}

void check_cap(int num_qubits, int cap) {
  if (num_qubits > cap) {
    throw Error(Errc::QubitCapExceeded, std::to_string(num_qubits) + " qubits exceeds the dense unitary cap of " +
                                            std::to_string(cap));
  }
}

}  // namespace

Matrix2 zrot_matrix(double theta) {
  Matrix2 m;
  m << 1.0, 0.0, 0.0, std::exp(kI * theta);
  return m;
}

Matrix2 phased_x_matrix(double axis_phase, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Matrix2 m;
  m << c, -kI * std::exp(-kI * axis_phase) * s, -kI * std::exp(kI * axis_phase) * s, c;
  return m;
}

Matrix2 single_qubit_matrix(const Gate& g) {
  if (const auto* z = std::get_if<ZRot>(&g)) return zrot_matrix(z->theta);
  if (const auto* x = std::get_if<PhasedX>(&g)) return phased_x_matrix(x->axis_phase, x->angle);
  throw Error(Errc::NotApplicable, "CNot has no 2x2 matrix");
}

void apply_gate(Unitary& u, int num_qubits, const Gate& g) {
  const Eigen::Index dim = u.rows();
  if (const auto* c = std::get_if<CNot>(&g)) {
    const Eigen::Index cmask = Eigen::Index{1} << (num_qubits - 1 - c->control);
    const Eigen::Index tmask = Eigen::Index{1} << (num_qubits - 1 - c->target);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if ((i & cmask) && !(i & tmask)) u.row(i).swap(u.row(i | tmask));
    }
    return;
  }
  const Matrix2 m = single_qubit_matrix(g);
  const Eigen::Index mask = Eigen::Index{1} << (num_qubits - 1 - min_qubit(g));
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const Eigen::Index j = i | mask;
    for (Eigen::Index col = 0; col < u.cols(); ++col) {
      const cd a = u(i, col);
      const cd b = u(j, col);
      u(i, col) = m(0, 0) * a + m(0, 1) * b;
      u(j, col) = m(1, 0) * a + m(1, 1) * b;
    }
  }
}

Unitary unitary_of_gates(int num_qubits, std::span<const Gate> gates, int cap) {
  check_cap(num_qubits, cap);
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  Unitary u = Unitary::Identity(dim, dim);
  for (const auto& g : gates) apply_gate(u, num_qubits, g);
  return u;
}

Unitary unitary_of(const Circuit& c, int cap) { return unitary_of_gates(c.num_qubits(), c.gates(), cap); }

bool equivalent_up_to_phase(const Unitary& u, const Unitary& v, double tol) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) return false;
  if (u.size() == 0) return true;
  Eigen::Index r = 0, c = 0;
  const double vmax = v.cwiseAbs().maxCoeff(&r, &c);
  if (vmax == 0.0) return u.cwiseAbs().maxCoeff() < tol;
  cd phase = u(r, c) / v(r, c);
  const double mag = std::abs(phase);
  phase = mag > 0.0 ? phase / mag : cd{1.0, 0.0};
  return (u - phase * v).cwiseAbs().maxCoeff() < tol;
}

bool is_unitary(const Unitary& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Unitary d = u.adjoint() * u - Unitary::Identity(u.rows(), u.cols());
  return d.size() == 0 || d.cwiseAbs().maxCoeff() < tol;
}

std::vector<Gate> resynthesize_1q(const Matrix2& u, int qubit) {
  if ((u.adjoint() * u - Matrix2::Identity()).cwiseAbs().maxCoeff() > 1e-8) {
    throw Error(Errc::NotUnitary, "resynthesize_1q input is not unitary");
  }
  // u ~ PhasedX(phi, theta) . ZRot(lambda)
  //   = [[cos t/2, -i e^{i(lambda-phi)} sin t/2], [-i e^{i phi} sin t/2, e^{i lambda} cos t/2]]
  const double a = std::abs(u(0, 0));
  const double b = std::abs(u(1, 0));
  std::vector<Gate> out;
  if (b < kSynthesisSnap) {
    const double lambda = snap(std::arg(u(1, 1)) - std::arg(u(0, 0)));
    if (lambda != 0.0) out.push_back(zrot(qubit, lambda));
    return out;
  }
  if (a < kSynthesisSnap) {
    // theta = pi: any trailing ZRot folds into the axis phase
    const double phi = std::arg(u(1, 0) / u(0, 1)) / 2.0;
    out.push_back(phased_x(qubit, phi, std::numbers::pi));
    return out;
  }
  const double theta = 2.0 * std::atan2(b, a);
  const cd phase = u(0, 0) / a;
  const double phi = std::arg(kI * u(1, 0) / phase);
  const double lambda = snap(std::arg(u(1, 1) / phase));
  if (lambda != 0.0) out.push_back(zrot(qubit, lambda));
  out.push_back(phased_x(qubit, phi, theta));
  return out;
}

double success_probability(int num_qubits, double gamma_t, std::span<const double> gate_factors) {
  if (num_qubits < 0 || !(gamma_t >= 0.0)) {
    throw Error(Errc::DomainError, "success_probability needs m >= 0 and gamma_T >= 0");
  }
  double log_p = -static_cast<double>(num_qubits) * gamma_t;
  for (double u : gate_factors) {
    if (!(u > 0.0 && u <= 1.0)) throw Error(Errc::DomainError, "gate factor outside (0, 1]");
    log_p += std::log(u);
  }
  return std::exp(log_p);
}

}  // namespace qcopt
