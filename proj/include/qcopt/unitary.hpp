#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcopt/circuit.hpp"

namespace qcopt {

using Unitary = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr int kDefaultUnitaryCap = 10;

Matrix2 zrot_matrix(double theta);
Matrix2 phased_x_matrix(double axis_phase, double angle);
/// Matrix of a single-qubit gate; throws NotApplicable for a CNot.
Matrix2 single_qubit_matrix(const Gate& g);

/// Dense unitary of a circuit. Qubit 0 is the most significant bit of the
/// basis index; gates multiply on the left in time order.
Unitary unitary_of(const Circuit& c, int cap = kDefaultUnitaryCap);

/// Same as unitary_of, for a raw gate list with no connectivity checks.
Unitary unitary_of_gates(int num_qubits, std::span<const Gate> gates, int cap = kDefaultUnitaryCap);

/// Left-multiplies `u` by the gate, in place.
void apply_gate(Unitary& u, int num_qubits, const Gate& g);

/// True iff some unit scalar c gives max|u - c v| < tol. c is fixed by the
/// ratio at the largest-magnitude entry of v.
bool equivalent_up_to_phase(const Unitary& u, const Unitary& v, double tol);

bool is_unitary(const Unitary& u, double tol = 1e-9);

/// Minimal canonical [ZRot][PhasedX] (time order) realising `u` up to phase.
/// Throws Error(NotUnitary).
std::vector<Gate> resynthesize_1q(const Matrix2& u, int qubit = 0);

/// e^{-m gamma_t} prod(u_k). Throws Error(DomainError) unless gamma_t >= 0 and 0 < u_k <= 1.
double success_probability(int num_qubits, double gamma_t, std::span<const double> gate_factors);

}  // namespace qcopt
