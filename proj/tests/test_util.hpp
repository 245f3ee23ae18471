#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qcopt/circuit.hpp"
#include "qcopt/unitary.hpp"

namespace qcopt::fixtures {

inline constexpr double kPi = std::numbers::pi;

/// Haar 2x2 unitary times a random global phase.
inline Matrix2 haar2(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  double a = nd(rng), b = nd(rng), c = nd(rng), d = nd(rng);
  const double n = std::sqrt(a * a + b * b + c * c + d * d);
  a /= n, b /= n, c /= n, d /= n;
  const std::complex<double> alpha(a, b), beta(c, d);
  Matrix2 u;
  u << alpha, -std::conj(beta), beta, std::conj(alpha);
  const double ph = std::uniform_real_distribution<double>(0, 2 * kPi)(rng);
  return std::polar(1.0, ph) * u;
}

/// Random gates biased towards special angles so every rule fires.
inline Circuit mixed_circuit(int nq, int ng, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const double specials[] = {0.0, kPi / 2, kPi, 3 * kPi / 2};
  std::vector<Gate> gates;
  for (int i = 0; i < ng; ++i) {
    const int kind = pick(10);
    if (kind < 4 && nq > 1) {
      const int a = pick(nq - 1);
      gates.push_back(pick(2) ? cnot(a, a + 1) : cnot(a + 1, a));
    } else if (kind < 7) {
      gates.push_back(zrot(pick(nq), pick(2) ? specials[pick(4)] : ang(rng)));
    } else {
      const double axis = pick(2) ? (pick(2) ? 0.0 : kPi) : ang(rng);
      const double angle = pick(2) ? (pick(2) ? kPi : kPi / 2) : ang(rng);
      gates.push_back(phased_x(pick(nq), axis, angle));
    }
  }
  return Circuit(nq, std::move(gates));
}

}  // namespace qcopt::fixtures
