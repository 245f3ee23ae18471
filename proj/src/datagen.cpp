#include "qcopt/datagen.hpp"

#include <complex>
#include <random>

#include "qcopt/error.hpp"
#include "qcopt/unitary.hpp"

namespace qcopt {
namespace {

// Haar-random element of SU(2) from a uniformly random unit quaternion.
Matrix2 haar_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  double v[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  const std::complex<double> a(v[0] / norm, v[1] / norm);
  const std::complex<double> b(v[2] / norm, v[3] / norm);
  Matrix2 u;
  u << a, -std::conj(b), b, std::conj(a);
  return u;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finaliser over the combined input
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Circuit random_circuit(const GenConfig& cfg) {
  if (cfg.num_qubits < 2) throw Error(Errc::InvalidCircuit, "random circuits need at least 2 qubits");
  if (cfg.num_logical_gates < 0) throw Error(Errc::InvalidCircuit, "negative gate count");
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution pick_cnot(cfg.cnot_probability);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> pair(0, cfg.num_qubits - 2);
  std::uniform_int_distribution<int> qubit(0, cfg.num_qubits - 1);
  std::vector<Gate> gates;
  for (int i = 0; i < cfg.num_logical_gates; ++i) {
    if (pick_cnot(rng)) {
      const int lo = pair(rng);
      gates.push_back(coin(rng) ? cnot(lo, lo + 1) : cnot(lo + 1, lo));
    } else {
      const int q = qubit(rng);
      for (auto& g : resynthesize_1q(haar_su2(rng), q)) gates.push_back(g);
    }
  }
  return Circuit(cfg.num_qubits, std::move(gates));
}

ExpandResult expand(const Circuit& c, int steps, std::uint64_t seed, const RuleCatalog& catalog) {
  ExpandResult res{c, 0, false, {}};
  std::mt19937_64 rng(seed);
  for (int s = 0; s < steps; ++s) {
    const auto soft = enumerate_transformations(res.circuit, KindFilter::Soft, catalog);
    if (soft.empty()) {
      res.exhausted = true;
      break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, soft.size() - 1);
    const Transformation& t = soft[pick(rng)];
    res.log.push_back({t.rule, t.locus});
    res.circuit = prune(apply(res.circuit, t), catalog);
    ++res.steps_done;
  }
  return res;
}

Circuit make_episode(const GenConfig& cfg, std::uint64_t index) {
  GenConfig gen = cfg;
  gen.seed = derive_seed(cfg.seed, 2 * index);
  const Circuit pruned = prune(random_circuit(gen));
  if (cfg.expansion_steps <= 0) return pruned;
  return expand(pruned, cfg.expansion_steps, derive_seed(cfg.seed, 2 * index + 1)).circuit;
}

std::optional<Circuit> EpisodeStream::next() {
  if (index_ >= count_) return std::nullopt;
  return make_episode(cfg_, index_++);
}

}  // namespace qcopt
