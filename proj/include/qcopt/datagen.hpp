#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcopt/circuit.hpp"
#include "qcopt/rules.hpp"

namespace qcopt {

struct GenConfig {
  int num_qubits = 12;
  int num_logical_gates = 150;
  std::uint64_t seed = 0;
  int expansion_steps = 500;
  double cnot_probability = 0.9;
};

/// Mixes a master seed and an index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Random logical gates lowered onto the hardware gate set. Deterministic per seed.
Circuit random_circuit(const GenConfig& cfg);

struct ExpandResult {
  Circuit circuit;
  int steps_done = 0;
  bool exhausted = false;  // ran out of soft transformations
  std::vector<StepRecord> log;
};

/// `steps` rounds of: uniformly random soft transformation, then prune.
ExpandResult expand(const Circuit& c, int steps, std::uint64_t seed,
                    const RuleCatalog& catalog = RuleCatalog::standard());

/// generate -> prune -> expand for episode `index` of a stream.
Circuit make_episode(const GenConfig& cfg, std::uint64_t index);

/// Lazily yields `count` pipeline outputs with per-episode seeds derived from cfg.seed.
class EpisodeStream {
 public:
  EpisodeStream(GenConfig cfg, std::uint64_t count) : cfg_(cfg), count_(count) {}
  std::optional<Circuit> next();
  std::uint64_t produced() const { return index_; }

 private:
  GenConfig cfg_;
  std::uint64_t count_;
  std::uint64_t index_ = 0;
};

}  // namespace qcopt
