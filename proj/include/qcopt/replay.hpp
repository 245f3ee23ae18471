#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcopt/circuit.hpp"
#include "qcopt/rules.hpp"
#include "qcopt/unitary.hpp"

namespace qcopt {

/// Soft steps (each followed by prune) leading away from `start`.
/// JSON: {"start": circuit, "steps": [{"rule", "moment", "qubit"}], "final": circuit?}
struct TransformationLog {
  Circuit start;
  std::vector<StepRecord> steps;
  std::optional<Circuit> final;
};

nlohmann::json to_json(const TransformationLog& log, const RuleCatalog& catalog = RuleCatalog::standard());
TransformationLog log_from_json(const nlohmann::json& j, const RuleCatalog& catalog = RuleCatalog::standard());
void save_log(const TransformationLog& log, const std::filesystem::path& path);
TransformationLog load_log(const std::filesystem::path& path);

enum class FullCheck { Pass, Fail, Skipped };

struct ReplayReport {
  std::size_t steps = 0;
  std::size_t local_checks = 0;  // soft and hard applications checked
  std::size_t violations = 0;
  FullCheck full = FullCheck::Skipped;
  std::optional<bool> final_matches;
  Circuit end;
  std::vector<std::string> messages;

  bool ok() const { return violations == 0 && full != FullCheck::Fail && final_matches.value_or(true); }
};

/// Re-applies every step with verify_local on it and on each pruning
/// application, then compares full unitaries if the circuit fits `cap`.
ReplayReport replay_log(const TransformationLog& log, const RuleCatalog& catalog = RuleCatalog::standard(),
                        int cap = kDefaultUnitaryCap);

}  // namespace qcopt
