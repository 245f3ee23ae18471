#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "qcopt/circuit.hpp"

namespace qcopt {

enum class RuleKind { Hard, Soft };

/// Grid location of a transformation: single-gate rules anchor at the gate's
/// (moment, smallest qubit); two-gate rules at the first gate's moment and the
/// smallest qubit shared by both gates.
struct Locus {
  int moment = 0;
  int qubit = 0;
  auto operator<=>(const Locus&) const = default;
};

struct Match {
  Locus locus;
  std::vector<GateId> affected;   // time order
  std::vector<Gate> replacement;  // time order, acting only on the affected wires
};

/// A local rewrite rule. Implementations report every instance whose first
/// affected gate is a given gate.
class Rule {
 public:
  virtual ~Rule() = default;
  virtual std::string_view name() const = 0;
  virtual RuleKind kind() const = 0;
  virtual void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const = 0;
};

/// Indices of the built-in rules inside RuleCatalog::standard().
enum StandardRule : std::size_t {
  H1_drop_identity = 0,
  H2_merge_1q,
  H4_cancel_cnot_pair,
  S1_commute_zrot_through_control,
  S2_commute_xlike_through_target,
  S3_exchange_cnots_shared_wire,
  S5_move_zrot_across_phasedx,
  S6_reverse_cnot,
};

/// Ordered rule set; a rule's index is its id and fixes enumeration order.
class RuleCatalog {
 public:
  static const RuleCatalog& standard();

  RuleCatalog() = default;
  RuleCatalog(RuleCatalog&&) = default;
  RuleCatalog& operator=(RuleCatalog&&) = default;

  std::size_t add(std::unique_ptr<Rule> rule);
  std::size_t size() const { return rules_.size(); }
  const Rule& rule(std::size_t id) const { return *rules_.at(id); }
  /// Throws Error(NotApplicable) for an unknown name.
  std::size_t find(std::string_view name) const;

  std::span<const std::size_t> soft_rules() const { return soft_; }
  /// Position of a soft rule among soft_rules(); -1 for hard rules.
  int soft_channel(std::size_t id) const;

 private:
  std::vector<std::unique_ptr<Rule>> rules_;
  std::vector<std::size_t> soft_;
};

/// Catalog with every built-in rule registered in StandardRule order.
RuleCatalog make_standard_catalog();
std::unique_ptr<Rule> make_drop_identity_rule();
std::unique_ptr<Rule> make_merge_1q_rule();
std::unique_ptr<Rule> make_cancel_cnot_pair_rule();
std::unique_ptr<Rule> make_commute_zrot_through_control_rule();
std::unique_ptr<Rule> make_commute_xlike_through_target_rule();
std::unique_ptr<Rule> make_exchange_cnots_rule();
std::unique_ptr<Rule> make_move_zrot_across_phasedx_rule();
std::unique_ptr<Rule> make_reverse_cnot_rule();

/// Angle tolerance for rule applicability (identity detection, X-like axes).
inline constexpr double kRuleAngleTol = 1e-9;

struct Transformation {
  std::size_t rule = 0;
  Locus locus;
  std::vector<GateId> affected;
  std::vector<Gate> replacement;
  std::uint64_t circuit_fingerprint = 0;
};

enum class KindFilter { Hard, Soft, All };

/// Rule and locus of an applied transformation; enough to replay it.
struct StepRecord {
  std::size_t rule = 0;
  Locus locus;
};

/// Looks up the transformation of `rule` at `locus` among `ts`.
const Transformation* find_transformation(std::span<const Transformation> ts, std::size_t rule, Locus locus);

/// Every rule instance of the requested kinds, ordered by (rule id, moment,
/// qubit). Throws Error(InjectivityViolation) if two instances of one rule
/// share a locus.
std::vector<Transformation> enumerate_transformations(const Circuit& c, KindFilter filter,
                                                      const RuleCatalog& catalog = RuleCatalog::standard());

/// Throws Error(StaleTransformation) if `t` was enumerated on another circuit.
Circuit apply(const Circuit& c, const Transformation& t);

/// Compares the affected gates against their replacement on the union of
/// their wires.
bool verify_local(const Circuit& c, const Transformation& t, double tol = 1e-8);

/// Replaces the affected gates (contiguous on each wire) by `replacement`.
Circuit rewrite(const Circuit& c, std::span<const GateId> affected, std::span<const Gate> replacement);

using PruneObserver = std::function<void(const Circuit& before, const Transformation& t)>;

/// Applies hard transformations, first in enumeration order, until none is
/// left. `observer` sees every application.
Circuit prune(const Circuit& c, const RuleCatalog& catalog = RuleCatalog::standard(),
              const PruneObserver& observer = {});

}  // namespace qcopt
