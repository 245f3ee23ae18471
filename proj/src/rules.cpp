#include "qcopt/rules.hpp"

#include <algorithm>
#include <numbers>

#include "qcopt/error.hpp"
#include "qcopt/unitary.hpp"

namespace qcopt {
namespace {

constexpr double kPi = std::numbers::pi;

bool x_like_axis(const PhasedX& x) {
  return angle_near(x.axis_phase, 0.0, kRuleAngleTol) || angle_near(x.axis_phase, kPi, kRuleAngleTol);
}

class DropIdentity final : public Rule {
 public:
  std::string_view name() const override { return "H1_drop_identity"; }
  RuleKind kind() const override { return RuleKind::Hard; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const Gate& g = c.gate(first);
    bool identity = false;
    if (const auto* z = std::get_if<ZRot>(&g)) identity = angle_near(z->theta, 0.0, kRuleAngleTol);
    if (const auto* x = std::get_if<PhasedX>(&g)) identity = angle_near(x->angle, 0.0, kRuleAngleTol);
    if (identity) out.push_back({{c.moment(first), min_qubit(g)}, {first}, {}});
  }
};

// Merges two neighbouring single-qubit gates when that removes a gate. A
// PhasedX pair is also rewritten into canonical ZRot-then-PhasedX form, which
// keeps the gate count but lets the ZRot meet earlier rotations.
class Merge1q final : public Rule {
 public:
  std::string_view name() const override { return "H2_merge_1q"; }
  RuleKind kind() const override { return RuleKind::Hard; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const Gate& g = c.gate(first);
    if (!is_single_qubit(g)) return;
    const int q = min_qubit(g);
    const auto next = c.next_on_wire(first, q);
    if (!next || !is_single_qubit(c.gate(*next))) return;
    const Gate& h = c.gate(*next);
    std::vector<Gate> merged = resynthesize_1q(single_qubit_matrix(h) * single_qubit_matrix(g), q);
    if (merged.size() < 2 || (is_phased_x(g) && is_phased_x(h))) {
      out.push_back({{c.moment(first), q}, {first, *next}, std::move(merged)});
    }
  }
};

class CancelCnotPair final : public Rule {
 public:
  std::string_view name() const override { return "H4_cancel_cnot_pair"; }
  RuleKind kind() const override { return RuleKind::Hard; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const auto* cx = std::get_if<CNot>(&c.gate(first));
    if (cx == nullptr) return;
    const auto a = c.next_on_wire(first, cx->control);
    const auto b = c.next_on_wire(first, cx->target);
    if (a && b && *a == *b && c.gate(*a) == c.gate(first)) {
      out.push_back({{c.moment(first), std::min(cx->control, cx->target)}, {first, *a}, {}});
    }
  }
};

// Swaps a single-qubit gate with a CNot it commutes with on one shared wire.
// `wire_of` picks the CNot wire (control or target) and `commutes` the gates.
template <typename Single, typename WireOf, typename Commutes>
void match_single_through_cnot(const Circuit& c, GateId first, WireOf wire_of, Commutes commutes,
                               std::vector<Match>& out) {
  const Gate& g = c.gate(first);
  if (const auto* s = std::get_if<Single>(&g)) {
    if (!commutes(*s)) return;
    const auto next = c.next_on_wire(first, s->qubit);
    if (!next) return;
    const auto* cx = std::get_if<CNot>(&c.gate(*next));
    if (cx == nullptr || wire_of(*cx) != s->qubit) return;
    out.push_back({{c.moment(first), s->qubit}, {first, *next}, {c.gate(*next), g}});
  } else if (const auto* cx = std::get_if<CNot>(&g)) {
    const int w = wire_of(*cx);
    const auto next = c.next_on_wire(first, w);
    if (!next) return;
    const auto* s2 = std::get_if<Single>(&c.gate(*next));
    if (s2 == nullptr || !commutes(*s2)) return;
    out.push_back({{c.moment(first), w}, {first, *next}, {c.gate(*next), g}});
  }
}

class CommuteZRotThroughControl final : public Rule {
 public:
  std::string_view name() const override { return "S1_commute_zrot_through_control"; }
  RuleKind kind() const override { return RuleKind::Soft; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    match_single_through_cnot<ZRot>(
        c, first, [](const CNot& cx) { return cx.control; }, [](const ZRot&) { return true; }, out);
  }
};

class CommuteXLikeThroughTarget final : public Rule {
 public:
  std::string_view name() const override { return "S2_commute_xlike_through_target"; }
  RuleKind kind() const override { return RuleKind::Soft; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    match_single_through_cnot<PhasedX>(
        c, first, [](const CNot& cx) { return cx.target; }, x_like_axis, out);
  }
};

class ExchangeCnots final : public Rule {
 public:
  std::string_view name() const override { return "S3_exchange_cnots_shared_wire"; }
  RuleKind kind() const override { return RuleKind::Soft; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const auto* a = std::get_if<CNot>(&c.gate(first));
    if (a == nullptr) return;
    for (const int w : {std::min(a->control, a->target), std::max(a->control, a->target)}) {
      const auto next = c.next_on_wire(first, w);
      if (!next) continue;
      const auto* b = std::get_if<CNot>(&c.gate(*next));
      if (b == nullptr) continue;
      const bool shared_control = w == a->control && b->control == w && b->target != a->target;
      const bool shared_target = w == a->target && b->target == w && b->control != a->control;
      if (shared_control || shared_target) {
        out.push_back({{c.moment(first), w}, {first, *next}, {c.gate(*next), c.gate(first)}});
      }
    }
  }
};

// Z(l) then PX(p, t)  ==  PX(p - l, t) then Z(l), exactly.
class MoveZRotAcrossPhasedX final : public Rule {
 public:
  std::string_view name() const override { return "S5_move_zrot_across_phasedx"; }
  RuleKind kind() const override { return RuleKind::Soft; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const Gate& g = c.gate(first);
    if (!is_single_qubit(g)) return;
    const int q = min_qubit(g);
    const auto next = c.next_on_wire(first, q);
    if (!next) return;
    const Gate& h = c.gate(*next);
    const Locus locus{c.moment(first), q};
    if (const auto* z = std::get_if<ZRot>(&g); z != nullptr && is_phased_x(h)) {
      const auto& x = std::get<PhasedX>(h);
      out.push_back({locus, {first, *next}, {phased_x(q, x.axis_phase - z->theta, x.angle), g}});
    } else if (const auto* x = std::get_if<PhasedX>(&g); x != nullptr && is_zrot(h)) {
      const auto& z = std::get<ZRot>(h);
      out.push_back({locus, {first, *next}, {h, phased_x(q, x->axis_phase + z.theta, x->angle)}});
    }
  }
};

// CNot(c, t) == (H x H) CNot(t, c) (H x H)
class ReverseCnot final : public Rule {
 public:
  ReverseCnot() {
    Matrix2 h;
    h << 1.0, 1.0, 1.0, -1.0;
    hadamard_ = resynthesize_1q(h / std::numbers::sqrt2);
  }
  std::string_view name() const override { return "S6_reverse_cnot"; }
  RuleKind kind() const override { return RuleKind::Soft; }
  void match_at(const Circuit& c, GateId first, std::vector<Match>& out) const override {
    const auto* cx = std::get_if<CNot>(&c.gate(first));
    if (cx == nullptr) return;
    std::vector<Gate> rep;
    auto hadamards = [&] {
      for (const int q : {cx->control, cx->target}) {
        const std::array<int, 1> map{q};
        for (const auto& g : hadamard_) rep.push_back(relabeled(g, map));
      }
    };
    hadamards();
    rep.push_back(cnot(cx->target, cx->control));
    hadamards();
    out.push_back({{c.moment(first), std::min(cx->control, cx->target)}, {first}, std::move(rep)});
  }

 private:
  std::vector<Gate> hadamard_;  // on qubit 0
};

Transformation to_transformation(std::size_t rule, Match&& m, const Circuit& c) {
  return Transformation{rule, m.locus, std::move(m.affected), std::move(m.replacement), c.fingerprint()};
}

bool kind_selected(RuleKind kind, KindFilter filter) {
  return filter == KindFilter::All || (filter == KindFilter::Hard) == (kind == RuleKind::Hard);
}

std::vector<Match> matches_of(const Rule& rule, const Circuit& c) {
  std::vector<Match> out;
  for (GateId id = 0; id < c.gate_count(); ++id) rule.match_at(c, id, out);
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.locus < b.locus; });
  return out;
}

}  // namespace

std::unique_ptr<Rule> make_drop_identity_rule() { return std::make_unique<DropIdentity>(); }
std::unique_ptr<Rule> make_merge_1q_rule() { return std::make_unique<Merge1q>(); }
std::unique_ptr<Rule> make_cancel_cnot_pair_rule() { return std::make_unique<CancelCnotPair>(); }
std::unique_ptr<Rule> make_commute_zrot_through_control_rule() {
  return std::make_unique<CommuteZRotThroughControl>();
}
std::unique_ptr<Rule> make_commute_xlike_through_target_rule() {
  return std::make_unique<CommuteXLikeThroughTarget>();
}
std::unique_ptr<Rule> make_exchange_cnots_rule() { return std::make_unique<ExchangeCnots>(); }
std::unique_ptr<Rule> make_move_zrot_across_phasedx_rule() { return std::make_unique<MoveZRotAcrossPhasedX>(); }
std::unique_ptr<Rule> make_reverse_cnot_rule() { return std::make_unique<ReverseCnot>(); }

RuleCatalog make_standard_catalog() {
  RuleCatalog cat;
  cat.add(make_drop_identity_rule());
  cat.add(make_merge_1q_rule());
  cat.add(make_cancel_cnot_pair_rule());
  cat.add(make_commute_zrot_through_control_rule());
  cat.add(make_commute_xlike_through_target_rule());
  cat.add(make_exchange_cnots_rule());
  cat.add(make_move_zrot_across_phasedx_rule());
  cat.add(make_reverse_cnot_rule());
  return cat;
}

const RuleCatalog& RuleCatalog::standard() {
  static const RuleCatalog catalog = make_standard_catalog();
  return catalog;
}

std::size_t RuleCatalog::add(std::unique_ptr<Rule> rule) {
  const std::size_t id = rules_.size();
  if (rule->kind() == RuleKind::Soft) soft_.push_back(id);
  rules_.push_back(std::move(rule));
  return id;
}

std::size_t RuleCatalog::find(std::string_view name) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i]->name() == name) return i;
  }
  // short ids like "S5" resolve by prefix
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto full = rules_[i]->name();
    if (full.size() > name.size() && full.substr(0, name.size()) == name && full[name.size()] == '_') return i;
  }
  throw Error(Errc::NotApplicable, "unknown rule '" + std::string(name) + "'");
}

int RuleCatalog::soft_channel(std::size_t id) const {
  const auto it = std::find(soft_.begin(), soft_.end(), id);
  return it == soft_.end() ? -1 : static_cast<int>(it - soft_.begin());
}

std::vector<Transformation> enumerate_transformations(const Circuit& c, KindFilter filter,
                                                      const RuleCatalog& catalog) {
  std::vector<Transformation> out;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    if (!kind_selected(catalog.rule(r).kind(), filter)) continue;
    std::vector<Match> ms = matches_of(catalog.rule(r), c);
    for (std::size_t i = 1; i < ms.size(); ++i) {
      if (ms[i].locus == ms[i - 1].locus) {
        throw Error(Errc::InjectivityViolation,
                    std::string(catalog.rule(r).name()) + " has two instances at moment " +
                        std::to_string(ms[i].locus.moment) + ", qubit " + std::to_string(ms[i].locus.qubit));
      }
    }
    for (auto& m : ms) out.push_back(to_transformation(r, std::move(m), c));
  }
  return out;
}

const Transformation* find_transformation(std::span<const Transformation> ts, std::size_t rule, Locus locus) {
  for (const auto& t : ts) {
    if (t.rule == rule && t.locus == locus) return &t;
  }
  return nullptr;
}

Circuit rewrite(const Circuit& c, std::span<const GateId> affected, std::span<const Gate> replacement) {
  const int nq = c.num_qubits();
  const std::size_t n_old = c.gate_count();
  std::vector<char> removed(n_old, 0);
  for (GateId id : affected) {
    if (id >= n_old) throw Error(Errc::NotApplicable, "affected gate id out of range");
    removed[id] = 1;
  }
  auto node_gate = [&](std::size_t node) -> const Gate& {
    return node < n_old ? c.gate(static_cast<GateId>(node)) : replacement[node - n_old];
  };

  // Per-wire node sequences with the affected segment swapped for the replacement.
  std::vector<std::vector<std::size_t>> seq(static_cast<std::size_t>(nq));
  std::vector<char> spliced(static_cast<std::size_t>(nq), 0);
  for (int q = 0; q < nq; ++q) {
    auto& s = seq[q];
    bool closed = false;
    for (GateId id : c.wire(q)) {
      if (!removed[id]) {
        s.push_back(id);
        closed = spliced[q];
      } else if (closed) {
        throw Error(Errc::NotApplicable, "affected gates are not contiguous on a wire");
      } else if (!spliced[q]) {
        spliced[q] = 1;
        for (std::size_t k = 0; k < replacement.size(); ++k) {
          if (acts_on(replacement[k], q)) s.push_back(n_old + k);
        }
      }
    }
  }
  for (const auto& g : replacement) {
    for (int q : qubits_of(g)) {
      if (q < 0 || q >= nq || !spliced[q]) {
        throw Error(Errc::NotApplicable, "replacement touches a wire outside the affected gates");
      }
    }
  }

  // Topological merge of the wire sequences.
  const std::size_t n_nodes = n_old + replacement.size();
  std::vector<std::size_t> head(static_cast<std::size_t>(nq), 0);
  std::vector<char> queued(n_nodes, 0);
  std::vector<std::size_t> stack;
  auto consider = [&](int q) {
    if (head[q] >= seq[q].size()) return;
    const std::size_t node = seq[q][head[q]];
    if (queued[node]) return;
    for (int w : qubits_of(node_gate(node))) {
      if (head[w] >= seq[w].size() || seq[w][head[w]] != node) return;
    }
    queued[node] = 1;
    stack.push_back(node);
  };
  for (int q = nq - 1; q >= 0; --q) consider(q);
  std::vector<Gate> ordered;
  ordered.reserve(n_nodes - affected.size());
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    ordered.push_back(node_gate(node));
    const GateQubits qs = qubits_of(node_gate(node));
    for (int w : qs) ++head[w];
    for (int w : qs) consider(w);
  }
  if (ordered.size() != n_nodes - affected.size()) {
    throw Error(Errc::NotApplicable, "rewrite would create a cyclic gate order");
  }
  return Circuit(nq, std::move(ordered));
}

Circuit apply(const Circuit& c, const Transformation& t) {
  if (t.circuit_fingerprint != c.fingerprint()) {
    throw Error(Errc::StaleTransformation, "transformation was enumerated on a different circuit");
  }
  return rewrite(c, t.affected, t.replacement);
}

bool verify_local(const Circuit& c, const Transformation& t, double tol) {
  std::vector<int> wires;
  std::vector<Gate> before;
  for (GateId id : t.affected) {
    if (id >= c.gate_count()) return false;
    before.push_back(c.gate(id));
    for (int q : qubits_of(c.gate(id))) wires.push_back(q);
  }
  std::sort(wires.begin(), wires.end());
  wires.erase(std::unique(wires.begin(), wires.end()), wires.end());
  std::vector<int> local(static_cast<std::size_t>(c.num_qubits()), -1);
  for (std::size_t i = 0; i < wires.size(); ++i) local[wires[i]] = static_cast<int>(i);
  for (const auto& g : t.replacement) {
    for (int q : qubits_of(g)) {
      if (q < 0 || q >= c.num_qubits() || local[q] < 0) return false;
    }
  }
  auto to_local = [&](std::span<const Gate> gs) {
    std::vector<Gate> out;
    for (const auto& g : gs) out.push_back(relabeled(g, local));
    return out;
  };
  const int k = static_cast<int>(wires.size());
  return equivalent_up_to_phase(unitary_of_gates(k, to_local(before)), unitary_of_gates(k, to_local(t.replacement)),
                                tol);
}

Circuit prune(const Circuit& c, const RuleCatalog& catalog, const PruneObserver& observer) {
  Circuit cur = c;
  for (;;) {
    bool applied = false;
    for (std::size_t r = 0; r < catalog.size() && !applied; ++r) {
      if (catalog.rule(r).kind() != RuleKind::Hard) continue;
      std::vector<Match> ms = matches_of(catalog.rule(r), cur);
      if (ms.empty()) continue;
      Transformation t = to_transformation(r, std::move(ms.front()), cur);
      if (observer) observer(cur, t);
      cur = apply(cur, t);
      applied = true;
    }
    if (!applied) return cur;
  }
}

}  // namespace qcopt
