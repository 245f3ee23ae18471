#include "qcopt/replay.hpp"

#include <fstream>

#include "qcopt/circuit_json.hpp"
#include "qcopt/error.hpp"

namespace qcopt {

nlohmann::json to_json(const TransformationLog& log, const RuleCatalog& catalog) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : log.steps) {
    steps.push_back({{"rule", catalog.rule(s.rule).name()}, {"moment", s.locus.moment}, {"qubit", s.locus.qubit}});
  }
  nlohmann::json j{{"start", to_json(log.start)}, {"steps", std::move(steps)}};
  if (log.final) j["final"] = to_json(*log.final);
  return j;
}

TransformationLog log_from_json(const nlohmann::json& j, const RuleCatalog& catalog) {
  try {
    TransformationLog log;
    log.start = circuit_from_json(j.at("start"));
    for (const auto& s : j.at("steps")) {
      log.steps.push_back(
          {catalog.find(s.at("rule").get<std::string>()), {s.at("moment").get<int>(), s.at("qubit").get<int>()}});
    }
    if (j.contains("final")) log.final = circuit_from_json(j.at("final"));
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("bad transformation log: ") + e.what());
  }
}

void save_log(const TransformationLog& log, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::Io, "cannot write " + path.string());
  os << to_json(log).dump() << '\n';
}

TransformationLog load_log(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::Io, "cannot read " + path.string());
  try {
    return log_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

ReplayReport replay_log(const TransformationLog& log, const RuleCatalog& catalog, int cap) {
  ReplayReport rep;
  Circuit cur = log.start;
  auto violation = [&](std::string msg) {
    ++rep.violations;
    rep.messages.push_back(std::move(msg));
  };
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& s = log.steps[i];
    const auto ts = enumerate_transformations(cur, KindFilter::All, catalog);
    const Transformation* t = find_transformation(ts, s.rule, s.locus);
    const std::string where = "step " + std::to_string(i) + " (" + std::string(catalog.rule(s.rule).name()) + " at " +
                              std::to_string(s.locus.moment) + "," + std::to_string(s.locus.qubit) + ")";
    if (!t) {
      violation(where + ": no such transformation");
      break;
    }
    ++rep.local_checks;
    if (!verify_local(cur, *t)) violation(where + ": local unitary mismatch");
    cur = prune(apply(cur, *t), catalog, [&](const Circuit& before, const Transformation& h) {
      ++rep.local_checks;
      if (!verify_local(before, h)) violation(where + ": pruning step " + std::string(catalog.rule(h.rule).name()) + " mismatch");
    });
    ++rep.steps;
  }
  if (cur.num_qubits() <= cap) {
    rep.full = equivalent_up_to_phase(unitary_of(cur, cap), unitary_of(log.start, cap), 1e-8) ? FullCheck::Pass
                                                                                              : FullCheck::Fail;
    if (rep.full == FullCheck::Fail) rep.messages.push_back("full unitary differs from the start circuit");
  }
  if (log.final) {
    rep.final_matches = cur == *log.final;
    if (!*rep.final_matches) rep.messages.push_back("replayed circuit differs from the recorded final circuit");
  }
  rep.end = std::move(cur);
  return rep;
}

}  // namespace qcopt
