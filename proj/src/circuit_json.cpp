#include "qcopt/circuit_json.hpp"

#include <fstream>

#include "qcopt/error.hpp"

namespace qcopt {

using nlohmann::json;

json to_json(const Gate& g) {
  if (const auto* z = std::get_if<ZRot>(&g)) {
    return json{{"type", "zrot"}, {"qubit", z->qubit}, {"theta", z->theta}};
  }
  if (const auto* x = std::get_if<PhasedX>(&g)) {
    return json{{"type", "phasedx"}, {"qubit", x->qubit}, {"axis_phase", x->axis_phase}, {"angle", x->angle}};
  }
  const auto& c = std::get<CNot>(g);
  return json{{"type", "cnot"}, {"control", c.control}, {"target", c.target}};
}

Gate gate_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "zrot") return zrot(j.at("qubit").get<int>(), j.at("theta").get<double>());
    if (type == "phasedx") {
      return phased_x(j.at("qubit").get<int>(), j.at("axis_phase").get<double>(), j.at("angle").get<double>());
    }
    if (type == "cnot") return cnot(j.at("control").get<int>(), j.at("target").get<int>());
    throw Error(Errc::Parse, "unknown gate type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed gate: ") + e.what());
  }
}

json to_json(const Circuit& c) {
  json gates = json::array();
  for (const auto& g : c.gates()) gates.push_back(to_json(g));
  return json{{"num_qubits", c.num_qubits()}, {"gates", std::move(gates)}};
}

Circuit circuit_from_json(const json& j) {
  int num_qubits = 0;
  std::vector<Gate> gates;
  try {
    num_qubits = j.at("num_qubits").get<int>();
    for (const auto& g : j.at("gates")) gates.push_back(gate_from_json(g));
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed circuit: ") + e.what());
  }
  return Circuit(num_qubits, std::move(gates));
}

std::string dump_circuit(const Circuit& c) { return to_json(c).dump(); }

Circuit load_circuit(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
  return circuit_from_json(j);
}

void save_circuit(const Circuit& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << dump_circuit(c) << '\n';
}

}  // namespace qcopt
