#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "qcopt/circuit.hpp"

namespace qcopt {

nlohmann::json to_json(const Gate& g);
Gate gate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Circuit& c);
/// Rejects malformed gates and connectivity violations with Error(Parse / InvalidCircuit).
Circuit circuit_from_json(const nlohmann::json& j);

std::string dump_circuit(const Circuit& c);
Circuit load_circuit(const std::filesystem::path& path);
void save_circuit(const Circuit& c, const std::filesystem::path& path);

}  // namespace qcopt
