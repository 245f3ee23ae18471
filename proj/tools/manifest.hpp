#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcopt/circuit.hpp"

namespace qcopt::cli {

std::string sha256_file(const std::filesystem::path& path);

nlohmann::json metrics(const Circuit& c);
/// Mean d, n, q over circuits.
nlohmann::json mean_metrics(const std::vector<Circuit>& cs);

/// Run record written next to the outputs.
class Manifest {
 public:
  explicit Manifest(std::string subcommand);

  nlohmann::json& config() { return j_["config"]; }
  nlohmann::json& stages() { return j_["stages"]; }
  nlohmann::json& extra() { return j_; }
  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
  void add_seed(std::uint64_t s) { j_["seeds"].push_back(s); }

  /// To `path`, or to stderr when empty.
  void write(const std::filesystem::path& path);

 private:
  nlohmann::json j_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace qcopt::cli
