#include "manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "qcopt/env.hpp"
#include "qcopt/error.hpp"

namespace qcopt::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

nlohmann::json metrics(const Circuit& c) {
  return {{"d", c.depth()}, {"n", c.gate_count()}, {"q", quality(c)}};
}

nlohmann::json mean_metrics(const std::vector<Circuit>& cs) {
  double d = 0, n = 0, q = 0;
  for (const auto& c : cs) {
    d += c.depth();
    n += static_cast<double>(c.gate_count());
    q += quality(c);
  }
  const double k = cs.empty() ? 1.0 : static_cast<double>(cs.size());
  return {{"count", cs.size()}, {"d", d / k}, {"n", n / k}, {"q", q / k}};
}

Manifest::Manifest(std::string subcommand) : t0_(std::chrono::steady_clock::now()) {
  j_ = {{"tool", "qcopt"},          {"manifest_version", 1},           {"subcommand", std::move(subcommand)},
        {"config", nlohmann::json::object()}, {"seeds", nlohmann::json::array()}, {"inputs", nlohmann::json::array()},
        {"outputs", nlohmann::json::array()}, {"stages", nlohmann::json::object()}};
}

void Manifest::add_input(const std::filesystem::path& p) {
  j_["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
}

void Manifest::add_output(const std::filesystem::path& p) {
  j_["outputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
}

void Manifest::write(const std::filesystem::path& path) {
  j_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  if (path.empty()) {
    std::cerr << j_.dump() << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw Error(Errc::Io, "cannot write " + path.string());
  os << j_.dump(2) << '\n';
}

}  // namespace qcopt::cli
