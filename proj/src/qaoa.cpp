#include "qcopt/qaoa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qcopt/error.hpp"
#include "qcopt/rules.hpp"

namespace qcopt {

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges) {
  if (num_nodes < 0) throw Error(Errc::InvalidGraph, "negative node count");
  for (auto& [u, v] : edges) {
    if (u == v) throw Error(Errc::InvalidGraph, "self-loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw Error(Errc::InvalidGraph, "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range");
    }
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) throw Error(Errc::InvalidGraph, "duplicate edge");
  return {num_nodes, std::move(edges)};
}

Graph complete_graph(int num_nodes) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < num_nodes; ++u) {
    for (int v = u + 1; v < num_nodes; ++v) e.emplace_back(u, v);
  }
  return make_graph(num_nodes, std::move(e));
}

Graph read_edge_list(std::istream& in, int num_nodes) {
  std::vector<std::pair<int, int>> e;
  int max_node = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u)) continue;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": expected \"u v\"");
    e.emplace_back(u, v);
    max_node = std::max({max_node, u, v});
  }
  return make_graph(num_nodes < 0 ? max_node + 1 : num_nodes, std::move(e));
}

Graph load_edge_list(const std::filesystem::path& path, int num_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  return read_edge_list(in, num_nodes);
}

namespace {

void check_params(const QaoaParams& p) {
  if (p.gamma.empty() || p.gamma.size() != p.beta.size()) {
    throw Error(Errc::DomainError, "need matching, non-empty gamma and beta lists");
  }
}

bool near_quarter_turn(double angle) {
  const double k = angle / (std::numbers::pi / 2);
  return std::abs(k - std::round(k)) * (std::numbers::pi / 2) < kGenericAngleTol;
}

}  // namespace

QaoaCircuit compile_maxcut(const Graph& g, const QaoaParams& p, int num_qubits) {
  check_params(p);
  const int nq = num_qubits > 0 ? num_qubits : std::max(1, g.num_nodes);
  if (g.num_nodes > nq) {
    throw Error(Errc::TooManyNodes, std::to_string(g.num_nodes) + " nodes on " + std::to_string(nq) + " qubits");
  }
  QaoaCircuit out;
  if (!p.special_angles) {
    for (int c = 0; c < p.cycles(); ++c) {
      if (!g.edges.empty() && near_quarter_turn(2 * p.gamma[c])) {
        out.warnings.push_back("cycle " + std::to_string(c) + ": 2*gamma is close to a multiple of pi/2");
      }
      if (near_quarter_turn(2 * p.beta[c])) {
        out.warnings.push_back("cycle " + std::to_string(c) + ": 2*beta is close to a multiple of pi/2");
      }
    }
  }

  // physical qubit -> token; tokens >= num_nodes are idle qubits
  std::vector<int> node_at(nq);
  for (int q = 0; q < nq; ++q) node_at[q] = q;
  const std::set<std::pair<int, int>> edge_set(g.edges.begin(), g.edges.end());
  const bool local = std::all_of(g.edges.begin(), g.edges.end(), [](auto e) { return e.second - e.first == 1; });

  std::vector<Gate> gates;
  auto zz = [&](int a, int gamma_idx) {
    gates.push_back(cnot(a, a + 1));
    gates.push_back(zrot(a + 1, 2 * p.gamma[gamma_idx]));
    gates.push_back(cnot(a, a + 1));
  };
  auto swap = [&](int a) {
    gates.push_back(cnot(a, a + 1));
    gates.push_back(cnot(a + 1, a));
    gates.push_back(cnot(a, a + 1));
    std::swap(node_at[a], node_at[a + 1]);
  };
  auto key = [](int u, int v) { return std::pair{std::min(u, v), std::max(u, v)}; };

  for (int c = 0; c < p.cycles(); ++c) {
    if (local) {
      for (const auto& [u, v] : g.edges) zz(u, c);
    } else {
      std::set<std::pair<int, int>> todo = edge_set;
      // every pair of positions meets once in nq odd-even rounds
      for (int round = 0; round < nq && !todo.empty(); ++round) {
        for (int a = round % 2; a + 1 < nq; a += 2) {
          const int u = node_at[a], v = node_at[a + 1];
          if (todo.erase(key(u, v))) zz(a, c);
          if (!todo.empty()) swap(a);
        }
      }
    }
    for (int q = 0; q < nq; ++q) gates.push_back(phased_x(q, 0.0, 2 * p.beta[c]));
  }
  out.circuit = prune(Circuit(nq, std::move(gates)));
  out.qubit_of_node.assign(nq, -1);
  for (int q = 0; q < nq; ++q) out.qubit_of_node[node_at[q]] = q;
  return out;
}

Unitary maxcut_reference_unitary(const Graph& g, const QaoaParams& p, int num_qubits, int cap) {
  check_params(p);
  const int n = num_qubits > 0 ? num_qubits : std::max(1, g.num_nodes);
  if (n > cap) throw Error(Errc::QubitCapExceeded, std::to_string(n) + " qubits exceed the cap of " + std::to_string(cap));
  const Eigen::Index dim = Eigen::Index{1} << n;
  auto bit = [n](Eigen::Index x, int q) { return static_cast<int>((x >> (n - 1 - q)) & 1); };
  const std::complex<double> i(0.0, 1.0);
  Unitary u = Unitary::Identity(dim, dim);
  for (int c = 0; c < p.cycles(); ++c) {
    for (Eigen::Index x = 0; x < dim; ++x) {
      double zsum = 0.0;
      for (const auto& [a, b] : g.edges) zsum += (bit(x, a) == bit(x, b)) ? 1.0 : -1.0;
      u.row(x) *= std::exp(-i * p.gamma[c] * zsum);
    }
    // exp(-i beta X) on every qubit: <y|K|x> = prod cos(beta) or -i sin(beta)
    const double cb = std::cos(p.beta[c]), sb = std::sin(p.beta[c]);
    Unitary k(dim, dim);
    for (Eigen::Index y = 0; y < dim; ++y) {
      for (Eigen::Index x = 0; x < dim; ++x) {
        std::complex<double> e = 1.0;
        for (int q = 0; q < n; ++q) e *= bit(x, q) == bit(y, q) ? std::complex<double>(cb) : -i * sb;
        k(y, x) = e;
      }
    }
    u = k * u;
  }
  return u;
}

Unitary permute_qubits(const Unitary& u, std::span<const int> qubit_of_node) {
  const auto dim = u.rows();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (static_cast<int>(qubit_of_node.size()) != n) throw Error(Errc::DomainError, "permutation size mismatch");
  const std::span<const int> dest = qubit_of_node;
  Unitary out(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    Eigen::Index y = 0;
    for (int q = 0; q < n; ++q) {
      if ((x >> (n - 1 - q)) & 1) y |= Eigen::Index{1} << (n - 1 - dest[q]);
    }
    out.row(y) = u.row(x);
  }
  return out;
}

}  // namespace qcopt
