#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcopt/circuit.hpp"
#include "qcopt/unitary.hpp"

namespace qcopt {

/// Undirected simple graph; edges stored as (u, v) with u < v, sorted.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Throws Error(InvalidGraph) on self-loops, duplicates or bad indices.
Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges);
Graph complete_graph(int num_nodes);
/// One "u v" pair per line; '#' starts a comment. num_nodes < 0: max index + 1.
Graph read_edge_list(std::istream& in, int num_nodes = -1);
Graph load_edge_list(const std::filesystem::path& path, int num_nodes = -1);

struct QaoaParams {
  std::vector<double> gamma;  // per cycle
  std::vector<double> beta;
  bool special_angles = false;  // suppresses the genericity warning

  int cycles() const { return static_cast<int>(gamma.size()); }
};

/// Tolerance for flagging angles whose gates land on a multiple of pi/2.
inline constexpr double kGenericAngleTol = 1e-3;

struct QaoaCircuit {
  Circuit circuit;
  std::vector<int> qubit_of_node;  // final position of each node; idle qubits follow the nodes
  std::vector<std::string> warnings;
};

/// ZZ(gamma) = CNot . ZRot(2 gamma) . CNot per edge, routed over the chain by
/// an odd-even swap network when needed, then PhasedX(0, 2 beta) on every
/// qubit, per cycle. Result is pruned. Throws Error(TooManyNodes) if the graph
/// does not fit on `num_qubits` (0: one qubit per node).
QaoaCircuit compile_maxcut(const Graph& g, const QaoaParams& p, int num_qubits = 0);

/// Dense prod_c [ (x)_q exp(-i beta_c X) . prod_edges exp(-i gamma_c Z_u Z_v) ].
/// Throws Error(QubitCapExceeded).
Unitary maxcut_reference_unitary(const Graph& g, const QaoaParams& p, int num_qubits = 0,
                                 int cap = kDefaultUnitaryCap);

/// P . u where P moves qubit v to qubit_of_node[v]; a full permutation.
Unitary permute_qubits(const Unitary& u, std::span<const int> qubit_of_node);

}  // namespace qcopt
