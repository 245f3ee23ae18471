#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcopt/env.hpp"

namespace qcopt {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetConfig {
  int in_channels = kNumGateClasses;
  int policy_channels = 5;
  int hidden = 32;
  int layers = 4;  // conv layers on the policy path, head included
  int kernel = 3;  // odd
  auto operator<=>(const NetConfig&) const = default;
};

/// Input tensor for a batch of equally shaped observations.
struct NetInput {
  int batch = 0;
  int num_qubits = 0;
  int capacity = 0;
  RowMatrix x;  // (batch * qubits * capacity) x channels

  int cells() const { return num_qubits * capacity; }
};

NetInput make_input(std::span<const Observation* const> obs);
NetInput make_input(const Observation& obs);

struct NetOutput {
  RowMatrix logits;            // (batch * cells) x policy_channels, rows in (batch, qubit, moment) order
  std::vector<double> values;  // one per batch item
};

/// Activations kept for the backward pass.
struct NetCache {
  std::vector<RowMatrix> cols;  // im2col input of each k x k layer
  std::vector<RowMatrix> acts;  // trunk outputs
};

/// Fully convolutional policy/value network. Trunk of tanh convolutions,
/// a k x k policy head with one channel per soft rule and a 1 x 1 value head
/// averaged over all cells. Parameters live in one flat vector.
class PolicyValueNet {
 public:
  PolicyValueNet() : PolicyValueNet(NetConfig{}) {}
  explicit PolicyValueNet(const NetConfig& cfg, std::uint64_t seed = 0);

  const NetConfig& config() const { return cfg_; }
  std::span<double> params() { return theta_; }
  std::span<const double> params() const { return theta_; }
  std::size_t num_params() const { return theta_.size(); }

  NetOutput forward(const NetInput& in, NetCache* cache = nullptr) const;
  /// Accumulates dLoss/dtheta into `grad`.
  void backward(const NetInput& in, const NetCache& cache, const RowMatrix& dlogits, std::span<const double> dvalues,
                std::span<double> grad) const;

  struct Tensor {
    std::vector<std::uint32_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  const std::vector<Tensor>& tensors() const { return tensors_; }

 private:
  struct Conv {
    int cin = 0, cout = 0, k = 0;
    std::size_t w = 0, b = 0;  // offsets into theta_
  };

  Eigen::Map<const RowMatrix> weights(const Conv& c) const;

  NetConfig cfg_;
  std::vector<Conv> convs_;  // trunk then policy head
  Conv value_;
  std::vector<double> theta_;
  std::vector<Tensor> tensors_;
};

/// Probabilities over the flat (qubit, moment, rule) grid; masked cells are
/// exactly zero. Throws Error(AllMasked) when nothing is legal.
std::vector<double> masked_softmax(std::span<const double> logits, const ActionMask& mask);

struct PolicyEval {
  std::vector<double> probs;  // flat (qubit, moment, rule)
  double value = 0.0;
};

PolicyEval forward(const PolicyValueNet& net, const Observation& obs, const ActionMask& mask);

// Parameter file: "QCNP", u32 version, u32 in_channels, policy_channels,
// hidden, layers, kernel, u32 tensor count, then per tensor u32 rank, u32
// dims, float32 row-major data. All little-endian.
inline constexpr std::uint32_t kNetFileVersion = 1;
void save_net(const PolicyValueNet& net, const std::filesystem::path& path);
PolicyValueNet load_net(const std::filesystem::path& path);

}  // namespace qcopt
