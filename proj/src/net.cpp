#include "qcopt/net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "qcopt/error.hpp"

namespace qcopt {

namespace {

// (batch, qubit, moment) rows -> rows holding the k x k neighbourhood, zero padded.
RowMatrix im2col(const RowMatrix& x, int batch, int m, int L, int k) {
  const int cin = static_cast<int>(x.cols());
  const int p = k / 2;
  RowMatrix col = RowMatrix::Zero(x.rows(), static_cast<Eigen::Index>(k) * k * cin);
  for (int b = 0; b < batch; ++b) {
    for (int q = 0; q < m; ++q) {
      for (int t = 0; t < L; ++t) {
        const Eigen::Index n = (static_cast<Eigen::Index>(b) * m + q) * L + t;
        for (int dq = 0; dq < k; ++dq) {
          const int qq = q + dq - p;
          if (qq < 0 || qq >= m) continue;
          for (int dt = 0; dt < k; ++dt) {
            const int tt = t + dt - p;
            if (tt < 0 || tt >= L) continue;
            const Eigen::Index src = (static_cast<Eigen::Index>(b) * m + qq) * L + tt;
            col.row(n).segment((dq * k + dt) * cin, cin) = x.row(src);
          }
        }
      }
    }
  }
  return col;
}

RowMatrix col2im(const RowMatrix& dcol, int batch, int m, int L, int k, int cin) {
  const int p = k / 2;
  RowMatrix dx = RowMatrix::Zero(dcol.rows(), cin);
  for (int b = 0; b < batch; ++b) {
    for (int q = 0; q < m; ++q) {
      for (int t = 0; t < L; ++t) {
        const Eigen::Index n = (static_cast<Eigen::Index>(b) * m + q) * L + t;
        for (int dq = 0; dq < k; ++dq) {
          const int qq = q + dq - p;
          if (qq < 0 || qq >= m) continue;
          for (int dt = 0; dt < k; ++dt) {
            const int tt = t + dt - p;
            if (tt < 0 || tt >= L) continue;
            const Eigen::Index dst = (static_cast<Eigen::Index>(b) * m + qq) * L + tt;
            dx.row(dst) += dcol.row(n).segment((dq * k + dt) * cin, cin);
          }
        }
      }
    }
  }
  return dx;
}

}  // namespace

NetInput make_input(std::span<const Observation* const> obs) {
  NetInput in;
  if (obs.empty()) return in;
  in.batch = static_cast<int>(obs.size());
  in.num_qubits = obs.front()->num_qubits;
  in.capacity = obs.front()->capacity;
  const Eigen::Index cells = in.cells();
  in.x.resize(in.batch * cells, kNumGateClasses);
  for (int b = 0; b < in.batch; ++b) {
    const Observation& o = *obs[b];
    if (o.num_qubits != in.num_qubits || o.capacity != in.capacity) {
      throw Error(Errc::DomainError, "observations in one batch must share their shape");
    }
    for (Eigen::Index i = 0; i < cells; ++i) {
      for (int c = 0; c < kNumGateClasses; ++c) {
        in.x(b * cells + i, c) = o.data[static_cast<std::size_t>(i) * kNumGateClasses + c];
      }
    }
  }
  return in;
}

NetInput make_input(const Observation& obs) {
  const Observation* p = &obs;
  return make_input(std::span<const Observation* const>(&p, 1));
}

PolicyValueNet::PolicyValueNet(const NetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.layers < 1 || cfg.hidden < 1 || cfg.kernel < 1 || cfg.kernel % 2 == 0 || cfg.in_channels < 1 ||
      cfg.policy_channels < 1) {
    throw Error(Errc::DomainError, "bad network shape");
  }
  std::size_t off = 0;
  auto add_tensor = [&](std::vector<std::uint32_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    tensors_.push_back({std::move(shape), off, n});
    off += n;
    return off - n;
  };
  auto add_conv = [&](int cin, int cout, int k) {
    Conv c{cin, cout, k, 0, 0};
    c.w = add_tensor({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(cin),
                      static_cast<std::uint32_t>(cout)});
    c.b = add_tensor({static_cast<std::uint32_t>(cout)});
    return c;
  };
  int cin = cfg.in_channels;
  for (int l = 0; l + 1 < cfg.layers; ++l) {
    convs_.push_back(add_conv(cin, cfg.hidden, cfg.kernel));
    cin = cfg.hidden;
  }
  convs_.push_back(add_conv(cin, cfg.policy_channels, cfg.kernel));
  value_ = add_conv(cin, 1, 1);
  theta_.assign(off, 0.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < convs_.size(); ++l) {
    const Conv& c = convs_[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(c.k * c.k * c.cin));
    for (std::size_t i = 0; i < static_cast<std::size_t>(c.k * c.k * c.cin * c.cout); ++i) {
      theta_[c.w + i] = scale * normal(rng);
    }
  }
  // policy head stays zero: uniform initial policy
  const double vscale = 0.1 / std::sqrt(static_cast<double>(value_.cin));
  for (int i = 0; i < value_.cin; ++i) theta_[value_.w + i] = vscale * normal(rng);
}

Eigen::Map<const RowMatrix> PolicyValueNet::weights(const Conv& c) const {
  return {theta_.data() + c.w, static_cast<Eigen::Index>(c.k) * c.k * c.cin, c.cout};
}

NetOutput PolicyValueNet::forward(const NetInput& in, NetCache* cache) const {
  if (in.x.cols() != cfg_.in_channels) throw Error(Errc::DomainError, "input channel mismatch");
  const int m = in.num_qubits, L = in.capacity;
  if (cache) {
    cache->cols.clear();
    cache->acts.clear();
  }
  RowMatrix x = in.x;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    const Conv& c = convs_[l];
    RowMatrix col = im2col(x, in.batch, m, L, c.k);
    Eigen::Map<const Eigen::RowVectorXd> bias(theta_.data() + c.b, c.cout);
    RowMatrix z = col * weights(c);
    z.rowwise() += bias;
    if (cache) cache->cols.push_back(std::move(col));
    if (l + 1 == convs_.size()) {
      NetOutput out;
      out.logits = std::move(z);
      Eigen::Map<const Eigen::VectorXd> wv(theta_.data() + value_.w, value_.cin);
      const Eigen::VectorXd v = x * wv;
      out.values.resize(in.batch);
      const Eigen::Index cells = in.cells();
      for (int b = 0; b < in.batch; ++b) {
        out.values[b] = (cells ? v.segment(b * cells, cells).mean() : 0.0) + theta_[value_.b];
      }
      return out;
    }
    x = z.array().tanh().matrix();
    if (cache) cache->acts.push_back(x);
  }
  return {};
}

void PolicyValueNet::backward(const NetInput& in, const NetCache& cache, const RowMatrix& dlogits,
                              std::span<const double> dvalues, std::span<double> grad) const {
  const int m = in.num_qubits, L = in.capacity;
  const Eigen::Index cells = in.cells();
  const std::size_t head = convs_.size() - 1;
  const RowMatrix& top = head ? cache.acts.back() : in.x;

  // value head
  Eigen::VectorXd dv(top.rows());
  for (int b = 0; b < in.batch; ++b) dv.segment(b * cells, cells).setConstant(dvalues[b] / cells);
  Eigen::Map<Eigen::VectorXd> gwv(grad.data() + value_.w, value_.cin);
  gwv.noalias() += top.transpose() * dv;
  for (int b = 0; b < in.batch; ++b) grad[value_.b] += dvalues[b];
  Eigen::Map<const Eigen::RowVectorXd> wv(theta_.data() + value_.w, value_.cin);

  RowMatrix dz = dlogits;
  for (std::size_t l = convs_.size(); l-- > 0;) {
    const Conv& c = convs_[l];
    const RowMatrix& col = cache.cols[l];
    Eigen::Map<RowMatrix> gw(grad.data() + c.w, static_cast<Eigen::Index>(c.k) * c.k * c.cin, c.cout);
    gw.noalias() += col.transpose() * dz;
    Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + c.b, c.cout);
    gb += dz.colwise().sum();
    if (l == 0) break;
    RowMatrix dx = col2im(dz * weights(c).transpose(), in.batch, m, L, c.k, c.cin);
    if (l == head) dx.noalias() += dv * wv;
    const RowMatrix& act = cache.acts[l - 1];
    dz = (dx.array() * (1.0 - act.array().square())).matrix();
  }
}

std::vector<double> masked_softmax(std::span<const double> logits, const ActionMask& mask) {
  if (logits.size() != mask.size()) throw Error(Errc::DomainError, "logit grid and mask differ in size");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask.bits[i]) mx = std::max(mx, logits[i]);
  }
  if (mx == -std::numeric_limits<double>::infinity()) throw Error(Errc::AllMasked, "no legal action");
  std::vector<double> p(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask.bits[i]) sum += p[i] = std::exp(logits[i] - mx);
  }
  for (double& v : p) v /= sum;
  return p;
}

PolicyEval forward(const PolicyValueNet& net, const Observation& obs, const ActionMask& mask) {
  if (mask.num_qubits != obs.num_qubits || mask.capacity != obs.capacity) {
    throw Error(Errc::DomainError, "mask and observation differ in shape");
  }
  const NetOutput out = net.forward(make_input(obs));
  PolicyEval ev;
  ev.probs = masked_softmax(std::span<const double>(out.logits.data(), out.logits.size()), mask);
  ev.value = out.values[0];
  return ev;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(Errc::Parse, "truncated parameter file");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_net(const PolicyValueNet& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::Io, "cannot write " + path.string());
  os.write("QCNP", 4);
  put_u32(os, kNetFileVersion);
  const NetConfig& c = net.config();
  for (int v : {c.in_channels, c.policy_channels, c.hidden, c.layers, c.kernel}) put_u32(os, static_cast<std::uint32_t>(v));
  put_u32(os, static_cast<std::uint32_t>(net.tensors().size()));
  for (const auto& t : net.tensors()) {
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(os, d);
    for (std::size_t i = 0; i < t.size; ++i) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(net.params()[t.offset + i])));
  }
  if (!os) throw Error(Errc::Io, "write failed: " + path.string());
}

PolicyValueNet load_net(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::Io, "cannot read " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "QCNP", 4) != 0) throw Error(Errc::Parse, "not a parameter file");
  if (get_u32(is) != kNetFileVersion) throw Error(Errc::Parse, "unsupported parameter file version");
  NetConfig c;
  c.in_channels = static_cast<int>(get_u32(is));
  c.policy_channels = static_cast<int>(get_u32(is));
  c.hidden = static_cast<int>(get_u32(is));
  c.layers = static_cast<int>(get_u32(is));
  c.kernel = static_cast<int>(get_u32(is));
  PolicyValueNet net(c);
  if (get_u32(is) != net.tensors().size()) throw Error(Errc::Parse, "tensor count mismatch");
  for (const auto& t : net.tensors()) {
    if (get_u32(is) != t.shape.size()) throw Error(Errc::Parse, "tensor rank mismatch");
    for (auto d : t.shape) {
      if (get_u32(is) != d) throw Error(Errc::Parse, "tensor shape mismatch");
    }
    for (std::size_t i = 0; i < t.size; ++i) net.params()[t.offset + i] = std::bit_cast<float>(get_u32(is));
  }
  return net;
}

}  // namespace qcopt
