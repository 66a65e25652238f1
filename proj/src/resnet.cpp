#include "mevo/resnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mevo/errors.hpp"
#include "mevo/parallel.hpp"
#include "mevo/philox.hpp"

static_assert(std::endian::native == std::endian::little,
              "model io assumes a little-endian host");

namespace mevo {

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  throw ConfigError("unknown activation: " + s + " (expected tanh or relu)");
}

void ResNetConfig::validate() const {
  if (n < 1) throw ConfigError("network width n must be >= 1");
  if (blocks < 1) throw ConfigError("network needs at least one block");
  if (depth < 1) throw ConfigError("network depth must be >= 1");
  if (width < 1) throw ConfigError("network hidden width must be >= 1");
  if (!(init_scale > 0)) throw ConfigError("init scale must be positive");
}

int64_t ResNetConfig::param_count() const {
  int64_t per_block = 0;
  for (int l = 0; l <= depth; ++l)
    per_block += int64_t(layer_out(l)) * layer_in(l) + layer_out(l);
  return per_block * blocks;
}

namespace {

inline double act_eval(Activation a, double z) {
  return a == Activation::Tanh ? std::tanh(z) : (z > 0 ? z : 0.0);
}

// Derivative expressed through the activation value where possible.
inline double act_deriv(Activation a, double z, double fz) {
  return a == Activation::Tanh ? 1.0 - fz * fz : (z > 0 ? 1.0 : 0.0);
}

}  // namespace

ResNet ResNet::init(const ResNetConfig& cfg) {
  cfg.validate();
  ResNet net;
  net.cfg_ = cfg;
  net.W_.resize(cfg.blocks);
  net.b_.resize(cfg.blocks);
  for (int k = 0; k < cfg.blocks; ++k) {
    net.W_[k].resize(cfg.layers_per_block());
    net.b_[k].resize(cfg.layers_per_block());
    for (int l = 0; l <= cfg.depth; ++l) {
      const int out = cfg.layer_out(l), in = cfg.layer_in(l);
      const uint64_t layer_key = uint64_t(k) * cfg.layers_per_block() + l;
      const double scale = cfg.init_scale / std::sqrt(double(in));
      Eigen::MatrixXd& W = net.W_[k][l];
      W.resize(out, in);
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c)
          W(r, c) = scale * philox::normal(cfg.seed, layer_key, uint64_t(r) * in + c);
      net.b_[k][l] = Eigen::VectorXd::Zero(out);
    }
  }
  return net;
}

Eigen::VectorXd ResNet::run_blocks(const Eigen::VectorXd& v) const {
  Eigen::VectorXd x = v;
  Eigen::VectorXd a, z;
  for (int k = 0; k < cfg_.blocks; ++k) {
    a = x;
    for (int l = 0; l < cfg_.depth; ++l) {
      z.noalias() = W_[k][l] * a;
      z += b_[k][l];
      a.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        a(i) = act_eval(cfg_.activation, z(i));
    }
    z.noalias() = W_[k][cfg_.depth] * a;
    z += b_[k][cfg_.depth];
    x += z;
  }
  return x;
}

void ResNet::trace_failure(const Eigen::VectorXd& v) const {
  Eigen::VectorXd x = v;
  for (int k = 0; k < cfg_.blocks; ++k) {
    Eigen::VectorXd a = x;
    for (int l = 0; l <= cfg_.depth; ++l) {
      Eigen::VectorXd z = W_[k][l] * a + b_[k][l];
      if (l < cfg_.depth)
        for (Eigen::Index i = 0; i < z.size(); ++i)
          z(i) = act_eval(cfg_.activation, z(i));
      if (!z.allFinite())
        throw NumericError("non-finite value in network block " + std::to_string(k) +
                           ", layer " + std::to_string(l));
      a = z;
    }
    x += a;
    if (!x.allFinite())
      throw NumericError("non-finite value in network block " + std::to_string(k) +
                         " residual addition");
  }
  throw NumericError("non-finite network output (input itself non-finite?)");
}

Eigen::VectorXd ResNet::forward(const Eigen::VectorXd& v) const {
  if (!valid()) throw ConfigError("network is uninitialized");
  if (v.size() != cfg_.n)
    throw ConfigError("network input length " + std::to_string(v.size()) +
                      " does not match n = " + std::to_string(cfg_.n));
  Eigen::VectorXd out = run_blocks(v);
  if (!out.allFinite()) trace_failure(v);
  return out;
}

Eigen::MatrixXd ResNet::forward_batch(const Eigen::MatrixXd& inputs, bool parallel) const {
  if (!valid()) throw ConfigError("network is uninitialized");
  if (inputs.cols() != cfg_.n) throw ConfigError("batch column count mismatch");
  Eigen::MatrixXd out(inputs.rows(), inputs.cols());
  parallel_for(
      inputs.rows(),
      [&](int64_t j) { out.row(j) = run_blocks(inputs.row(j).transpose()).transpose(); },
      parallel);
  if (!out.allFinite())
    for (Eigen::Index j = 0; j < inputs.rows(); ++j)
      if (!out.row(j).allFinite()) trace_failure(inputs.row(j).transpose());
  return out;
}

double ResNet::loss(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    bool parallel) const {
  if (inputs.rows() != targets.rows() || inputs.cols() != targets.cols())
    throw ConfigError("loss batch shape mismatch");
  if (inputs.rows() < 1) throw ConfigError("loss batch is empty");
  Eigen::MatrixXd out = forward_batch(inputs, parallel);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < inputs.rows(); ++j)
    sum += (out.row(j) - targets.row(j)).squaredNorm();
  return sum / double(inputs.rows());
}

void ResNet::Gradients::zero(const ResNetConfig& cfg) {
  W.assign(cfg.blocks, {});
  b.assign(cfg.blocks, {});
  for (int k = 0; k < cfg.blocks; ++k)
    for (int l = 0; l <= cfg.depth; ++l) {
      W[k].push_back(Eigen::MatrixXd::Zero(cfg.layer_out(l), cfg.layer_in(l)));
      b[k].push_back(Eigen::VectorXd::Zero(cfg.layer_out(l)));
    }
}

double ResNet::backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                        Gradients& grad) const {
  if (!valid()) throw ConfigError("network is uninitialized");
  if (inputs.rows() != targets.rows() || inputs.cols() != targets.cols() ||
      inputs.cols() != cfg_.n)
    throw ConfigError("backward batch shape mismatch");
  const int64_t count = inputs.rows();
  if (count < 1) throw ConfigError("backward batch is empty");
  grad.zero(cfg_);

  const int depth = cfg_.depth;
  // Per-block caches for one sample: block input, activations, pre-activations.
  std::vector<Eigen::VectorXd> block_in(cfg_.blocks);
  std::vector<std::vector<Eigen::VectorXd>> zs(cfg_.blocks), as(cfg_.blocks);

  double sum = 0.0;
  for (int64_t j = 0; j < count; ++j) {
    // Forward, caching. Arithmetic matches run_blocks exactly.
    Eigen::VectorXd x = inputs.row(j).transpose();
    for (int k = 0; k < cfg_.blocks; ++k) {
      block_in[k] = x;
      zs[k].assign(depth + 1, {});
      as[k].assign(depth, {});
      Eigen::VectorXd a = x;
      for (int l = 0; l < depth; ++l) {
        Eigen::VectorXd z = W_[k][l] * a;
        z += b_[k][l];
        zs[k][l] = z;
        a.resize(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i)
          a(i) = act_eval(cfg_.activation, z(i));
        as[k][l] = a;
      }
      Eigen::VectorXd z = W_[k][depth] * a;
      z += b_[k][depth];
      zs[k][depth] = z;
      x += z;
    }
    Eigen::VectorXd e = x - targets.row(j).transpose();
    sum += e.squaredNorm();
    if (!e.allFinite()) trace_failure(inputs.row(j).transpose());

    // Reverse pass: delta = d(sample loss)/d(block output).
    Eigen::VectorXd delta = 2.0 * e;
    for (int k = cfg_.blocks - 1; k >= 0; --k) {
      // Output layer of the block body.
      Eigen::VectorXd g = delta;
      grad.W[k][depth].noalias() +=
          g * (depth > 0 ? as[k][depth - 1] : block_in[k]).transpose();
      grad.b[k][depth] += g;
      Eigen::VectorXd gamma = W_[k][depth].transpose() * g;
      for (int l = depth - 1; l >= 0; --l) {
        Eigen::VectorXd gz(gamma.size());
        for (Eigen::Index i = 0; i < gamma.size(); ++i)
          gz(i) = gamma(i) * act_deriv(cfg_.activation, zs[k][l](i), as[k][l](i));
        grad.W[k][l].noalias() +=
            gz * (l > 0 ? as[k][l - 1] : block_in[k]).transpose();
        grad.b[k][l] += gz;
        gamma.noalias() = W_[k][l].transpose() * gz;
      }
      delta += gamma;  // identity path of the residual connection
    }
  }

  const double inv = 1.0 / double(count);
  for (int k = 0; k < cfg_.blocks; ++k)
    for (int l = 0; l <= depth; ++l) {
      grad.W[k][l] *= inv;
      grad.b[k][l] *= inv;
    }
  // same division as loss(), so the two agree bit for bit
  return sum / double(count);
}

namespace {

void flatten_params(const std::vector<std::vector<Eigen::MatrixXd>>& W,
                    const std::vector<std::vector<Eigen::VectorXd>>& b,
                    Eigen::VectorXd& out, int64_t total) {
  out.resize(total);
  int64_t at = 0;
  for (std::size_t k = 0; k < W.size(); ++k)
    for (std::size_t l = 0; l < W[k].size(); ++l) {
      const Eigen::MatrixXd& m = W[k][l];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
      for (Eigen::Index i = 0; i < b[k][l].size(); ++i) out(at++) = b[k][l](i);
    }
}

}  // namespace

void ResNet::Gradients::to_flat(Eigen::VectorXd& out) const {
  int64_t total = 0;
  for (std::size_t k = 0; k < W.size(); ++k)
    for (std::size_t l = 0; l < W[k].size(); ++l)
      total += W[k][l].size() + b[k][l].size();
  flatten_params(W, b, out, total);
}

void ResNet::to_flat(Eigen::VectorXd& out) const {
  if (!valid()) throw ConfigError("network is uninitialized");
  flatten_params(W_, b_, out, param_count());
}

void ResNet::from_flat(const Eigen::VectorXd& flat) {
  if (!valid()) throw ConfigError("network is uninitialized");
  if (flat.size() != param_count())
    throw ConfigError("flat parameter vector has wrong length");
  int64_t at = 0;
  for (int k = 0; k < cfg_.blocks; ++k)
    for (int l = 0; l <= cfg_.depth; ++l) {
      Eigen::MatrixXd& m = W_[k][l];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat(at++);
      for (Eigen::Index i = 0; i < b_[k][l].size(); ++i) b_[k][l](i) = flat(at++);
    }
}

namespace {
constexpr char kMagic[4] = {'M', 'E', 'V', 'M'};
constexpr uint32_t kVersion = 1;
}  // namespace

void ResNet::save(const std::string& path) const {
  if (!valid()) throw ConfigError("network is uninitialized");
  Eigen::VectorXd flat;
  to_flat(flat);
  if (!flat.allFinite()) throw NumericError("refusing to save non-finite parameters");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model: " + path);
  auto put = [&](const void* p, std::size_t len) {
    out.write(static_cast<const char*>(p), std::streamsize(len));
    if (!out) throw FormatError("short write to " + path);
  };
  put(kMagic, 4);
  const uint32_t v = kVersion, n = uint32_t(cfg_.n), K = uint32_t(cfg_.blocks),
                 depth = uint32_t(cfg_.depth), width = uint32_t(cfg_.width),
                 act = uint32_t(cfg_.activation);
  put(&v, 4);
  put(&n, 4);
  put(&K, 4);
  put(&depth, 4);
  put(&width, 4);
  put(&act, 4);
  put(&cfg_.seed, 8);
  put(&cfg_.init_scale, 8);
  put(flat.data(), sizeof(double) * flat.size());
}

ResNet ResNet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model: " + path);
  auto get = [&](void* p, std::size_t len) {
    in.read(static_cast<char*>(p), std::streamsize(len));
    if (in.gcount() != std::streamsize(len))
      throw FormatError("truncated model file: " + path);
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad model magic in " + path + " (corrupted or not a model)");
  uint32_t version = 0, n = 0, K = 0, depth = 0, width = 0, act = 0;
  get(&version, 4);
  if (version != kVersion)
    throw FormatError("unsupported model version " + std::to_string(version) + " in " +
                      path);
  get(&n, 4);
  get(&K, 4);
  get(&depth, 4);
  get(&width, 4);
  get(&act, 4);
  ResNetConfig cfg;
  cfg.n = int(n);
  cfg.blocks = int(K);
  cfg.depth = int(depth);
  cfg.width = int(width);
  if (act > 1) throw FormatError("unknown activation id in model file: " + path);
  cfg.activation = Activation(act);
  get(&cfg.seed, 8);
  get(&cfg.init_scale, 8);
  cfg.validate();

  ResNet net;
  net.cfg_ = cfg;
  net.W_.resize(cfg.blocks);
  net.b_.resize(cfg.blocks);
  for (int k = 0; k < cfg.blocks; ++k)
    for (int l = 0; l <= cfg.depth; ++l) {
      net.W_[k].emplace_back(cfg.layer_out(l), cfg.layer_in(l));
      net.b_[k].emplace_back(cfg.layer_out(l));
    }
  Eigen::VectorXd flat(cfg.param_count());
  get(flat.data(), sizeof(double) * flat.size());
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw FormatError("trailing bytes after model parameters: " + path);
  if (!flat.allFinite()) throw FormatError("model file holds non-finite parameters: " + path);
  net.from_flat(flat);
  return net;
}

}  // namespace mevo
