#pragma once

// Block residual network R^n -> R^n: v <- v + block(v) for each of K blocks,
// each block a small feedforward stack with no activation on its last layer.
// Gradients are hand-derived reverse mode; no autodiff.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mevo {

enum class Activation : uint32_t { Tanh = 0, Relu = 1 };
std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct ResNetConfig {
  int n = 0;          // input/output width
  int blocks = 0;     // K
  int depth = 3;      // hidden layers per block
  int width = 30;     // hidden width
  Activation activation = Activation::Tanh;
  uint64_t seed = 0;
  double init_scale = 1.0;  // g in N(0, g^2 / fan_in)

  void validate() const;
  int layers_per_block() const { return depth + 1; }
  int layer_in(int l) const { return l == 0 ? n : width; }
  int layer_out(int l) const { return l == depth ? n : width; }
  int64_t param_count() const;
};

class ResNet {
 public:
  struct Gradients {
    std::vector<std::vector<Eigen::MatrixXd>> W;  // [K][depth+1]
    std::vector<std::vector<Eigen::VectorXd>> b;
    void zero(const ResNetConfig& cfg);
    void to_flat(Eigen::VectorXd& out) const;
  };

  ResNet() = default;

  // Weights ~ N(0, g^2/fan_in) from the counter RNG keyed (seed, layer);
  // biases zero. Identical seeds give identical parameters.
  static ResNet init(const ResNetConfig& cfg);

  bool valid() const { return cfg_.n > 0; }
  const ResNetConfig& config() const { return cfg_; }
  int n() const { return cfg_.n; }
  int64_t param_count() const { return cfg_.param_count(); }

  const Eigen::MatrixXd& weight(int block, int layer) const { return W_[block][layer]; }
  Eigen::MatrixXd& weight(int block, int layer) { return W_[block][layer]; }
  const Eigen::VectorXd& bias(int block, int layer) const { return b_[block][layer]; }
  Eigen::VectorXd& bias(int block, int layer) { return b_[block][layer]; }

  // Single-sample forward. A non-finite result is re-traced and reported
  // with the block and layer where it first appears.
  Eigen::VectorXd forward(const Eigen::VectorXd& v) const;

  // Row-wise forward; each row is the same serial computation as forward(),
  // so the result is independent of the worker count.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, bool parallel = true) const;

  // (1/J) sum_j |N(v0_j) - vd_j|^2, accumulated in row order.
  double loss(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
              bool parallel = true) const;

  // Analytic gradients of loss(); the returned loss matches loss() bit for
  // bit (same forward arithmetic, same summation order). Serial over samples.
  double backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  Gradients& grad) const;

  // Deterministic parameter order: block, layer, weight rows, then bias.
  void to_flat(Eigen::VectorXd& out) const;
  void from_flat(const Eigen::VectorXd& flat);

  // Binary format: {magic "MEVM", version u32, n u32, K u32, depth u32,
  // width u32, activation u32, seed u64, g f64} + parameters as f64 LE in
  // the flat order above.
  void save(const std::string& path) const;
  static ResNet load(const std::string& path);

 private:
  Eigen::VectorXd run_blocks(const Eigen::VectorXd& v) const;
  [[noreturn]] void trace_failure(const Eigen::VectorXd& v) const;

  ResNetConfig cfg_;
  std::vector<std::vector<Eigen::MatrixXd>> W_;
  std::vector<std::vector<Eigen::VectorXd>> b_;
};

}  // namespace mevo
