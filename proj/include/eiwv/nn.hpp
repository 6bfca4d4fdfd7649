#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eiwv/rng.hpp"

namespace eiwv::nn {

enum class Activation { Tanh, Identity };

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::Identity;
  std::vector<double> w;  // row-major [out x in]
  std::vector<double> b;  // [out]
};

/// Forward cache: inputs and post-activation outputs of every layer.
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // activations[0] = input
};

/// Gradients with the same shapes as the layer parameters.
struct Gradients {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;

  void accumulate(const Gradients& other, double scale = 1.0);
  void scale_all(double s);
  double squared_norm() const;
};

// Small dense net, manual reverse-mode gradients, no autodiff.
class DenseNet {
 public:
  DenseNet() = default;
  // sizes = {in, h1, ..., out}; hidden layers tanh, output identity.
  DenseNet(const std::vector<std::size_t>& sizes, Rng& rng);

  std::vector<double> forward(std::span<const double> x, ForwardCache* cache = nullptr) const;

  // Exact gradients of a scalar loss with upstream dL/dy; returns dL/dx when
  // dx is non-null.
  Gradients backward(const ForwardCache& cache, std::span<const double> upstream,
                     std::vector<double>* dx = nullptr) const;

  Gradients zero_grads() const;

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t param_count() const;
  bool finite() const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

/// Adam state mirroring one DenseNet (or any list of tensors).
class Adam {
 public:
  Adam() = default;
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update over a flat view of parameters and gradients.
  void step(std::span<double> params, std::span<const double> grads);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::uint64_t steps() const { return t_; }

  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }
  void restore(std::vector<double> m, std::vector<double> v, std::uint64_t t);

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

// Applies Adam to a net whose gradients were produced by backward(); keeps a
// flat moment buffer across calls.
class NetOptimizer {
 public:
  NetOptimizer() = default;
  explicit NetOptimizer(double lr) : adam_(lr) {}
  void step(DenseNet& net, const Gradients& grads);
  Adam& adam() { return adam_; }
  const Adam& adam() const { return adam_; }

 private:
  Adam adam_;
};

// Scales gradients so their global L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_gradients(Gradients& grads, double max_norm);

/// Diagonal Gaussian policy head over an externally produced mean vector.
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(std::size_t dim, double sigma_init, double sigma_min, double sigma_max);

  std::size_t dim() const { return log_std_.size(); }

  // raw ~ N(mean, sigma^2) elementwise; returns raw and its log-density.
  std::pair<std::vector<double>, double> sample(std::span<const double> mean, Rng& rng) const;

  double log_prob(std::span<const double> mean, std::span<const double> raw) const;

  // d log pi / d mean_j and d log pi / d log_std_j for a given (mean, raw).
  void log_prob_grads(std::span<const double> mean, std::span<const double> raw,
                      std::span<double> d_mean, std::span<double> d_log_std) const;

  double entropy() const;

  double sigma(std::size_t j) const;
  std::vector<double>& log_std() { return log_std_; }
  const std::vector<double>& log_std() const { return log_std_; }
  void clamp();

 private:
  std::vector<double> log_std_;
  double log_min_ = 0.0, log_max_ = 0.0;
};

// Affine-scaled tanh squash of a raw action into [lo, hi]^n.
std::vector<double> squash_to_range(std::span<const double> raw, double lo, double hi);

// Named-tensor checkpoint, plain text with a shape header.
struct Checkpoint {
  struct Tensor {
    std::string name;
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;
  };
  std::vector<Tensor> tensors;

  void add(const std::string& name, std::size_t rows, std::size_t cols,
           const std::vector<double>& data);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  void pack_net(const std::string& prefix, const DenseNet& net);
  void unpack_net(const std::string& prefix, DenseNet& net) const;
};

}  // namespace eiwv::nn
