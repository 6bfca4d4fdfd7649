#include "eiwv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "eiwv/kernels.hpp"

namespace eiwv::nn {

namespace {

double activate(double z, Activation act) {
  return act == Activation::Tanh ? std::tanh(z) : z;
}

// derivative expressed through the post-activation value
double activate_grad(double a, Activation act) {
  return act == Activation::Tanh ? 1.0 - a * a : 1.0;
}

void format_double(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void Gradients::accumulate(const Gradients& other, double scale) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    for (std::size_t i = 0; i < dw[l].size(); ++i) dw[l][i] += scale * other.dw[l][i];
    for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += scale * other.db[l][i];
  }
}

void Gradients::scale_all(double s) {
  for (auto& t : dw)
    for (auto& v : t) v *= s;
  for (auto& t : db)
    for (auto& v : t) v *= s;
}

double Gradients::squared_norm() const {
  double acc = 0.0;
  for (const auto& t : dw)
    for (double v : t) acc += v * v;
  for (const auto& t : db)
    for (double v : t) acc += v * v;
  return acc;
}

DenseNet::DenseNet(const std::vector<std::size_t>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("DenseNet needs at least two sizes");
  layers_.resize(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer& layer = layers_[l];
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.act = (l + 2 == sizes.size()) ? Activation::Identity : Activation::Tanh;
    layer.w.resize(layer.out * layer.in);
    layer.b.assign(layer.out, 0.0);
    const double bound = std::sqrt(6.0 / double(layer.in + layer.out));
    for (auto& v : layer.w) v = uniform(rng, -bound, bound);
  }
}

std::vector<double> DenseNet::forward(std::span<const double> x, ForwardCache* cache) const {
  if (x.size() != input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
  std::vector<double> cur(x.begin(), x.end());
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(cur);
  }
  for (const Layer& layer : layers_) {
    std::vector<double> next(layer.out);
    kernels::affine(layer.w, cur, layer.b, next, layer.out, layer.in);
    for (auto& v : next) v = activate(v, layer.act);
    cur = std::move(next);
    if (cache) cache->activations.push_back(cur);
  }
  return cur;
}

Gradients DenseNet::backward(const ForwardCache& cache, std::span<const double> upstream,
                             std::vector<double>* dx) const {
  if (cache.activations.size() != layers_.size() + 1)
    throw std::invalid_argument("backward: cache does not match net");
  Gradients grads = zero_grads();
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const auto& a_out = cache.activations[li + 1];
    const auto& a_in = cache.activations[li];
    // delta currently holds dL/da_out; convert to dL/dz in place
    for (std::size_t i = 0; i < layer.out; ++i) delta[i] *= activate_grad(a_out[i], layer.act);
    kernels::outer_accumulate(grads.dw[li], delta, a_in, layer.out, layer.in);
    for (std::size_t i = 0; i < layer.out; ++i) grads.db[li][i] += delta[i];
    if (li > 0 || dx) {
      std::vector<double> prev(layer.in);
      kernels::matvec_transpose(layer.w, delta, prev, layer.out, layer.in);
      if (li == 0 && dx) *dx = prev;
      delta = std::move(prev);
    }
  }
  return grads;
}

Gradients DenseNet::zero_grads() const {
  Gradients g;
  g.dw.reserve(layers_.size());
  g.db.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    g.dw.emplace_back(layer.w.size(), 0.0);
    g.db.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

std::size_t DenseNet::param_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.w.size() + layer.b.size();
  return n;
}

bool DenseNet::finite() const {
  for (const Layer& layer : layers_) {
    for (double v : layer.w)
      if (!std::isfinite(v)) return false;
    for (double v : layer.b)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam: shape mismatch");
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  if (m_.size() != params.size()) throw std::invalid_argument("adam: state shape changed");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

void Adam::restore(std::vector<double> m, std::vector<double> v, std::uint64_t t) {
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

void NetOptimizer::step(DenseNet& net, const Gradients& grads) {
  // flatten once per call; nets here are small
  std::vector<double> params;
  std::vector<double> flat;
  params.reserve(net.param_count());
  flat.reserve(net.param_count());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const Layer& layer = net.layers()[l];
    params.insert(params.end(), layer.w.begin(), layer.w.end());
    params.insert(params.end(), layer.b.begin(), layer.b.end());
    flat.insert(flat.end(), grads.dw[l].begin(), grads.dw[l].end());
    flat.insert(flat.end(), grads.db[l].begin(), grads.db[l].end());
  }
  adam_.step(params, flat);
  std::size_t off = 0;
  for (Layer& layer : net.layers()) {
    std::copy(params.begin() + off, params.begin() + off + layer.w.size(), layer.w.begin());
    off += layer.w.size();
    std::copy(params.begin() + off, params.begin() + off + layer.b.size(), layer.b.begin());
    off += layer.b.size();
  }
}

double clip_gradients(Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale_all(max_norm / norm);
  return norm;
}

GaussianHead::GaussianHead(std::size_t dim, double sigma_init, double sigma_min,
                           double sigma_max)
    : log_std_(dim, std::log(sigma_init)),
      log_min_(std::log(sigma_min)),
      log_max_(std::log(sigma_max)) {
  clamp();
}

std::pair<std::vector<double>, double> GaussianHead::sample(std::span<const double> mean,
                                                            Rng& rng) const {
  std::vector<double> raw(mean.size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t j = 0; j < raw.size(); ++j) raw[j] = mean[j] + sigma(j) * gauss(rng);
  return {raw, log_prob(mean, raw)};
}

double GaussianHead::log_prob(std::span<const double> mean, std::span<const double> raw) const {
  constexpr double log_two_pi = 1.8378770664093454836;
  double lp = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double s = sigma(j);
    const double z = (raw[j] - mean[j]) / s;
    lp += -0.5 * z * z - log_std_[j] - 0.5 * log_two_pi;
  }
  return lp;
}

void GaussianHead::log_prob_grads(std::span<const double> mean, std::span<const double> raw,
                                  std::span<double> d_mean, std::span<double> d_log_std) const {
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double s = sigma(j);
    const double z = (raw[j] - mean[j]) / s;
    d_mean[j] = z / s;
    d_log_std[j] = z * z - 1.0;
  }
}

double GaussianHead::entropy() const {
  constexpr double half_log_two_pi_e = 1.4189385332046727418;
  double h = 0.0;
  for (double ls : log_std_) h += half_log_two_pi_e + ls;
  return h;
}

double GaussianHead::sigma(std::size_t j) const { return std::exp(log_std_[j]); }

void GaussianHead::clamp() {
  for (double& ls : log_std_) ls = std::clamp(ls, log_min_, log_max_);
}

std::vector<double> squash_to_range(std::span<const double> raw, double lo, double hi) {
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j)
    out[j] = lo + (hi - lo) * 0.5 * (std::tanh(raw[j]) + 1.0);
  return out;
}

void Checkpoint::add(const std::string& name, std::size_t rows, std::size_t cols,
                     const std::vector<double>& data) {
  if (rows * cols != data.size()) throw std::invalid_argument("checkpoint: shape mismatch");
  tensors.push_back({name, rows, cols, data});
}

const Checkpoint::Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  out << "eiwv-checkpoint 1\n" << tensors.size() << "\n";
  for (const auto& t : tensors) {
    out << t.name << " " << t.rows << " " << t.cols << "\n";
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      if (i) out << ' ';
      format_double(out, t.data[i]);
    }
    out << "\n";
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "eiwv-checkpoint" || version != 1)
    throw std::runtime_error("checkpoint: bad header in " + path);
  std::size_t count = 0;
  in >> count;
  Checkpoint ckpt;
  for (std::size_t k = 0; k < count; ++k) {
    Tensor t;
    in >> t.name >> t.rows >> t.cols;
    t.data.resize(t.rows * t.cols);
    for (auto& v : t.data) in >> v;
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void Checkpoint::pack_net(const std::string& prefix, const DenseNet& net) {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const Layer& layer = net.layers()[l];
    add(prefix + ".w" + std::to_string(l), layer.out, layer.in, layer.w);
    add(prefix + ".b" + std::to_string(l), 1, layer.b.size(), layer.b);
  }
}

void Checkpoint::unpack_net(const std::string& prefix, DenseNet& net) const {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    Layer& layer = net.layers()[l];
    const Tensor& w = get(prefix + ".w" + std::to_string(l));
    const Tensor& b = get(prefix + ".b" + std::to_string(l));
    if (w.rows != layer.out || w.cols != layer.in || b.cols != layer.b.size())
      throw std::runtime_error("checkpoint: tensor shape does not match net");
    layer.w = w.data;
    layer.b = b.data;
  }
}

}  // namespace eiwv::nn
