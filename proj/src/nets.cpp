#include "gappy/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "gappy/rng.hpp"

namespace gappy {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kSoftplus:
      // log(1+exp(z)) computed without overflow for large |z|.
      return z > 30.0 ? z : std::log1p(std::exp(z));
  }
  return z;
}

// Both activations admit a derivative in terms of their own value, which
// saves caching pre-activations: tanh' = 1 - v^2, and for softplus
// v = log(1+e^z) gives sigmoid(z) = 1 - e^{-v}.
double derivative_from_value(Activation a, double value) {
  switch (a) {
    case Activation::kTanh:
      return 1.0 - value * value;
    case Activation::kSoftplus:
      return 1.0 - std::exp(-value);
  }
  return 1.0;
}

}  // namespace

std::string activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "softplus";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "softplus") return Activation::kSoftplus;
  throw std::invalid_argument("unknown activation: " + name);
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].rows() * weights[l].cols() + biases[l].size();
  return n;
}

Mlp init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed,
             Activation activation) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_mlp: need at least input and output sizes");
  for (const int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("init_mlp: layer sizes must be positive");

  Mlp net;
  net.sizes = layer_sizes;
  net.activation = activation;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    Matrix w(fan_out, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.rows() * w.cols(); ++i)
      w.data()[i] = scale * rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

const Matrix& forward(const Mlp& net, const Matrix& batch, ForwardCache& cache) {
  if (batch.cols() != static_cast<std::size_t>(net.input_dim()))
    throw std::invalid_argument("forward: batch width != input size");
  cache.activations.clear();
  cache.activations.reserve(net.layer_count() + 1);
  cache.activations.push_back(batch);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Matrix z = matmul_nt(cache.activations.back(), net.weights[l]);
    const std::vector<double>& b = net.biases[l];
    const bool hidden = l + 1 < net.layer_count();
    for (std::size_t i = 0; i < z.rows(); ++i) {
      double* zi = z.data() + i * z.cols();
      for (std::size_t j = 0; j < z.cols(); ++j) {
        zi[j] += b[j];
        if (hidden) zi[j] = activate(net.activation, zi[j]);
      }
    }
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

Matrix forward(const Mlp& net, const Matrix& batch) {
  ForwardCache cache;
  forward(net, batch, cache);
  return std::move(cache.activations.back());
}

void MlpGrads::zero() {
  for (auto& w : weights) w.fill(0.0);
  for (auto& b : biases) b.assign(b.size(), 0.0);
}

double MlpGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += frobenius_squared(w);
  for (const auto& b : biases)
    for (const double v : b) s += v * v;
  return s;
}

void MlpGrads::add_scaled(const MlpGrads& other, double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    check_shape(weights[l].rows() == other.weights[l].rows() &&
                    weights[l].cols() == other.weights[l].cols(),
                "MlpGrads::add_scaled: shape mismatch");
    const double* src = other.weights[l].data();
    double* dst = weights[l].data();
    const std::size_t n = weights[l].rows() * weights[l].cols();
    for (std::size_t i = 0; i < n; ++i) dst[i] += factor * src[i];
    for (std::size_t i = 0; i < biases[l].size(); ++i)
      biases[l][i] += factor * other.biases[l][i];
  }
}

void MlpGrads::scale(double factor) {
  for (auto& w : weights) {
    double* p = w.data();
    for (std::size_t i = 0; i < w.rows() * w.cols(); ++i) p[i] *= factor;
  }
  for (auto& b : biases)
    for (double& v : b) v *= factor;
}

MlpGrads make_grads(const Mlp& net) {
  MlpGrads g;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    g.weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

void backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream,
              MlpGrads& grads, Matrix* input_grads) {
  const std::size_t layers = net.layer_count();
  if (cache.activations.size() != layers + 1)
    throw std::invalid_argument("backward: cache does not match net");
  const Matrix& out = cache.activations.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  if (grads.weights.size() != layers)
    throw std::invalid_argument("backward: gradient accumulator mismatch");

  // delta holds dLoss/d(pre-activation of layer l); the output layer is
  // linear so it starts as the upstream itself.
  Matrix delta = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& below = cache.activations[l];
    add_matmul_tn(delta, below, grads.weights[l]);
    std::vector<double>& db = grads.biases[l];
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      const double* di = delta.data() + i * delta.cols();
      for (std::size_t j = 0; j < delta.cols(); ++j) db[j] += di[j];
    }
    if (l == 0 && input_grads == nullptr) break;
    Matrix next = matmul(delta, net.weights[l]);
    if (l > 0) {
      // below is the post-activation output of hidden layer l-1.
      for (std::size_t i = 0; i < next.rows(); ++i) {
        double* ni = next.data() + i * next.cols();
        const double* ai = below.data() + i * below.cols();
        for (std::size_t j = 0; j < next.cols(); ++j)
          ni[j] *= derivative_from_value(net.activation, ai[j]);
      }
    }
    delta = std::move(next);
    if (l == 0 && input_grads != nullptr) *input_grads = std::move(delta);
  }
}

AdamState make_adam(const Mlp& net, const AdamParams& hp) {
  AdamState state;
  state.m = make_grads(net);
  state.v = make_grads(net);
  state.hp = hp;
  return state;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state) {
  if (grads.weights.size() != net.layer_count())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  state.step += 1;
  const AdamParams& hp = state.hp;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    check_shape(grads.weights[l].rows() == net.weights[l].rows() &&
                    grads.weights[l].cols() == net.weights[l].cols(),
                "adam_step: weight gradient shape mismatch");
    const std::size_t n = net.weights[l].rows() * net.weights[l].cols();
    double* w = net.weights[l].data();
    const double* g = grads.weights[l].data();
    double* m = state.m.weights[l].data();
    double* v = state.v.weights[l].data();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= hp.learning_rate * mhat / (std::sqrt(vhat) + hp.eps);
    }
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
      double& m2 = state.m.biases[l][i];
      double& v2 = state.v.biases[l][i];
      const double gb = grads.biases[l][i];
      m2 = hp.beta1 * m2 + (1.0 - hp.beta1) * gb;
      v2 = hp.beta2 * v2 + (1.0 - hp.beta2) * gb * gb;
      net.biases[l][i] -= hp.learning_rate * (m2 / bc1) / (std::sqrt(v2 / bc2) + hp.eps);
    }
  }
}

}  // namespace gappy
