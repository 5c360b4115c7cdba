/// Minimal feed-forward network engine: just enough machinery for the
/// encoder/decoder pairs. Forward caches per-layer activations; backward
/// contracts an upstream gradient through the cache, yielding exact
/// reverse-mode parameter and input gradients. No computation graph: the
/// loss-specific paths in the trainer compose these two calls directly.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gappy/matrix.hpp"

namespace gappy {

enum class Activation { kTanh, kSoftplus };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Mlp {
  std::vector<int> sizes;        // input, hidden..., output
  std::vector<Matrix> weights;   // weights[l]: sizes[l+1] x sizes[l]
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::kTanh;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

/// Weights ~ normal(0, 1/sqrt(fan_in)), biases zero, deterministic per seed.
Mlp init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed,
             Activation activation = Activation::kTanh);

struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] = input, .back() = output
};

/// batch is n x input_dim; returns n x output_dim.
Matrix forward(const Mlp& net, const Matrix& batch);
/// Same, retaining per-layer activations for a subsequent backward call.
const Matrix& forward(const Mlp& net, const Matrix& batch, ForwardCache& cache);

/// Gradient accumulator shaped like an Mlp's parameters.
struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  void zero();
  double squared_norm() const;
  void add_scaled(const MlpGrads& other, double factor);
  void scale(double factor);
};

MlpGrads make_grads(const Mlp& net);

/// Accumulates parameter gradients of sum(upstream ⊙ forward(batch)) into
/// grads; optionally also emits gradients w.r.t. the batch itself. cache
/// must come from a forward on the same net and batch.
void backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream,
              MlpGrads& grads, Matrix* input_grads = nullptr);

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpGrads m;  // first moments
  MlpGrads v;  // second moments
  long long step = 0;
  AdamParams hp;
};

AdamState make_adam(const Mlp& net, const AdamParams& hp);

/// Standard Adam with bias correction. Throws on shape mismatch.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state);

}  // namespace gappy
