/// Joint training of K auto-encoder pairs into one shared embedding space.
///
/// Each optimizer step draws a mini-batch of bursts from the pooled shuffled
/// burst list and evaluates whitening + reconstruction gradients per burst;
/// the calibration term runs over the full link set every step (it is tiny
/// and must never be starved). Per-burst evaluation is embarrassingly
/// parallel: the OpenMP kernel fills one slot per burst and a serial
/// reduction in fixed burst order makes results bit-identical for any
/// worker count. A plain serial kernel is kept as the reference
/// implementation; tests assert both produce identical gradients.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gappy/losses.hpp"
#include "gappy/model.hpp"
#include "gappy/nets.hpp"

namespace gappy {

struct GappyLocaModel {
  int intrinsic_dim = 0;
  int embedding_dim = 0;  // p >= d
  std::vector<int> modality_ids;
  std::vector<Mlp> encoders;   // D_k -> p
  std::vector<Mlp> decoders;   // p -> D_k
  std::vector<AffineMap> input_maps;  // identity when empty
  std::vector<double> sigmas;   // per modality, as used by the losses
  std::vector<double> lambdas;  // per modality reconstruction scale

  std::size_t modality_count() const { return encoders.size(); }
};

struct TrainConfig {
  double w_white = 1.0;
  double w_recon = 1.0;
  double w_calib = 1.0;
  // 0 means "choose from d": p = d, or d+1 when relax_reflections is set.
  int embedding_dim = 0;
  // Embeds in p = d+1 to let a trapped reflection escape through the extra
  // dimension; evaluation applies a principal-components projection back to
  // d afterwards.
  bool relax_reflections = false;
  int epochs = 500;
  int batch_bursts = 32;
  AdamParams adam{.learning_rate = 2e-3, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8};
  // Exponential learning-rate decay: the last epoch runs at lr * lr_decay.
  // 1.0 keeps the rate constant.
  double lr_decay = 1.0;
  std::vector<int> hidden = {64, 64, 64};
  Activation activation = Activation::kTanh;
  double grad_clip = 10.0;  // global gradient-norm ceiling; <= 0 disables
  bool standardize_inputs = true;
  // Replace declared sigma with sqrt(lambda_k) for datasets whose sigma is
  // not trustworthy or absent.
  bool estimate_sigma = false;
  bool recon_per_sample = false;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  std::vector<double> whitening;       // per modality, averaged over bursts
  std::vector<double> reconstruction;  // per modality, averaged over bursts
  double calibration = 0.0;            // averaged over steps
  double total = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::vector<std::string> warnings;
};

struct TrainResult {
  GappyLocaModel model;
  TrainHistory history;
};

/// Gradient accumulators for the whole model.
struct ModelGrads {
  std::vector<MlpGrads> encoders;
  std::vector<MlpGrads> decoders;

  void zero();
  double squared_norm() const;
  void scale(double factor);
};

ModelGrads make_model_grads(const GappyLocaModel& model);

/// One burst's slot in a mini-batch. weight folds the batch estimator scale
/// N_total / (N_k * batch_size) so the batch gradient is unbiased for
/// sum_k (1/N_k) sum_i grad_i.
struct BurstRef {
  int modality = 0;
  int burst = 0;
  double weight = 1.0;
};

/// Per-modality sums of unweighted loss values over the batch.
struct BatchStats {
  std::vector<double> whitening_sum;
  std::vector<double> reconstruction_sum;
};

/// Reference implementation: bursts evaluated one after another.
void batch_gradients_serial(const GappyLocaModel& model,
                            const FusionDataset& data,
                            const std::vector<BurstRef>& batch,
                            const TrainConfig& cfg, ModelGrads& grads,
                            BatchStats& stats);

/// OpenMP implementation: per-burst slots filled concurrently, reduced
/// serially in batch order. Bit-identical to the serial kernel.
void batch_gradients_parallel(const GappyLocaModel& model,
                              const FusionDataset& data,
                              const std::vector<BurstRef>& batch,
                              const TrainConfig& cfg, ModelGrads& grads,
                              BatchStats& stats);

/// Full training loop; deterministic per (dataset, config). Throws
/// std::runtime_error naming term, modality, and epoch when a loss value
/// stops being finite.
TrainResult train(const FusionDataset& data, const TrainConfig& cfg);

struct BurstEmbedding {
  std::vector<double> mean;  // rhobar, length p
  Matrix samples;            // M x p per-sample embeddings
};

/// embeddings[k][i] for burst i of modality k.
using DatasetEmbedding = std::vector<std::vector<BurstEmbedding>>;

DatasetEmbedding embed_dataset(const GappyLocaModel& model,
                               const FusionDataset& data);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double w_white = 1.0;
  double w_recon = 1.0;
  double w_calib = 1.0;
};

void save_checkpoint(const std::string& path, const GappyLocaModel& model,
                     const CheckpointMeta& meta);
GappyLocaModel load_checkpoint(const std::string& path,
                               CheckpointMeta* meta = nullptr);

}  // namespace gappy
