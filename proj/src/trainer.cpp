#include "gappy/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gappy/parallel.hpp"
#include "gappy/rigidity.hpp"
#include "gappy/rng.hpp"

namespace gappy {

void ModelGrads::zero() {
  for (auto& g : encoders) g.zero();
  for (auto& g : decoders) g.zero();
}

double ModelGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& g : encoders) s += g.squared_norm();
  for (const auto& g : decoders) s += g.squared_norm();
  return s;
}

void ModelGrads::scale(double factor) {
  for (auto& g : encoders) g.scale(factor);
  for (auto& g : decoders) g.scale(factor);
}

ModelGrads make_model_grads(const GappyLocaModel& model) {
  ModelGrads g;
  for (std::size_t k = 0; k < model.modality_count(); ++k) {
    g.encoders.push_back(make_grads(model.encoders[k]));
    g.decoders.push_back(make_grads(model.decoders[k]));
  }
  return g;
}

namespace {

struct BurstSlot {
  MlpGrads enc;
  MlpGrads dec;
  double whitening = 0.0;
  double reconstruction = 0.0;
};

void evaluate_slot(const GappyLocaModel& model, const FusionDataset& data,
                   const BurstRef& ref, const TrainConfig& cfg,
                   BurstSlot& slot) {
  const int k = ref.modality;
  slot.enc = make_grads(model.encoders[k]);
  slot.dec = make_grads(model.decoders[k]);
  const AffineMap* map =
      model.input_maps.empty() ? nullptr : &model.input_maps[k];
  const BurstTerms terms = burst_white_recon(
      model.encoders[k], model.decoders[k],
      data.modalities[k].bursts[ref.burst].samples, model.sigmas[k],
      model.lambdas[k], map, cfg.w_white * ref.weight,
      cfg.w_recon * ref.weight, &slot.enc, &slot.dec, cfg.recon_per_sample);
  slot.whitening = terms.whitening;
  slot.reconstruction = terms.reconstruction;
}

void reduce_slots(const std::vector<BurstRef>& batch,
                  std::vector<BurstSlot>& slots, ModelGrads& grads,
                  BatchStats& stats) {
  // Fixed batch-order reduction: identical for any worker count.
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const int k = batch[t].modality;
    grads.encoders[k].add_scaled(slots[t].enc, 1.0);
    grads.decoders[k].add_scaled(slots[t].dec, 1.0);
    stats.whitening_sum[k] += slots[t].whitening;
    stats.reconstruction_sum[k] += slots[t].reconstruction;
  }
}

void init_stats(const GappyLocaModel& model, BatchStats& stats) {
  stats.whitening_sum.assign(model.modality_count(), 0.0);
  stats.reconstruction_sum.assign(model.modality_count(), 0.0);
}

}  // namespace

void batch_gradients_serial(const GappyLocaModel& model,
                            const FusionDataset& data,
                            const std::vector<BurstRef>& batch,
                            const TrainConfig& cfg, ModelGrads& grads,
                            BatchStats& stats) {
  init_stats(model, stats);
  std::vector<BurstSlot> slots(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t)
    evaluate_slot(model, data, batch[t], cfg, slots[t]);
  reduce_slots(batch, slots, grads, stats);
}

void batch_gradients_parallel(const GappyLocaModel& model,
                              const FusionDataset& data,
                              const std::vector<BurstRef>& batch,
                              const TrainConfig& cfg, ModelGrads& grads,
                              BatchStats& stats) {
  init_stats(model, stats);
  std::vector<BurstSlot> slots(batch.size());
  const int n = static_cast<int>(batch.size());
  std::string error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
  for (int t = 0; t < n; ++t) {
    try {
      evaluate_slot(model, data, batch[t], cfg, slots[t]);
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty())
    throw std::runtime_error("batch gradient evaluation failed: " + error);
  reduce_slots(batch, slots, grads, stats);
}

namespace {

AffineMap standardizer_for(const ModalityData& m) {
  const std::size_t dk = static_cast<std::size_t>(m.ambient_dim);
  AffineMap map;
  map.shift.assign(dk, 0.0);
  map.scale.assign(dk, 1.0);
  std::size_t count = 0;
  for (const Burst& b : m.bursts) {
    for (std::size_t s = 0; s < b.samples.rows(); ++s)
      for (std::size_t j = 0; j < dk; ++j) map.shift[j] += b.samples(s, j);
    count += b.samples.rows();
  }
  for (double& v : map.shift) v /= static_cast<double>(count);
  std::vector<double> var(dk, 0.0);
  for (const Burst& b : m.bursts)
    for (std::size_t s = 0; s < b.samples.rows(); ++s)
      for (std::size_t j = 0; j < dk; ++j) {
        const double dvj = b.samples(s, j) - map.shift[j];
        var[j] += dvj * dvj;
      }
  for (std::size_t j = 0; j < dk; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(count));
    map.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return map;
}

void check_finite(double value, const char* term, int modality_id, int epoch) {
  if (std::isfinite(value)) return;
  std::ostringstream msg;
  msg << "training diverged: " << term << " loss is not finite";
  if (modality_id >= 0) msg << " for modality " << modality_id;
  msg << " at epoch " << epoch;
  throw std::runtime_error(msg.str());
}

}  // namespace

TrainResult train(const FusionDataset& data, const TrainConfig& cfg) {
  require_valid(data);
  if (cfg.w_white < 0 || cfg.w_recon < 0 || cfg.w_calib < 0)
    throw std::invalid_argument("train: loss weights must be >= 0");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_bursts < 1)
    throw std::invalid_argument("train: batch_bursts must be >= 1");

  TrainResult result;
  GappyLocaModel& model = result.model;
  TrainHistory& history = result.history;

  const RigidityReport rigidity = check_patch_rigidity(data);
  if (!rigidity.verdict)
    history.warnings.push_back(
        "patch rigidity check fails; the assembled embedding is not uniquely "
        "determined and registration quality may be poor");
  if (data.calibration.empty() && data.modalities.size() > 1)
    history.warnings.push_back(
        "no calibration links; training cannot rigidify the shared space");

  const int d = data.intrinsic_dim;
  const int p = cfg.embedding_dim > 0
                    ? cfg.embedding_dim
                    : (cfg.relax_reflections ? d + 1 : d);
  if (p < d)
    throw std::invalid_argument("train: embedding dimension p must be >= d");

  model.intrinsic_dim = d;
  model.embedding_dim = p;
  const std::size_t K = data.modalities.size();
  for (std::size_t k = 0; k < K; ++k) {
    const ModalityData& m = data.modalities[k];
    model.modality_ids.push_back(m.modality_id);
    model.lambdas.push_back(modality_scale(m, d));
    model.sigmas.push_back(cfg.estimate_sigma ? std::sqrt(model.lambdas.back())
                                              : m.sigma);
    if (cfg.standardize_inputs)
      model.input_maps.push_back(standardizer_for(m));

    std::vector<int> enc_sizes{m.ambient_dim};
    enc_sizes.insert(enc_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    enc_sizes.push_back(p);
    std::vector<int> dec_sizes(enc_sizes.rbegin(), enc_sizes.rend());
    model.encoders.push_back(
        init_mlp(enc_sizes, derive_seed(cfg.seed, 2 * k), cfg.activation));
    model.decoders.push_back(
        init_mlp(dec_sizes, derive_seed(cfg.seed, 2 * k + 1), cfg.activation));
  }

  std::vector<AdamState> enc_opt, dec_opt;
  for (std::size_t k = 0; k < K; ++k) {
    enc_opt.push_back(make_adam(model.encoders[k], cfg.adam));
    dec_opt.push_back(make_adam(model.decoders[k], cfg.adam));
  }

  std::vector<BurstRef> pool;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < data.modalities[k].bursts.size(); ++i)
      pool.push_back({static_cast<int>(k), static_cast<int>(i), 1.0});
  const double n_total = static_cast<double>(pool.size());
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5b0ful));

  ModelGrads grads = make_model_grads(model);
  BatchStats stats;
  bool warned_empty_links = false;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    deterministic_shuffle(pool, shuffle_rng);

    if (cfg.lr_decay != 1.0) {
      const double frac =
          cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 0.0;
      const double lr = cfg.adam.learning_rate * std::pow(cfg.lr_decay, frac);
      for (std::size_t k = 0; k < K; ++k) {
        enc_opt[k].hp.learning_rate = lr;
        dec_opt[k].hp.learning_rate = lr;
      }
    }

    EpochStats row;
    row.epoch = epoch;
    row.whitening.assign(K, 0.0);
    row.reconstruction.assign(K, 0.0);
    double calib_sum = 0.0;
    int steps = 0;

    for (std::size_t start = 0; start < pool.size();
         start += static_cast<std::size_t>(cfg.batch_bursts)) {
      const std::size_t end = std::min(
          pool.size(), start + static_cast<std::size_t>(cfg.batch_bursts));
      std::vector<BurstRef> batch(pool.begin() + start, pool.begin() + end);
      const double bsz = static_cast<double>(batch.size());
      for (BurstRef& ref : batch) {
        const double nk =
            static_cast<double>(data.modalities[ref.modality].bursts.size());
        ref.weight = n_total / (nk * bsz);
      }

      grads.zero();
      batch_gradients_parallel(model, data, batch, cfg, grads, stats);

      bool warn_now = false;
      const double calib = calibration_loss(
          model.encoders, model.input_maps, data,
          cfg.w_calib != 0.0 ? &grads.encoders : nullptr, cfg.w_calib,
          &warn_now);
      if (warn_now && !warned_empty_links) warned_empty_links = true;

      for (std::size_t k = 0; k < K; ++k) {
        check_finite(stats.whitening_sum[k], "whitening",
                     model.modality_ids[k], epoch);
        check_finite(stats.reconstruction_sum[k], "reconstruction",
                     model.modality_ids[k], epoch);
        row.whitening[k] += stats.whitening_sum[k];
        row.reconstruction[k] += stats.reconstruction_sum[k];
      }
      check_finite(calib, "calibration", -1, epoch);
      calib_sum += calib;
      ++steps;

      if (cfg.grad_clip > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        check_finite(norm, "gradient norm", -1, epoch);
        if (norm > cfg.grad_clip) grads.scale(cfg.grad_clip / norm);
      }

      for (std::size_t k = 0; k < K; ++k) {
        adam_step(model.encoders[k], grads.encoders[k], enc_opt[k]);
        adam_step(model.decoders[k], grads.decoders[k], dec_opt[k]);
      }
    }

    row.calibration = steps > 0 ? calib_sum / steps : 0.0;
    row.total = cfg.w_calib * row.calibration;
    for (std::size_t k = 0; k < K; ++k) {
      const double nk =
          static_cast<double>(data.modalities[k].bursts.size());
      row.whitening[k] /= nk;
      row.reconstruction[k] /= nk;
      row.total += cfg.w_white * row.whitening[k] +
                   cfg.w_recon * row.reconstruction[k];
    }
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    history.epochs.push_back(std::move(row));
  }

  if (warned_empty_links)
    history.warnings.push_back(
        "calibration loss is 0: dataset has no calibration links");
  return result;
}

DatasetEmbedding embed_dataset(const GappyLocaModel& model,
                               const FusionDataset& data) {
  if (model.modality_count() != data.modalities.size())
    throw std::invalid_argument("embed_dataset: modality count mismatch");
  DatasetEmbedding out(model.modality_count());
  for (std::size_t k = 0; k < model.modality_count(); ++k) {
    const ModalityData& m = data.modalities[k];
    if (m.ambient_dim != model.encoders[k].input_dim())
      throw std::invalid_argument("embed_dataset: ambient dimension mismatch");
    const AffineMap* map =
        model.input_maps.empty() ? nullptr : &model.input_maps[k];
    out[k].resize(m.bursts.size());
    for (std::size_t i = 0; i < m.bursts.size(); ++i) {
      const Matrix input = map != nullptr && !map->is_identity()
                               ? map->standardize(m.bursts[i].samples)
                               : m.bursts[i].samples;
      out[k][i].samples = forward(model.encoders[k], input);
      out[k][i].mean = column_mean(out[k][i].samples);
    }
  }
  return out;
}

namespace {

using nlohmann::json;

json mlp_to_json(const Mlp& net) {
  json j;
  j["sizes"] = net.sizes;
  j["activation"] = activation_name(net.activation);
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    json flat = json::array();
    const double* w = net.weights[l].data();
    const std::size_t n = net.weights[l].rows() * net.weights[l].cols();
    for (std::size_t i = 0; i < n; ++i) flat.push_back(w[i]);
    weights.push_back(std::move(flat));
    biases.push_back(net.biases[l]);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp mlp_from_json(const json& j, const std::string& where) {
  Mlp net;
  if (!j.contains("sizes") || !j["sizes"].is_array())
    throw std::runtime_error("checkpoint: missing sizes at " + where);
  for (const auto& s : j["sizes"]) net.sizes.push_back(s.get<int>());
  if (net.sizes.size() < 2)
    throw std::runtime_error("checkpoint: bad layer sizes at " + where);
  net.activation = activation_from_name(j.value("activation", "tanh"));
  const json& weights = j.at("weights");
  const json& biases = j.at("biases");
  if (weights.size() + 1 != net.sizes.size() || biases.size() != weights.size())
    throw std::runtime_error("checkpoint: layer count mismatch at " + where);
  for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    const std::size_t rows = static_cast<std::size_t>(net.sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(net.sizes[l]);
    const json& flat = weights[l];
    if (flat.size() != rows * cols)
      throw std::runtime_error("checkpoint: weight size mismatch at " + where);
    Matrix w(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i)
      w.data()[i] = flat[i].get<double>();
    net.weights.push_back(std::move(w));
    std::vector<double> b;
    for (const auto& v : biases[l]) b.push_back(v.get<double>());
    if (b.size() != rows)
      throw std::runtime_error("checkpoint: bias size mismatch at " + where);
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const GappyLocaModel& model,
                     const CheckpointMeta& meta) {
  json j;
  j["format"] = "gappy-loca-checkpoint";
  j["intrinsic_dim"] = model.intrinsic_dim;
  j["embedding_dim"] = model.embedding_dim;
  json mods = json::array();
  for (std::size_t k = 0; k < model.modality_count(); ++k) {
    json jm;
    jm["modality_id"] = model.modality_ids[k];
    jm["sigma"] = model.sigmas[k];
    jm["lambda"] = model.lambdas[k];
    if (!model.input_maps.empty() && !model.input_maps[k].is_identity()) {
      jm["input_shift"] = model.input_maps[k].shift;
      jm["input_scale"] = model.input_maps[k].scale;
    }
    jm["encoder"] = mlp_to_json(model.encoders[k]);
    jm["decoder"] = mlp_to_json(model.decoders[k]);
    mods.push_back(std::move(jm));
  }
  j["modalities"] = std::move(mods);
  j["training"] = {{"seed", meta.seed},
                   {"epochs", meta.epochs},
                   {"w_white", meta.w_white},
                   {"w_recon", meta.w_recon},
                   {"w_calib", meta.w_calib}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(1);
  if (!out) throw std::runtime_error("write failed: " + path);
}

GappyLocaModel load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint parse error: ") + e.what());
  }
  if (j.value("format", "") != "gappy-loca-checkpoint")
    throw std::runtime_error("checkpoint: unknown format field");
  GappyLocaModel model;
  model.intrinsic_dim = j.at("intrinsic_dim").get<int>();
  model.embedding_dim = j.at("embedding_dim").get<int>();
  bool any_map = false;
  const json& mods = j.at("modalities");
  for (std::size_t k = 0; k < mods.size(); ++k) {
    const std::string where = "modalities[" + std::to_string(k) + "]";
    const json& jm = mods[k];
    model.modality_ids.push_back(jm.at("modality_id").get<int>());
    model.sigmas.push_back(jm.at("sigma").get<double>());
    model.lambdas.push_back(jm.at("lambda").get<double>());
    AffineMap map;
    if (jm.contains("input_shift")) {
      for (const auto& v : jm["input_shift"]) map.shift.push_back(v.get<double>());
      for (const auto& v : jm["input_scale"]) map.scale.push_back(v.get<double>());
      if (map.shift.size() != map.scale.size())
        throw std::runtime_error("checkpoint: input map size mismatch at " + where);
      any_map = true;
    }
    model.input_maps.push_back(std::move(map));
    model.encoders.push_back(mlp_from_json(jm.at("encoder"), where + ".encoder"));
    model.decoders.push_back(mlp_from_json(jm.at("decoder"), where + ".decoder"));
  }
  if (!any_map) model.input_maps.clear();
  if (meta != nullptr) {
    const json& t = j.at("training");
    meta->seed = t.at("seed").get<std::uint64_t>();
    meta->epochs = t.at("epochs").get<int>();
    meta->w_white = t.at("w_white").get<double>();
    meta->w_recon = t.at("w_recon").get<double>();
    meta->w_calib = t.at("w_calib").get<double>();
  }
  return model;
}

}  // namespace gappy
