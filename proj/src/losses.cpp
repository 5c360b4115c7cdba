#include "gappy/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "gappy/linalg.hpp"

namespace gappy {

Matrix AffineMap::standardize(const Matrix& raw) const {
  if (is_identity()) return raw;
  check_shape(raw.cols() == shift.size(), "AffineMap: width mismatch");
  Matrix out(raw.rows(), raw.cols());
  for (std::size_t i = 0; i < raw.rows(); ++i)
    for (std::size_t j = 0; j < raw.cols(); ++j)
      out(i, j) = (raw(i, j) - shift[j]) / scale[j];
  return out;
}

void AffineMap::destandardize_row(double* row, std::size_t n) const {
  if (is_identity()) return;
  check_shape(n == shift.size(), "AffineMap: width mismatch");
  for (std::size_t j = 0; j < n; ++j) row[j] = row[j] * scale[j] + shift[j];
}

Matrix burst_covariance(const Matrix& embedded) {
  const std::size_t m = embedded.rows(), p = embedded.cols();
  if (m < 2)
    throw std::invalid_argument("burst_covariance: need M >= 2 samples");
  const auto mean = column_mean(embedded);
  Matrix cov(p, p);
  for (std::size_t s = 0; s < m; ++s) {
    const double* row = embedded.data() + s * p;
    for (std::size_t a = 0; a < p; ++a) {
      const double da = row[a] - mean[a];
      for (std::size_t b = a; b < p; ++b)
        cov(a, b) += da * (row[b] - mean[b]);
    }
  }
  const double inv = 1.0 / static_cast<double>(m - 1);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) *= inv;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

namespace {

// Shared core: embedded burst E (M x p) -> loss and dLoss/dE.
double whitening_from_embedded(const Matrix& embedded, double sigma,
                               Matrix* d_embedded) {
  const std::size_t m = embedded.rows(), p = embedded.cols();
  const double inv_var = 1.0 / (sigma * sigma);
  const Matrix cov = burst_covariance(embedded);
  // A = C/sigma^2 - I
  Matrix a(p, p);
  double loss = 0.0;
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      a(r, c) = cov(r, c) * inv_var - (r == c ? 1.0 : 0.0);
      loss += a(r, c) * a(r, c);
    }
  if (d_embedded != nullptr) {
    const auto mean = column_mean(embedded);
    Matrix centered(m, p);
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t j = 0; j < p; ++j)
        centered(s, j) = embedded(s, j) - mean[j];
    *d_embedded = matmul(centered, a);
    const double factor = 4.0 * inv_var / static_cast<double>(m - 1);
    double* g = d_embedded->data();
    for (std::size_t i = 0; i < m * p; ++i) g[i] *= factor;
  }
  return loss;
}

}  // namespace

double whitening_loss(const Mlp& encoder, const Matrix& burst_samples,
                      double sigma, const AffineMap* input_map, MlpGrads* grads,
                      double weight) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("whitening_loss: sigma must be > 0");
  const Matrix input = input_map != nullptr && !input_map->is_identity()
                           ? input_map->standardize(burst_samples)
                           : burst_samples;
  ForwardCache cache;
  const Matrix& embedded = forward(encoder, input, cache);
  if (grads == nullptr) return whitening_from_embedded(embedded, sigma, nullptr);
  Matrix upstream;
  const double loss = whitening_from_embedded(embedded, sigma, &upstream);
  if (weight != 1.0) {
    double* u = upstream.data();
    for (std::size_t i = 0; i < upstream.rows() * upstream.cols(); ++i)
      u[i] *= weight;
  }
  backward(encoder, cache, upstream, *grads);
  return loss;
}

double modality_scale(const ModalityData& modality, int d) {
  if (modality.bursts.empty())
    throw std::invalid_argument("modality_scale: no bursts");
  if (d < 1 || d > modality.ambient_dim)
    throw std::invalid_argument(
        "modality_scale: d must lie in [1, ambient_dim]");
  std::vector<double> dth;
  dth.reserve(modality.bursts.size());
  for (const Burst& b : modality.bursts) {
    const Matrix cov = burst_covariance(b.samples);
    const EigResult eig = sym_eig_small(cov);
    dth.push_back(eig.values[d - 1]);
  }
  std::sort(dth.begin(), dth.end());
  // Lower median: for even counts take the smaller of the two middles.
  return dth[(dth.size() - 1) / 2];
}

BurstTerms burst_white_recon(const Mlp& encoder, const Mlp& decoder,
                             const Matrix& burst_samples, double sigma,
                             double lambda, const AffineMap* input_map,
                             double w_white, double w_recon,
                             MlpGrads* encoder_grads, MlpGrads* decoder_grads,
                             bool recon_per_sample) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("burst terms: sigma must be > 0");
  if (!(lambda > 0.0))
    throw std::invalid_argument("burst terms: lambda must be > 0");
  const std::size_t m = burst_samples.rows();
  const std::size_t dk = burst_samples.cols();
  const bool mapped = input_map != nullptr && !input_map->is_identity();
  const Matrix input =
      mapped ? input_map->standardize(burst_samples) : burst_samples;

  ForwardCache enc_cache;
  const Matrix& embedded = forward(encoder, input, enc_cache);

  BurstTerms terms;
  Matrix enc_upstream(embedded.rows(), embedded.cols());

  // Whitening through the shared encoder forward.
  {
    const bool want = encoder_grads != nullptr && w_white != 0.0;
    Matrix white_up;
    terms.whitening =
        whitening_from_embedded(embedded, sigma, want ? &white_up : nullptr);
    if (want) {
      double* dst = enc_upstream.data();
      const double* src = white_up.data();
      for (std::size_t i = 0; i < m * embedded.cols(); ++i)
        dst[i] += w_white * src[i];
    }
  }

  // Reconstruction: decode, destandardize, residual against the raw burst.
  {
    const bool want_recon_grads =
        w_recon != 0.0 && (encoder_grads != nullptr || decoder_grads != nullptr);
    if (want_recon_grads && (encoder_grads == nullptr || decoder_grads == nullptr))
      throw std::invalid_argument(
          "burst terms: reconstruction gradients need both accumulators");
    ForwardCache dec_cache;
    Matrix decoded = forward(decoder, embedded, dec_cache);
    const double denom = lambda * static_cast<double>(dk) *
                         (recon_per_sample ? static_cast<double>(m) : 1.0);
    Matrix dec_upstream(m, dk);
    double sum = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      double* row = decoded.data() + s * dk;
      if (mapped) input_map->destandardize_row(row, dk);
      const double* raw = burst_samples.data() + s * dk;
      double* up = dec_upstream.data() + s * dk;
      for (std::size_t j = 0; j < dk; ++j) {
        const double r = row[j] - raw[j];
        sum += r * r;
        up[j] = 2.0 * r / denom;
      }
    }
    terms.reconstruction = sum / denom;
    if (want_recon_grads) {
      if (mapped) {
        // Chain rule through destandardization: d(raw)/d(std) = scale.
        for (std::size_t s = 0; s < m; ++s) {
          double* up = dec_upstream.data() + s * dk;
          for (std::size_t j = 0; j < dk; ++j)
            up[j] *= input_map->scale[j];
        }
      }
      if (w_recon != 1.0) {
        double* up = dec_upstream.data();
        for (std::size_t i = 0; i < m * dk; ++i) up[i] *= w_recon;
      }
      Matrix through_decoder;
      backward(decoder, dec_cache, dec_upstream, *decoder_grads,
               &through_decoder);
      double* dst = enc_upstream.data();
      const double* src = through_decoder.data();
      for (std::size_t i = 0; i < m * embedded.cols(); ++i) dst[i] += src[i];
    }
  }

  if (encoder_grads != nullptr && (w_white != 0.0 || w_recon != 0.0))
    backward(encoder, enc_cache, enc_upstream, *encoder_grads);
  return terms;
}

double reconstruction_loss_burst(const Mlp& encoder, const Mlp& decoder,
                                 const Matrix& burst_samples, double lambda,
                                 const AffineMap* input_map,
                                 MlpGrads* encoder_grads,
                                 MlpGrads* decoder_grads, double weight,
                                 bool per_sample) {
  // Reuse the fused path with the whitening side disabled; sigma is unused
  // by the reconstruction term, any positive value works.
  MlpGrads* eg = encoder_grads;
  MlpGrads* dg = decoder_grads;
  const BurstTerms terms =
      burst_white_recon(encoder, decoder, burst_samples, 1.0, lambda,
                        input_map, 0.0, weight, eg, dg, per_sample);
  return terms.reconstruction;
}

double reconstruction_loss(const Mlp& encoder, const Mlp& decoder,
                           const ModalityData& modality, double lambda,
                           const AffineMap* input_map, MlpGrads* encoder_grads,
                           MlpGrads* decoder_grads, double weight,
                           bool per_sample) {
  const double n = static_cast<double>(modality.bursts.size());
  double total = 0.0;
  for (const Burst& b : modality.bursts)
    total += reconstruction_loss_burst(encoder, decoder, b.samples, lambda,
                                       input_map, encoder_grads, decoder_grads,
                                       weight / n, per_sample);
  return total / n;
}

double calibration_loss(const std::vector<Mlp>& encoders,
                        const std::vector<AffineMap>& input_maps,
                        const FusionDataset& data,
                        std::vector<MlpGrads>* encoder_grads, double weight,
                        bool* warned_empty) {
  if (data.calibration.empty()) {
    if (warned_empty != nullptr) *warned_empty = true;
    return 0.0;
  }
  if (encoders.size() != data.modalities.size())
    throw std::invalid_argument("calibration_loss: encoder count mismatch");

  const int d = data.intrinsic_dim;
  const double inv_links = 1.0 / static_cast<double>(data.calibration.size());

  // Bursts referenced by several links are embedded once; upstreams
  // accumulate per burst so each needs exactly one backward pass.
  struct Entry {
    ForwardCache cache;
    std::vector<double> mean;
    Matrix upstream;  // allocated lazily when gradients are requested
  };
  std::map<std::pair<int, int>, Entry> entries;
  const auto entry_of = [&](int mod, int burst) -> Entry& {
    const auto key = std::make_pair(mod, burst);
    auto it = entries.find(key);
    if (it != entries.end()) return it->second;
    Entry e;
    const Matrix& raw = data.modalities[mod].bursts[burst].samples;
    const AffineMap* map =
        mod < static_cast<int>(input_maps.size()) ? &input_maps[mod] : nullptr;
    const Matrix input = map != nullptr && !map->is_identity()
                             ? map->standardize(raw)
                             : raw;
    const Matrix& embedded = forward(encoders[mod], input, e.cache);
    e.mean = column_mean(embedded);
    return entries.emplace(key, std::move(e)).first->second;
  };

  double loss = 0.0;
  for (const CalibrationLink& link : data.calibration) {
    Entry& ek = entry_of(link.modality_k, link.burst_i);
    Entry& es = entry_of(link.modality_s, link.burst_j);
    const double sk = data.modalities[link.modality_k].sigma;
    const double ss = data.modalities[link.modality_s].sigma;
    // Linked modalities may declare different sigma; average the variances.
    const double var = 0.5 * (sk * sk + ss * ss);
    const std::size_t p = ek.mean.size();
    double dist2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = ek.mean[j] - es.mean[j];
      dist2 += diff * diff;
    }
    const double denom = static_cast<double>(d) * var;
    loss += dist2 / denom;

    if (encoder_grads != nullptr) {
      for (Entry* e : {&ek, &es}) {
        if (e->upstream.empty())
          e->upstream = Matrix(e->cache.activations.back().rows(), p);
      }
      // dL/d(mean_k) = 2 diff/(|I| d var); each sample of the burst shares
      // it scaled by 1/M.
      const double base = 2.0 * weight * inv_links / denom;
      const double fk = base / static_cast<double>(ek.upstream.rows());
      const double fs = base / static_cast<double>(es.upstream.rows());
      for (std::size_t s = 0; s < ek.upstream.rows(); ++s)
        for (std::size_t j = 0; j < p; ++j)
          ek.upstream(s, j) += fk * (ek.mean[j] - es.mean[j]);
      for (std::size_t s = 0; s < es.upstream.rows(); ++s)
        for (std::size_t j = 0; j < p; ++j)
          es.upstream(s, j) -= fs * (ek.mean[j] - es.mean[j]);
    }
  }

  if (encoder_grads != nullptr) {
    for (auto& [key, entry] : entries) {
      if (entry.upstream.empty()) continue;
      backward(encoders[key.first], entry.cache, entry.upstream,
               (*encoder_grads)[key.first]);
    }
  }
  return loss * inv_links;
}

}  // namespace gappy
