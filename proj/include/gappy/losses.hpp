/// The three training losses and their exact gradients.
///
/// Whitening, per burst: || C(rho(Y))/sigma^2 - I_p ||_F^2 with C the
/// unbiased sample covariance of the embedded burst. Its encoder gradient
/// flows through the covariance: dL/dE = 4/(sigma^2 (M-1)) * Ehat * A with
/// Ehat the centered embedded samples and A = C/sigma^2 - I.
///
/// Reconstruction, per modality: (1/N_k) sum_i sum_{y in Y_i}
/// ||y - gamma(rho(y))||^2 / (lambda_k D_k). The formula deliberately has no
/// 1/M factor; a flag enables per-sample averaging for scale comparisons.
///
/// Calibration, over links I: (1/|I|) sum ||rhobar^k_i - rhobar^s_j||^2 /
/// (d sigma^2), with rhobar the mean embedded burst and sigma^2 averaged
/// across the two modalities when they declare different values.

#pragma once

#include "gappy/matrix.hpp"
#include "gappy/model.hpp"
#include "gappy/nets.hpp"

namespace gappy {

/// Optional per-coordinate input standardization applied before encoders;
/// decoders emit standardized coordinates that are mapped back before the
/// reconstruction residual. An empty map is the identity.
struct AffineMap {
  std::vector<double> shift;
  std::vector<double> scale;

  bool is_identity() const { return shift.empty(); }
  Matrix standardize(const Matrix& raw) const;
  void destandardize_row(double* row, std::size_t n) const;
};

/// Unbiased sample covariance of the rows (divisor M-1). Throws for M < 2.
Matrix burst_covariance(const Matrix& embedded);

/// Whitening loss of one burst. Returns the unweighted scalar; when grads is
/// non-null, accumulates weight * dLoss/dparams into it.
double whitening_loss(const Mlp& encoder, const Matrix& burst_samples,
                      double sigma, const AffineMap* input_map = nullptr,
                      MlpGrads* grads = nullptr, double weight = 1.0);

/// lambda_k: lower median over bursts of the d-th largest eigenvalue of each
/// burst's raw observation covariance. Throws when d exceeds the ambient
/// dimension.
double modality_scale(const ModalityData& modality, int d);

/// Reconstruction loss over a whole modality, normalized by 1/N_k.
double reconstruction_loss(const Mlp& encoder, const Mlp& decoder,
                           const ModalityData& modality, double lambda,
                           const AffineMap* input_map = nullptr,
                           MlpGrads* encoder_grads = nullptr,
                           MlpGrads* decoder_grads = nullptr,
                           double weight = 1.0, bool per_sample = false);

/// Single-burst reconstruction term (no 1/N_k); building block for batches.
double reconstruction_loss_burst(const Mlp& encoder, const Mlp& decoder,
                                 const Matrix& burst_samples, double lambda,
                                 const AffineMap* input_map = nullptr,
                                 MlpGrads* encoder_grads = nullptr,
                                 MlpGrads* decoder_grads = nullptr,
                                 double weight = 1.0, bool per_sample = false);

/// Fused whitening + reconstruction for one burst, sharing the encoder
/// forward pass. Gradients are scaled by the respective weights (which carry
/// all batch normalization). Loss values returned unweighted.
struct BurstTerms {
  double whitening = 0.0;
  double reconstruction = 0.0;
};
BurstTerms burst_white_recon(const Mlp& encoder, const Mlp& decoder,
                             const Matrix& burst_samples, double sigma,
                             double lambda, const AffineMap* input_map,
                             double w_white, double w_recon,
                             MlpGrads* encoder_grads, MlpGrads* decoder_grads,
                             bool recon_per_sample);

/// Calibration loss across all links. encoders[k] embeds modality k through
/// input_maps[k] (pass an empty vector for identity). Gradients flow to both
/// encoders of every link. No links: returns 0 and sets *warned_empty.
double calibration_loss(const std::vector<Mlp>& encoders,
                        const std::vector<AffineMap>& input_maps,
                        const FusionDataset& data,
                        std::vector<MlpGrads>* encoder_grads = nullptr,
                        double weight = 1.0, bool* warned_empty = nullptr);

}  // namespace gappy
