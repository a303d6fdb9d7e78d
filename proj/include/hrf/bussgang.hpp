#pragma once

#include <vector>

#include "hrf/scenario.hpp"

namespace hrf {

enum class EchoTerm { Exclude, Include };

// R_xx at OFDM symbol l; the echo auto-covariance is added only with EchoTerm::Include.
MatrixXcd signal_covariance(const ChannelSet& channels, const FrameConfig& frame, const MatrixXcd& R0,
                            const std::vector<MatrixXcd>& Rk, int l, EchoTerm echo = EchoTerm::Exclude);
MatrixXcd mean_signal_covariance(const ChannelSet& channels, const FrameConfig& frame, const MatrixXcd& R0,
                                 const std::vector<MatrixXcd>& Rk, EchoTerm echo = EchoTerm::Exclude);

enum class NoiseRegime { Approximate, LowSnr };

struct CovarianceBundle {
  MatrixXcd signal_cov;
  MatrixXcd noise_cov;
  MatrixXcd received_cov;
  MatrixXcd distortion_matrix;
  MatrixXcd effective_noise_cov;
  MatrixXcd quantized_cov;
  double eta = 0.0;
  NoiseRegime regime = NoiseRegime::Approximate;
};

CovarianceBundle bussgang_covariances(const MatrixXcd& Rxx, const MatrixXcd& Rzz, const MatrixXcd& Rrr, double eta,
                                      NoiseRegime regime = NoiseRegime::Approximate);

struct ArcsineCovariances {
  MatrixXcd quantized_cov;      // R_{r^q r^q}
  MatrixXcd cross_cov;          // R_{r^q r}
  MatrixXcd distortion_matrix;  // G
  MatrixXcd effective_noise_cov;
};

// Unit-power sign quantizer (Re and Im mapped to +-1/sqrt(2)).
ArcsineCovariances arcsine_covariances_1bit(const MatrixXcd& Rrr, const MatrixXcd& Rzz);

struct AoaFimOptions {
  bool include_echo = true;
  // include_path[k][p] gates reflected path p of user k; empty keeps every path.
  std::vector<std::vector<bool>> include_path;
};

// Linear map (R0, R_k) -> P x P AoA Fisher information with [F]_ij = Re tr(R0 Q0_ij) + sum_k Re tr(R_k Qk_ij).
struct AoaFimMap {
  int num_targets = 0;
  double scale = 0.0;  // 2 (1 - eta) / sigma^2
  std::vector<std::vector<MatrixXcd>> bs;
  std::vector<std::vector<std::vector<MatrixXcd>>> user;

  MatrixXd evaluate(const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk) const;
};

AoaFimMap aoa_fim_map(const ScenarioConfig& sc, double eta, const AoaFimOptions& options = {});

struct AoaFimBound {
  MatrixXd matrix;
  AoaFimMap map;
  bool low_snr_assumed = true;
};

AoaFimBound fim_lower_bound(const ScenarioConfig& sc, const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk,
                            double eta, const AoaFimOptions& options = {});

enum class RateModel { General, LowSnr, OneBitLowSnr };

const char* rate_model_name(RateModel m);

// log2 det(I + Rzbar^{-1} (1 - eta)^2 Rxx)
double rate_general(const MatrixXcd& Rxx, const MatrixXcd& Rzbar, double eta);
// log2 det(I + (1 - eta) / sigma^2 Rxx)
double rate_low_snr(const MatrixXcd& Rxx, double eta, double sigma2);
// 2 / (pi sigma^2) tr(Rxx), literal trace form without a 1/ln 2 factor
double rate_one_bit_low_snr(const MatrixXcd& Rxx, double sigma2);
double shannon_rate(const MatrixXcd& Rxx, double sigma2);

struct RateBound {
  double bits_per_use = 0.0;
  RateModel model = RateModel::LowSnr;
};

// Rzbar is used by the general model only; eta is ignored by the 1-bit model.
RateBound rate_lower_bound(const MatrixXcd& Rxx, const MatrixXcd& Rzbar, double eta, double sigma2, RateModel model);

double rate_to_throughput_kbps(double bits_per_use, const FrameConfig& frame);

}  // namespace hrf
