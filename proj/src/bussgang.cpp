#include "hrf/bussgang.hpp"

#include <cmath>

namespace hrf {

MatrixXcd signal_covariance(const ChannelSet& ch, const FrameConfig& frame, const MatrixXcd& R0,
                            const std::vector<MatrixXcd>& Rk, int l, EchoTerm echo) {
  const int K = static_cast<int>(ch.direct.at(l).size());
  if (static_cast<int>(Rk.size()) != K) throw DimensionError("one user covariance per user is required");
  MatrixXcd R = MatrixXcd::Zero(ch.num_rx, ch.num_rx);
  for (int k = 0; k < K; ++k) {
    const double s2 = frame.symbol_power.at(k + 1);
    for (size_t mi = 0; mi < ch.direct[l][k].size(); ++mi) {
      const MatrixXcd H = ch.uplink(l, k, static_cast<int>(mi));
      if (H.cols() != Rk[k].rows()) throw DimensionError("user covariance size does not match channel");
      R.noalias() += s2 * H * Rk[k] * H.adjoint();
    }
  }
  if (echo == EchoTerm::Include) {
    const double s2 = frame.symbol_power.at(0);
    for (const auto& row : ch.echo[l]) {
      if (row.empty()) continue;
      MatrixXcd H = row[0].matrix();
      for (size_t i = 1; i < row.size(); ++i) H += row[i].matrix();
      if (H.cols() != R0.rows()) throw DimensionError("BS covariance size does not match channel");
      R.noalias() += s2 * H * R0 * H.adjoint();
    }
  }
  return 0.5 * (R + R.adjoint());
}

MatrixXcd mean_signal_covariance(const ChannelSet& ch, const FrameConfig& frame, const MatrixXcd& R0,
                                 const std::vector<MatrixXcd>& Rk, EchoTerm echo) {
  const int L = static_cast<int>(ch.direct.size());
  MatrixXcd R = MatrixXcd::Zero(ch.num_rx, ch.num_rx);
  for (int l = 0; l < L; ++l) R += signal_covariance(ch, frame, R0, Rk, l, echo);
  return R / static_cast<double>(L);
}

namespace {

MatrixXcd diag_part(const MatrixXcd& A) { return A.diagonal().asDiagonal(); }

// log det of I + L^{-1} A L^{-H} where Z = L L^H.
double log2_det_whitened(const MatrixXcd& A, const MatrixXcd& Z) {
  Eigen::LLT<MatrixXcd> llt(Z);
  if (llt.info() != Eigen::Success) throw std::domain_error("effective noise covariance is not positive definite");
  const auto L = llt.matrixL();
  MatrixXcd W = L.solve(A);
  W = L.solve(W.adjoint().eval()).adjoint();
  MatrixXcd M = MatrixXcd::Identity(A.rows(), A.cols()) + 0.5 * (W + W.adjoint());
  Eigen::LLT<MatrixXcd> m(M);
  if (m.info() != Eigen::Success) throw std::domain_error("signal covariance is not positive semidefinite");
  double s = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) s += std::log(std::real(m.matrixL()(i, i)));
  return 2.0 * s / std::log(2.0);
}

}  // namespace

CovarianceBundle bussgang_covariances(const MatrixXcd& Rxx, const MatrixXcd& Rzz, const MatrixXcd& Rrr, double eta,
                                      NoiseRegime regime) {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
  const Eigen::Index N = Rxx.rows();
  CovarianceBundle b;
  b.signal_cov = Rxx;
  b.noise_cov = Rzz;
  b.received_cov = Rrr;
  b.eta = eta;
  b.regime = regime;
  b.distortion_matrix = (1.0 - eta) * MatrixXcd::Identity(N, N);
  // Low-SNR regime: diag(R_rr) -> diag(R_zz).
  const MatrixXcd d = regime == NoiseRegime::LowSnr ? diag_part(Rzz) : diag_part(Rrr);
  const double g2 = (1.0 - eta) * (1.0 - eta);
  b.effective_noise_cov = g2 * Rzz + eta * (1.0 - eta) * d;
  b.quantized_cov = g2 * Rrr + eta * (1.0 - eta) * d;
  return b;
}

ArcsineCovariances arcsine_covariances_1bit(const MatrixXcd& Rrr, const MatrixXcd& Rzz) {
  const Eigen::Index N = Rrr.rows();
  if (Eigen::LLT<MatrixXcd>(Rrr).info() != Eigen::Success)
    throw std::domain_error("received covariance must be positive definite");
  VectorXd s(N);
  for (Eigen::Index i = 0; i < N; ++i) s[i] = 1.0 / std::sqrt(Rrr(i, i).real());
  const MatrixXcd rho = s.asDiagonal() * Rrr * s.asDiagonal();
  MatrixXcd as(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      const double re = std::clamp(rho(i, j).real(), -1.0, 1.0);
      const double im = std::clamp(rho(i, j).imag(), -1.0, 1.0);
      as(i, j) = cd(std::asin(re), std::asin(im));
    }
  ArcsineCovariances a;
  const double k = 2.0 / kPi;
  a.quantized_cov = k * as;
  a.distortion_matrix = std::sqrt(k) * s.asDiagonal();
  a.cross_cov = a.distortion_matrix * Rrr;
  a.effective_noise_cov = k * (as - rho + s.asDiagonal() * Rzz * s.asDiagonal());
  return a;
}

MatrixXd AoaFimMap::evaluate(const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk) const {
  MatrixXd F = MatrixXd::Zero(num_targets, num_targets);
  for (int i = 0; i < num_targets; ++i)
    for (int j = 0; j < num_targets; ++j) {
      double v = 0.0;
      if (!bs.empty()) v += (R0.cwiseProduct(bs[i][j].transpose())).sum().real();
      for (size_t k = 0; k < user.size(); ++k) v += (Rk.at(k).cwiseProduct(user[k][i][j].transpose())).sum().real();
      F(i, j) = v;
    }
  return 0.5 * (F + F.transpose());
}

AoaFimMap aoa_fim_map(const ScenarioConfig& sc, double eta, const AoaFimOptions& opt) {
  sc.validate();
  const auto& fr = sc.frame;
  const auto& ar = sc.array;
  const double d = ar.element_spacing_wavelengths;
  const int P = sc.num_targets();
  const int K = sc.num_users();
  const int Nr = ar.bs_rx_antennas, Nt = ar.bs_tx_antennas;
  const int L = fr.num_symbols;
  const int v = sc.sample_index;
  const double T = fr.symbol_duration();

  AoaFimMap map;
  map.num_targets = P;
  map.scale = 2.0 * (1.0 - eta) / sc.noise.noise_variance;

  auto gamma = [&](int i, int l) { return std::polar(1.0, 2.0 * kPi * sc.targets[i].doppler_hz * l * T); };

  // Echo blocks: A^i_{n,l,m} = gamma_i c_m(2 tau_i) (adot_{n,r} a_t^T + a_{n,r} adot_t^T).
  map.bs.assign(P, std::vector<MatrixXcd>(P, MatrixXcd::Zero(Nt, Nt)));
  if (opt.include_echo) {
    std::vector<MatrixXcd> U(P);  // row n holds the n-th antenna's transmit-side vector
    for (int i = 0; i < P; ++i) {
      const double th = sc.targets[i].aoa_rad;
      const VectorXcd a_r = steering_vector(th, Nr, d), ad_r = steering_derivative(th, Nr, d);
      const VectorXcd a_t = steering_vector(th, Nt, d), ad_t = steering_derivative(th, Nt, d);
      U[i] = ad_r * a_t.transpose() + a_r * ad_t.transpose();
    }
    const double s0 = fr.symbol_power[0];
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        cd phase = 0.0;
        for (int l = 0; l < L; ++l)
          for (int m : fr.dl_subcarriers) {
            const cd si = sc.targets[i].complex_gain * gamma(i, l) * subcarrier_phase(m, 2.0 * sc.targets[i].one_way_delay_s, v, fr);
            const cd sj = sc.targets[j].complex_gain * gamma(j, l) * subcarrier_phase(m, 2.0 * sc.targets[j].one_way_delay_s, v, fr);
            phase += std::conj(si) * sj;
          }
        map.bs[i][j] = map.scale * s0 * phase * (U[i].conjugate().transpose() * U[j]);
      }
  }

  // Reflected blocks: B^{k,i}_{n,l,m} = gamma c_m(phi) adot_{n,r}(theta_i) a_u(theta_ki)^T.
  map.user.resize(K);
  for (int k = 0; k < K; ++k) {
    const int nu = ar.user_tx_antennas[k];
    map.user[k].assign(P, std::vector<MatrixXcd>(P, MatrixXcd::Zero(nu, nu)));
    const auto& us = sc.users[k];
    const double sk = fr.symbol_power[k + 1];
    std::vector<int> path_of(P, -1);
    for (size_t p = 0; p < us.reflected_paths.size(); ++p) {
      const bool on = opt.include_path.empty() || opt.include_path.at(k).at(p);
      if (on) path_of[us.reflected_paths[p].target_index] = static_cast<int>(p);
    }
    std::vector<MatrixXcd> V(P);
    for (int i = 0; i < P; ++i) {
      if (path_of[i] < 0) continue;
      const auto& rp = us.reflected_paths[path_of[i]];
      V[i] = steering_derivative(sc.targets[i].aoa_rad, Nr, d) *
             steering_vector(rp.aod_to_target_rad, nu, d).transpose();
    }
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        if (path_of[i] < 0 || path_of[j] < 0) continue;
        const auto& pi = us.reflected_paths[path_of[i]];
        const auto& pj = us.reflected_paths[path_of[j]];
        cd phase = 0.0;
        for (int l = 0; l < L; ++l)
          for (int m : fr.ul_subcarriers[k]) {
            const cd si = pi.complex_gain * gamma(i, l) * subcarrier_phase(m, pi.delay_s, v, fr);
            const cd sj = pj.complex_gain * gamma(j, l) * subcarrier_phase(m, pj.delay_s, v, fr);
            phase += std::conj(si) * sj;
          }
        map.user[k][i][j] = map.scale * sk * phase * (V[i].conjugate().transpose() * V[j]);
      }
  }
  return map;
}

AoaFimBound fim_lower_bound(const ScenarioConfig& sc, const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk,
                            double eta, const AoaFimOptions& options) {
  AoaFimBound b;
  b.map = aoa_fim_map(sc, eta, options);
  b.matrix = b.map.evaluate(R0, Rk);
  return b;
}

const char* rate_model_name(RateModel m) {
  switch (m) {
    case RateModel::General: return "general";
    case RateModel::LowSnr: return "low-snr";
    case RateModel::OneBitLowSnr: return "1bit-low-snr";
  }
  return "?";
}

double rate_general(const MatrixXcd& Rxx, const MatrixXcd& Rzbar, double eta) {
  return log2_det_whitened((1.0 - eta) * (1.0 - eta) * Rxx, Rzbar);
}

double rate_low_snr(const MatrixXcd& Rxx, double eta, double sigma2) {
  const Eigen::Index N = Rxx.rows();
  return log2_det_whitened((1.0 - eta) * Rxx, sigma2 * MatrixXcd::Identity(N, N));
}

double rate_one_bit_low_snr(const MatrixXcd& Rxx, double sigma2) { return 2.0 / (kPi * sigma2) * Rxx.trace().real(); }

double shannon_rate(const MatrixXcd& Rxx, double sigma2) { return rate_low_snr(Rxx, 0.0, sigma2); }

RateBound rate_lower_bound(const MatrixXcd& Rxx, const MatrixXcd& Rzbar, double eta, double sigma2, RateModel model) {
  switch (model) {
    case RateModel::General: return {rate_general(Rxx, Rzbar, eta), model};
    case RateModel::LowSnr: return {rate_low_snr(Rxx, eta, sigma2), model};
    case RateModel::OneBitLowSnr: return {rate_one_bit_low_snr(Rxx, sigma2), model};
  }
  return {};
}

double rate_to_throughput_kbps(double bits_per_use, const FrameConfig& frame) {
  if (!(frame.subcarrier_spacing_hz > 0)) throw std::invalid_argument("subcarrier spacing must be positive");
  return bits_per_use * frame.subcarrier_spacing_hz / 1000.0;
}

}  // namespace hrf
