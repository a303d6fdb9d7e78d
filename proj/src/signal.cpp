#include "hrf/signal.hpp"

#include <cmath>

namespace hrf {

PrecoderSet PrecoderSet::from_vectors(const VectorXcd& f, const std::vector<VectorXcd>& fk) {
  PrecoderSet p;
  p.bs_precoder = f;
  p.bs_covariance = f * f.adjoint();
  p.user_precoders = fk;
  for (const auto& v : fk) p.user_covariances.push_back(v * v.adjoint());
  return p;
}

PrecoderSet PrecoderSet::steered(const ScenarioConfig& sc, double bs_angle, const std::vector<double>& user_angles) {
  const auto& ar = sc.array;
  const int N = ar.bs_tx_antennas;
  VectorXcd f = std::sqrt(sc.bs_power_max_w / N) * steering_vector(bs_angle, N, ar.element_spacing_wavelengths).conjugate();
  std::vector<VectorXcd> fk;
  for (int k = 0; k < sc.num_users(); ++k) {
    const int nu = ar.user_tx_antennas[k];
    fk.push_back(std::sqrt(sc.user_power_max_w / nu) *
                 steering_vector(user_angles.at(k), nu, ar.element_spacing_wavelengths).conjugate());
  }
  return from_vectors(f, fk);
}

std::vector<std::string> PrecoderSet::violations(const ScenarioConfig& sc) const {
  std::vector<std::string> out;
  const int N = sc.array.bs_tx_antennas;
  const int K = sc.num_users();
  if (bs_precoder.size() != N)
    out.push_back("BS precoder has " + std::to_string(bs_precoder.size()) + " entries, array has " +
                  std::to_string(N));
  if (static_cast<int>(user_precoders.size()) != K)
    out.push_back("expected " + std::to_string(K) + " user precoders, got " + std::to_string(user_precoders.size()));
  for (int k = 0; k < std::min<int>(K, user_precoders.size()); ++k)
    if (user_precoders[k].size() != sc.array.user_tx_antennas[k])
      out.push_back("user " + std::to_string(k) + " precoder size mismatch");
  const double tol = 1e-6;
  if (bs_covariance.size() > 0 && bs_covariance.trace().real() > sc.bs_power_max_w * (1 + tol))
    out.push_back("BS covariance exceeds the power cap");
  for (size_t k = 0; k < user_covariances.size(); ++k)
    if (user_covariances[k].trace().real() > sc.user_power_max_w * (1 + tol))
      out.push_back("user " + std::to_string(k) + " covariance exceeds the power cap");
  return out;
}

SymbolFrame draw_symbols(const FrameConfig& frame, Rng& rng, Constellation c) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::uniform_int_distribution<int> quad(0, 3);
  SymbolFrame s;
  s.values.resize(frame.num_symbols);
  for (int l = 0; l < frame.num_symbols; ++l) {
    for (int k = 0; k <= frame.num_users(); ++k) {
      const double amp = std::sqrt(frame.symbol_power[k]);
      std::vector<cd> row;
      for (size_t mi = 0; mi < frame.stream_subcarriers(k).size(); ++mi) {
        cd b;
        if (c == Constellation::Gaussian) {
          const double re = gauss(rng);
          b = cd(re, gauss(rng));
        } else {
          b = std::polar(1.0, kPi / 4 + kPi / 2 * quad(rng));
        }
        row.push_back(amp * b);
      }
      s.values[l].push_back(std::move(row));
    }
  }
  return s;
}

SymbolFrame constant_symbols(const FrameConfig& frame, cd value) {
  SymbolFrame s;
  s.values.resize(frame.num_symbols);
  for (int l = 0; l < frame.num_symbols; ++l)
    for (int k = 0; k <= frame.num_users(); ++k)
      s.values[l].emplace_back(frame.stream_subcarriers(k).size(), value);
  return s;
}

Frame synthesize_noiseless(const ChannelSet& ch, const PrecoderSet& pre, const SymbolFrame& sym) {
  const int L = static_cast<int>(ch.echo.size());
  if (static_cast<int>(sym.values.size()) != L) throw DimensionError("symbol frame length differs from channel set");
  const int K = L > 0 ? static_cast<int>(ch.direct[0].size()) : 0;
  if (static_cast<int>(pre.user_precoders.size()) != K) throw DimensionError("user precoder count mismatch");

  Frame x;
  x.reserve(L);
  for (int l = 0; l < L; ++l) {
    VectorXcd acc = VectorXcd::Zero(ch.num_rx);
    auto add = [&](const Rank1Channel& h, const VectorXcd& f, cd b) {
      if (h.tx.size() != f.size()) throw DimensionError("precoder size does not match channel");
      acc += (b * h.scale * (h.tx.transpose() * f)(0)) * h.rx;
    };
    for (size_t mi = 0; mi < ch.echo[l].size(); ++mi)
      for (const auto& h : ch.echo[l][mi]) add(h, pre.bs_precoder, sym(l, 0, mi));
    for (int k = 0; k < K; ++k) {
      for (size_t mi = 0; mi < ch.direct[l][k].size(); ++mi) {
        const cd b = sym(l, k + 1, mi);
        add(ch.direct[l][k][mi], pre.user_precoders[k], b);
        for (const auto& h : ch.reflected[l][k][mi]) add(h, pre.user_precoders[k], b);
      }
    }
    x.push_back(std::move(acc));
  }
  return x;
}

Frame draw_received(const Frame& x, const NoiseModel& noise, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(noise.noise_variance / 2.0));
  Frame r = x;
  for (auto& v : r)
    for (Eigen::Index n = 0; n < v.size(); ++n) {
      const double re = g(rng);
      v[n] += cd(re, g(rng));
    }
  return r;
}

Frame quantize_frame(const Frame& r, const QuantizerSpec& spec, const std::vector<double>& component_std) {
  Frame q;
  q.reserve(r.size());
  for (const auto& v : r) {
    if (static_cast<size_t>(v.size()) != component_std.size()) throw DimensionError("AGC scale per antenna mismatch");
    VectorXcd out(v.size());
    for (Eigen::Index n = 0; n < v.size(); ++n) {
      const QuantizerSpec s = spec.scaled(component_std[n]);
      out[n] = cd(s.quantize_component(v[n].real()), s.quantize_component(v[n].imag()));
    }
    q.push_back(std::move(out));
  }
  return q;
}

std::vector<double> agc_component_std(const Frame& x, double noise_variance) {
  if (x.empty()) return {};
  const Eigen::Index N = x[0].size();
  std::vector<double> s(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    double p = 0.0;
    for (const auto& v : x) p += std::norm(v[n]);
    s[n] = std::sqrt((p / x.size() + noise_variance) / 2.0);
  }
  return s;
}

double mean_signal_power(const Frame& x) {
  double p = 0.0;
  size_t count = 0;
  for (const auto& v : x) {
    p += v.squaredNorm();
    count += v.size();
  }
  return count ? p / count : 0.0;
}

MatrixXcd empirical_covariance(const std::vector<VectorXcd>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("empirical covariance needs at least two samples");
  const Eigen::Index N = samples[0].size();
  MatrixXcd R = MatrixXcd::Zero(N, N);
  for (const auto& x : samples) R.noalias() += x * x.adjoint();
  return R / static_cast<double>(samples.size());
}

SampledFrame sample_frame(const ScenarioConfig& sc, const PrecoderSet& pre, const QuantizerSpec& spec,
                          std::uint64_t seed) {
  SampledFrame s;
  Rng rng(derive_seed(seed, 1));
  s.symbols = draw_symbols(sc.frame, rng);
  s.noiseless = synthesize_noiseless(build_channels(sc, sc.sample_index), pre, s.symbols);
  s.received = draw_received(s.noiseless, sc.noise, derive_seed(seed, 2));
  s.quantized = quantize_frame(s.received, spec, agc_component_std(s.noiseless, sc.noise.noise_variance));
  return s;
}

}  // namespace hrf
