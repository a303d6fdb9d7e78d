#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hrf/crb.hpp"
#include "hrf/rng.hpp"
#include "hrf/scenario.hpp"
#include "hrf/signal.hpp"

namespace hrf::test {

inline cd random_gain(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng)};
}

// Small synthetic scenario with every path switched on and generic parameter values.
inline ScenarioConfig random_scenario(int P, int K, std::uint64_t seed, int N = 4, int Nu = 3, int L = 3) {
  Rng rng(seed);
  std::uniform_real_distribution<double> ang(-1.0, 1.0), delay(2e-7, 9e-7), dop(-400.0, 400.0);
  ScenarioConfig sc;
  sc.frame = make_frame(3, 2, K, L);
  sc.frame.samples_per_symbol = 4;
  for (auto& p : sc.frame.symbol_power) p = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  sc.sample_index = 1;
  sc.array.bs_tx_antennas = N;
  sc.array.bs_rx_antennas = N + 1;
  sc.array.user_tx_antennas.assign(K, Nu);
  for (int i = 0; i < P; ++i) sc.targets.push_back({ang(rng), delay(rng), dop(rng), random_gain(rng)});
  for (int k = 0; k < K; ++k) {
    UserState u;
    u.aod_rad = ang(rng);
    u.aoa_at_bs_rad = ang(rng);
    u.delay_s = delay(rng);
    u.complex_gain = random_gain(rng);
    for (int i = 0; i < P; ++i) u.reflected_paths.push_back({i, delay(rng) + 1e-6, ang(rng), random_gain(rng)});
    sc.users.push_back(u);
  }
  sc.noise.noise_variance = 1.0;
  sc.bs_power_max_w = 1.0;
  sc.user_power_max_w = 1.0;
  sc.validate();
  return sc;
}

inline VectorXcd random_vector(int n, Rng& rng) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = random_gain(rng, std::sqrt(0.5));
  return v;
}

// Random beams at 80% of each power cap.
inline PrecoderSet random_precoders(const ScenarioConfig& sc, Rng& rng) {
  std::vector<VectorXcd> fk;
  for (int k = 0; k < sc.num_users(); ++k)
    fk.push_back(random_vector(sc.array.user_tx_antennas[k], rng).normalized() * std::sqrt(0.8 * sc.user_power_max_w));
  const VectorXcd f = random_vector(sc.array.bs_tx_antennas, rng).normalized() * std::sqrt(0.8 * sc.bs_power_max_w);
  return PrecoderSet::from_vectors(f, fk);
}

inline Frame noiseless(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym) {
  return synthesize_noiseless(build_channels(sc, sc.sample_index), pre, sym);
}

// Five-point central difference step per parameter family.
inline double fd_step(const ScenarioConfig& sc, ParamKind kind) {
  const double fc = sc.frame.carrier_freq_hz;
  switch (kind) {
    case ParamKind::TargetDelay:
    case ParamKind::UserDelay:
    case ParamKind::PathDelay: return 1e-3 / (2 * kPi * fc);
    case ParamKind::TargetDoppler: return 0.5;
    case ParamKind::TargetGainRe:
    case ParamKind::TargetGainIm:
    case ParamKind::UserGainRe:
    case ParamKind::UserGainIm:
    case ParamKind::PathGainRe:
    case ParamKind::PathGainIm: return 1e-2;
    default: return 1e-4;
  }
}

// d x_l / d psi_e by a fourth-order central difference of the synthesized frame.
inline std::vector<VectorXcd> finite_difference(const ScenarioConfig& sc, const PrecoderSet& pre,
                                                const SymbolFrame& sym, const ParamEntry& e) {
  const double h = fd_step(sc, e.kind);
  const double x0 = parameter_value(sc, e);
  auto at = [&](double dx) {
    ScenarioConfig s = sc;
    set_parameter_value(s, e, x0 + dx);
    return noiseless(s, pre, sym);
  };
  const Frame p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
  std::vector<VectorXcd> d(p1.size());
  for (size_t l = 0; l < p1.size(); ++l) d[l] = (8.0 * (p1[l] - m1[l]) - (p2[l] - m2[l])) / (12.0 * h);
  return d;
}

// Independent Lloyd iteration: centroids by composite Simpson quadrature of the Gaussian density.
struct QuadLloyd {
  std::vector<double> t, y;
  double eta = 0.0;
};

inline double gauss(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * kPi); }

template <class F>
inline double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

inline QuadLloyd quad_lloyd(int cells) {
  const double lim = 12.0;
  QuadLloyd q;
  q.y.resize(cells);
  for (int i = 0; i < cells; ++i) q.y[i] = -2.0 + 4.0 * (i + 0.5) / cells;
  for (int it = 0; it < 5000; ++it) {
    q.t.assign(cells - 1, 0.0);
    for (int i = 0; i + 1 < cells; ++i) q.t[i] = 0.5 * (q.y[i] + q.y[i + 1]);
    double moved = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double a = i == 0 ? -lim : q.t[i - 1], b = i + 1 == cells ? lim : q.t[i];
      const double m0 = simpson(gauss, a, b), m1 = simpson([](double x) { return x * gauss(x); }, a, b);
      const double c = m1 / m0;
      moved = std::max(moved, std::abs(c - q.y[i]));
      q.y[i] = c;
    }
    if (moved < 1e-13) break;
  }
  double mse = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double a = i == 0 ? -lim : q.t[i - 1], b = i + 1 == cells ? lim : q.t[i];
    const double y = q.y[i];
    mse += simpson([y](double x) { return (x - y) * (x - y) * gauss(x); }, a, b);
  }
  q.eta = mse;
  return q;
}

}  // namespace hrf::test
