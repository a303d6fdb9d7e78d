#include "hrf/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "hrf/crb.hpp"
#include "hrf/normal.hpp"
#include "hrf/parallel.hpp"

namespace hrf {

namespace {

constexpr double kLogFloor = -690.7755278982137;  // ln(1e-300)

double log_cell(int cell, double x, const QuantizerSpec& spec, double std, double s) {
  const double lo = spec.lower_edge(cell), hi = spec.upper_edge(cell);
  const double a = std::isinf(lo) ? lo : (lo * std - x) / s;
  const double b = std::isinf(hi) ? hi : (hi * std - x) / s;
  return std::max(kLogFloor, log_normal_cell_probability(a, b));
}

std::vector<std::vector<int>> observed_cells(const Frame& obs, const QuantizerSpec& spec,
                                             const std::vector<double>& stdv) {
  std::vector<std::vector<int>> cells(obs.size());
  for (size_t l = 0; l < obs.size(); ++l) {
    cells[l].resize(2 * obs[l].size());
    for (Eigen::Index n = 0; n < obs[l].size(); ++n) {
      const QuantizerSpec q = spec.scaled(stdv.at(n));
      cells[l][2 * n] = q.cell_index(obs[l][n].real());
      cells[l][2 * n + 1] = q.cell_index(obs[l][n].imag());
    }
  }
  return cells;
}

double quantized_ll(const std::vector<std::vector<int>>& cells, const Frame& cand, const QuantizerSpec& spec,
                    const std::vector<double>& stdv, double s2) {
  const double s = std::sqrt(s2 / 2.0);
  double ll = 0.0;
  for (size_t l = 0; l < cand.size(); ++l)
    for (Eigen::Index n = 0; n < cand[l].size(); ++n) {
      ll += log_cell(cells[l][2 * n], cand[l][n].real(), spec, stdv[n], s);
      ll += log_cell(cells[l][2 * n + 1], cand[l][n].imag(), spec, stdv[n], s);
    }
  return ll;
}

double gaussian_ll(const Frame& obs, const Frame& cand, double s2) {
  double d = 0.0;
  size_t count = 0;
  for (size_t l = 0; l < cand.size(); ++l) {
    d += (obs[l] - cand[l]).squaredNorm();
    count += cand[l].size();
  }
  return -d / s2 - static_cast<double>(count) * std::log(kPi * s2);
}

}  // namespace

size_t AngleGrid::size() const {
  if (!(step_rad > 0) || max_rad < min_rad) return 0;
  return static_cast<size_t>(std::floor((max_rad - min_rad) / step_rad + 1e-9)) + 1;
}

std::vector<std::string> MlExperiment::violations(const ScenarioConfig& sc) const {
  std::vector<std::string> out;
  if (!(grid.step_rad > 0)) out.push_back("grid step must be positive");
  if (grid.max_rad < grid.min_rad) out.push_back("grid range is empty");
  if (trials < 1) out.push_back("trials must be >= 1");
  if (coarse_step_rad < 0) out.push_back("coarse step must be non-negative");
  if (target < 0 || target >= sc.num_targets()) {
    out.push_back("target index out of range");
  } else {
    const double th = sc.targets[target].aoa_rad;
    if (th < grid.min_rad - 1e-12 || th > grid.max_rad + 1e-12) out.push_back("grid does not cover the true angle");
  }
  return out;
}

double log_likelihood(const Frame& obs, const Frame& cand, const QuantizerSpec* spec,
                      const std::vector<double>& stdv, double s2) {
  if (obs.size() != cand.size()) throw DimensionError("observation and candidate lengths differ");
  for (size_t l = 0; l < obs.size(); ++l)
    if (obs[l].size() != cand[l].size()) throw DimensionError("observation and candidate antenna counts differ");
  if (!spec) return gaussian_ll(obs, cand, s2);
  return quantized_ll(observed_cells(obs, *spec, stdv), cand, *spec, stdv, s2);
}

MlSearch::MlSearch(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym, const MlExperiment& exp)
    : exp_(exp) {
  if (auto v = exp.violations(sc); !v.empty()) throw std::invalid_argument("ML experiment: " + v.front());
  const size_t G = exp.grid.size();
  candidates_.resize(G);
  parallel_for(G, exp.threads, [&](size_t g) {
    ScenarioConfig c = sc;
    c.targets[exp.target].aoa_rad = exp.grid.at(g);
    candidates_[g] = synthesize_noiseless(build_channels(c, c.sample_index), pre, sym);
  });
}

double MlSearch::score(size_t i, const Frame& obs, const std::vector<std::vector<int>>* cells,
                       const QuantizerSpec* spec, const std::vector<double>& stdv, double s2) const {
  return spec ? quantized_ll(*cells, candidates_[i], *spec, stdv, s2) : gaussian_ll(obs, candidates_[i], s2);
}

MlOutcome MlSearch::estimate(const Frame& obs, const QuantizerSpec* spec, const std::vector<double>& stdv,
                             double s2) const {
  const size_t G = candidates_.size();
  std::vector<std::vector<int>> cells;
  if (spec) cells = observed_cells(obs, *spec, stdv);
  std::vector<double> ll(G, -std::numeric_limits<double>::infinity());
  std::vector<bool> done(G, false);
  auto eval = [&](size_t i) {
    if (!done[i]) {
      ll[i] = score(i, obs, &cells, spec, stdv, s2);
      done[i] = true;
    }
    return ll[i];
  };

  size_t lo = 0, hi = G - 1;
  const size_t stride =
      exp_.coarse_step_rad > 0 ? std::max<size_t>(1, std::lround(exp_.coarse_step_rad / exp_.grid.step_rad)) : 1;
  if (stride > 1) {
    size_t best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < G; i += stride)
      if (eval(i) > bv) bv = ll[best = i];
    if (eval(G - 1) > bv) best = G - 1;
    lo = best >= stride ? best - stride : 0;
    hi = std::min(G - 1, best + stride);
  }
  size_t best = lo;
  for (size_t i = lo; i <= hi; ++i)
    if (eval(i) > ll[best]) best = i;

  MlOutcome out;
  out.grid_index = best;
  out.estimate_rad = exp_.grid.at(best);
  const double top = ll[best];
  const double tol = 1e-12 * std::max(1.0, std::abs(top));
  size_t first = best, last = best;
  for (size_t i = lo; i <= hi; ++i)
    if (done[i] && ll[i] >= top - tol) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  out.flat = last - first + 1 > 3;
  if (exp_.parabolic_refine && !out.flat && best > 0 && best + 1 < G) {
    const double a = eval(best - 1), b = ll[best], c = eval(best + 1);
    const double den = a - 2.0 * b + c;
    if (den < 0 && std::isfinite(a) && std::isfinite(c)) {
      const double delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
      out.estimate_rad += delta * exp_.grid.step_rad;
    }
  }
  return out;
}

MlOutcome ml_estimate(const Frame& obs, const MlSearch& search, const QuantizerSpec* spec,
                      const std::vector<double>& stdv, double s2) {
  return search.estimate(obs, spec, stdv, s2);
}

double theta_crb(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym, int target,
                 const QuantizerSpec* spec) {
  const ParameterVector basis({{ParamKind::TargetAoa, target}});
  const FisherMatrix F = spec ? quantized_fim(sc, pre, sym, *spec, basis) : ideal_fim(sc, pre, sym, basis);
  const double f = F.matrix(0, 0);
  return f > 0 ? 1.0 / f : std::numeric_limits<double>::infinity();
}

SweepResult mse_vs_crb_sweep(const ScenarioConfig& sc, const PrecoderSet& pre, const MlExperiment& exp) {
  Rng rng(derive_seed(exp.seed, 0x5eed));
  const SymbolFrame sym = draw_symbols(sc.frame, rng);
  const MlSearch search(sc, pre, sym, exp);
  const Frame x = synthesize_noiseless(build_channels(sc, sc.sample_index), pre, sym);
  const double power = mean_signal_power(x);
  const double truth = sc.targets[exp.target].aoa_rad;
  const QuantizerSpec* spec = exp.quantizer ? &*exp.quantizer : nullptr;

  SweepResult res;
  res.seed = exp.seed;
  res.trials = exp.trials;
  res.bits = spec ? spec->bits : 0;
  for (size_t si = 0; si < exp.snr_db.size(); ++si) {
    ScenarioConfig s = sc;
    s.noise.noise_variance = power / db_to_linear(exp.snr_db[si]);
    const double s2 = s.noise.noise_variance;
    const auto stdv = agc_component_std(x, s2);
    std::vector<MlOutcome> outcomes(exp.trials);
    parallel_for(static_cast<size_t>(exp.trials), exp.threads, [&](size_t t) {
      const Frame r = draw_received(x, s.noise, derive_seed(exp.seed, si + 1, t));
      outcomes[t] = spec ? search.estimate(quantize_frame(r, *spec, stdv), spec, stdv, s2)
                         : search.estimate(r, nullptr, stdv, s2);
    });
    SweepPoint p;
    p.snr_db = exp.snr_db[si];
    p.noise_variance = s2;
    p.trials = exp.trials;
    double sum = 0.0, sq = 0.0;
    for (const auto& o : outcomes) {
      const double e = o.estimate_rad - truth;
      sum += e;
      sq += e * e;
      p.flat_trials += o.flat ? 1 : 0;
    }
    p.mse = sq / exp.trials;
    p.bias = sum / exp.trials;
    p.crb = theta_crb(s, pre, sym, exp.target, spec);
    if (p.flat_trials > 0)
      res.warnings.push_back("flat likelihood in " + std::to_string(p.flat_trials) + " trials at " +
                             std::to_string(p.snr_db) + " dB");
    res.points.push_back(p);
  }
  return res;
}

ResonanceResult stochastic_resonance_sweep(const ScenarioConfig& sc, const PrecoderSet& pre,
                                           const std::vector<int>& bits, const std::vector<double>& snr_db,
                                           int target, std::uint64_t seed, int threads) {
  Rng rng(derive_seed(seed, 0x5eed));
  const SymbolFrame sym = draw_symbols(sc.frame, rng);
  const Frame x = synthesize_noiseless(build_channels(sc, sc.sample_index), pre, sym);
  const double power = mean_signal_power(x);

  ResonanceResult res;
  res.snr_db = snr_db;
  std::vector<std::optional<QuantizerSpec>> specs;
  for (int b : bits) specs.emplace_back(design_lloyd_max(b));
  specs.emplace_back(std::nullopt);
  res.curves.resize(specs.size());
  parallel_for(specs.size(), threads, [&](size_t c) {
    auto& curve = res.curves[c];
    curve.bits = specs[c] ? specs[c]->bits : 0;
    for (double snr : snr_db) {
      ScenarioConfig s = sc;
      s.noise.noise_variance = power / db_to_linear(snr);
      curve.crb.push_back(theta_crb(s, pre, sym, target, specs[c] ? &*specs[c] : nullptr));
    }
    const auto it = std::min_element(curve.crb.begin(), curve.crb.end());
    const size_t k = static_cast<size_t>(it - curve.crb.begin());
    curve.argmin_snr_db = snr_db.empty() ? 0.0 : snr_db[k];
    curve.interior_minimum = !curve.crb.empty() && curve.crb.front() > *it && curve.crb.back() > *it;
  });
  return res;
}

}  // namespace hrf
