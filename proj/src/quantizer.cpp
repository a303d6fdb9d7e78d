#include "hrf/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrf/normal.hpp"

namespace hrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellMoments {
  double prob;
  double centroid;
};

CellMoments cell_moments(double a, double b) {
  const double p = normal_cell_probability(a, b);
  const double pa = std::isinf(a) ? 0.0 : normal_pdf(a);
  const double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
  return {p, (pa - pb) / p};
}

std::vector<double> centroids(const std::vector<double>& t) {
  const size_t B = t.size() + 1;
  std::vector<double> c(B);
  for (size_t i = 0; i < B; ++i) {
    const double a = i == 0 ? -kInf : t[i - 1];
    const double b = i + 1 == B ? kInf : t[i];
    c[i] = cell_moments(a, b).centroid;
  }
  return c;
}

double max_residual(const std::vector<double>& t, const std::vector<double>& c) {
  double r = 0.0;
  for (size_t i = 0; i < t.size(); ++i) r = std::max(r, std::abs(t[i] - 0.5 * (c[i] + c[i + 1])));
  return r;
}

// Solves the tridiagonal system (lower, diag, upper) x = rhs in place.
void thomas(std::vector<double> lo, std::vector<double> di, std::vector<double> up, std::vector<double>& x) {
  const size_t n = di.size();
  for (size_t i = 1; i < n; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    x[i] -= w * x[i - 1];
  }
  x[n - 1] /= di[n - 1];
  for (size_t i = n - 1; i-- > 0;) x[i] = (x[i] - up[i] * x[i + 1]) / di[i];
}

// One damped Newton step on r(t) = t - (c_i + c_{i+1}) / 2.
bool newton_step(std::vector<double>& t) {
  const size_t n = t.size();
  const size_t B = n + 1;
  std::vector<double> c(B), dca(B), dcb(B);
  for (size_t i = 0; i < B; ++i) {
    const double a = i == 0 ? -kInf : t[i - 1];
    const double b = i + 1 == B ? kInf : t[i];
    const auto mom = cell_moments(a, b);
    c[i] = mom.centroid;
    dca[i] = std::isinf(a) ? 0.0 : normal_pdf(a) * (c[i] - a) / mom.prob;
    dcb[i] = std::isinf(b) ? 0.0 : normal_pdf(b) * (b - c[i]) / mom.prob;
  }
  std::vector<double> r(n), lo(n, 0.0), di(n), up(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    r[i] = t[i] - 0.5 * (c[i] + c[i + 1]);
    di[i] = 1.0 - 0.5 * (dcb[i] + dca[i + 1]);
    if (i > 0) lo[i] = -0.5 * dca[i];
    if (i + 1 < n) up[i] = -0.5 * dcb[i + 1];
  }
  const double r0 = max_residual(t, c);
  std::vector<double> step = r;
  thomas(lo, di, up, step);
  for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
    std::vector<double> trial(n);
    bool ordered = true;
    for (size_t i = 0; i < n; ++i) {
      trial[i] = t[i] - alpha * step[i];
      if (i > 0 && !(trial[i] > trial[i - 1])) ordered = false;
    }
    if (!ordered) continue;
    if (max_residual(trial, centroids(trial)) < r0) {
      t = std::move(trial);
      return true;
    }
  }
  return false;
}

}  // namespace

QuantizerSpec QuantizerSpec::scaled(double std) const {
  QuantizerSpec q = *this;
  q.input_std = std;
  return q;
}

int QuantizerSpec::cell_index(double x) const {
  const double u = x / input_std;
  return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), u) - thresholds.begin());
}

double QuantizerSpec::quantize_component(double x) const { return levels[cell_index(x)] * input_std; }

double QuantizerSpec::lower_edge(int c) const { return c == 0 ? -kInf : thresholds[c - 1]; }

double QuantizerSpec::upper_edge(int c) const { return c == num_cells() - 1 ? kInf : thresholds[c]; }

QuantizerSpec design_lloyd_max(int bits) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("quantizer bits must lie in [1, 16]");
  const int B = 1 << bits;
  // Companding start: optimal point density of a Gaussian is N(0, 3).
  std::vector<double> lv(B);
  for (int i = 0; i < B; ++i) lv[i] = std::sqrt(3.0) * normal_quantile((i + 0.5) / B);
  std::vector<double> t(B - 1);
  for (int i = 0; i + 1 < B; ++i) t[i] = 0.5 * (lv[i] + lv[i + 1]);

  constexpr double kTol = 1e-11;
  constexpr int kLloydSweeps = 60;
  constexpr int kMaxNewton = 200;
  for (int it = 0; it < kLloydSweeps; ++it) {
    const auto c = centroids(t);
    for (int i = 0; i + 1 < B; ++i) t[i] = 0.5 * (c[i] + c[i + 1]);
  }
  int it = 0;
  for (; it < kMaxNewton && max_residual(t, centroids(t)) > kTol; ++it)
    if (!newton_step(t)) break;
  // A few plain sweeps remove any residual the Newton line search could not.
  for (int k = 0; k < 50 && max_residual(t, centroids(t)) > kTol; ++k) {
    const auto c = centroids(t);
    for (int i = 0; i + 1 < B; ++i) t[i] = 0.5 * (c[i] + c[i + 1]);
  }

  QuantizerSpec q;
  q.bits = bits;
  q.levels = centroids(t);
  // Thresholds are the exact midpoints of the final levels.
  q.thresholds.resize(B - 1);
  for (int i = 0; i + 1 < B; ++i) q.thresholds[i] = 0.5 * (q.levels[i] + q.levels[i + 1]);
  const double res = lloyd_residual(q);
  if (!(res < 1e-10)) throw ConvergenceError("Lloyd-Max design did not converge (residual " + std::to_string(res) + ")");

  if (bits == 1) {
    // Closed form of the sign quantizer.
    const double l = std::sqrt(2.0 / kPi);
    q.thresholds = {0.0};
    q.levels = {-l, l};
  }
  double power = 0.0;  // E[Q(x)^2] = E[Q(x) x] at the fixed point
  for (int i = 0; i < B; ++i) power += normal_cell_probability(q.lower_edge(i), q.upper_edge(i)) * q.levels[i] * q.levels[i];
  q.distortion_factor = bits == 1 ? 1.0 - 2.0 / kPi : 1.0 - power;
  return q;
}

double lloyd_residual(const QuantizerSpec& q) {
  double r = 0.0;
  const auto c = centroids(q.thresholds);
  for (int i = 0; i < q.num_cells(); ++i) r = std::max(r, std::abs(q.levels[i] - c[i]));
  for (size_t i = 0; i < q.thresholds.size(); ++i)
    r = std::max(r, std::abs(q.thresholds[i] - 0.5 * (q.levels[i] + q.levels[i + 1])));
  return r;
}

VectorXcd quantize(const VectorXcd& x, const QuantizerSpec& spec) {
  VectorXcd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y[i] = cd(spec.quantize_component(x[i].real()), spec.quantize_component(x[i].imag()));
  return y;
}

double adc_dynamic_range_db(int bits, const DynamicRangeRule& rule) {
  if (bits < 1) throw std::invalid_argument("bits must be >= 1");
  return rule.db_per_bit * bits + rule.offset_db;
}

double signal_dynamic_range_db(double p_direct, double p_reflected) {
  if (!(p_direct > 0) || !(p_reflected > 0)) throw std::invalid_argument("path powers must be positive");
  return 10.0 * std::log10(p_direct / p_reflected);
}

int min_bits_for_dr(double dr_sig_db, double margin_db, const DynamicRangeRule& rule) {
  if (!std::isfinite(dr_sig_db)) throw std::invalid_argument("dynamic range must be finite");
  const double need = dr_sig_db + margin_db;
  int b = std::max(1, static_cast<int>(std::floor((need - rule.offset_db) / rule.db_per_bit)));
  while (b > 1 && adc_dynamic_range_db(b - 1, rule) >= need) --b;
  while (adc_dynamic_range_db(b, rule) < need) ++b;
  return b;
}

}  // namespace hrf
