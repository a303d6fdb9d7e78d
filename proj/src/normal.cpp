#include "hrf/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hrf {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kPiLocal = std::numbers::pi;

// Asymptotic log Phi(z) for z << 0.
double log_cdf_far_tail(double z) {
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - kLogSqrt2Pi + std::log(series);
}
}  // namespace

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_sf(double z) {
  return 0.5 * std::erfc(z * kInvSqrt2);
}

double log_normal_cdf(double z) {
  if (z == std::numeric_limits<double>::infinity()) return 0.0;
  if (z == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (z > 0.0) return std::log1p(-normal_sf(z));
  if (z > -30.0) return std::log(normal_cdf(z));
  return log_cdf_far_tail(z);
}

double normal_cell_probability(double lower, double upper) {
  if (!(upper > lower)) return 0.0;
  if (lower >= 0.0) return normal_sf(lower) - normal_sf(upper);
  if (upper <= 0.0) return normal_cdf(upper) - normal_cdf(lower);
  return 1.0 - normal_cdf(lower) - normal_sf(upper);
}

double log_normal_cell_probability(double lower, double upper) {
  if (!(upper > lower)) return -std::numeric_limits<double>::infinity();
  const double p = normal_cell_probability(lower, upper);
  if (p > 1e-280) return std::log(p);
  // Both edges in the same far tail: log of the near edge mass minus the far edge mass.
  if (lower >= 0.0) {
    const double near = log_normal_cdf(-lower);
    const double far = log_normal_cdf(-upper);
    return near + std::log1p(-std::exp(far - near));
  }
  const double near = log_normal_cdf(upper);
  const double far = log_normal_cdf(lower);
  return near + std::log1p(-std::exp(far - near));
}

}  // namespace hrf

namespace hrf {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  // Acklam's rational approximation followed by one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = e * std::sqrt(2 * kPiLocal) * std::exp(0.5 * x * x);
  return x - u / (1 + 0.5 * x * u);
}

}  // namespace hrf
