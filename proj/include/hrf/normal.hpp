#pragma once

namespace hrf {

// Standard normal helpers with care in the tails.
double normal_pdf(double z);
double normal_cdf(double z);
// Upper tail 1 - Phi(z), accurate for large positive z.
double normal_sf(double z);
double log_normal_cdf(double z);
// Probability mass Phi(upper) - Phi(lower) without cancellation in either tail.
double normal_cell_probability(double lower, double upper);
double log_normal_cell_probability(double lower, double upper);

}  // namespace hrf

namespace hrf {
// Inverse of the standard normal CDF on (0, 1).
double normal_quantile(double p);
}  // namespace hrf
