#pragma once

#include <vector>

#include "hrf/types.hpp"

namespace hrf {

struct QuantizerSpec {
  int bits = 1;
  // Interior cell boundaries and reconstruction levels for a unit-variance input.
  std::vector<double> thresholds;
  std::vector<double> levels;
  double distortion_factor = 0.0;  // eta
  // Per-component standard deviation the design is scaled to.
  double input_std = 1.0;

  int num_cells() const { return static_cast<int>(levels.size()); }
  // Copy rescaled to a new per-component standard deviation.
  QuantizerSpec scaled(double std) const;
  // Cell index of x in units of input_std; ties go to the upper cell.
  int cell_index(double x) const;
  double quantize_component(double x) const;
  // Boundaries of cell c in unit-variance units, infinite at the ends.
  double lower_edge(int c) const;
  double upper_edge(int c) const;
};

// Lloyd-Max quantizer for a unit-variance real Gaussian; throws ConvergenceError on failure.
QuantizerSpec design_lloyd_max(int bits);

// Largest centroid/midpoint residual of a design, used as a convergence certificate.
double lloyd_residual(const QuantizerSpec& spec);

VectorXcd quantize(const VectorXcd& x, const QuantizerSpec& spec);

struct DynamicRangeRule {
  double db_per_bit = 6.02;
  double offset_db = 1.76;
};

double adc_dynamic_range_db(int bits, const DynamicRangeRule& rule = {});
double signal_dynamic_range_db(double p_direct, double p_reflected);
int min_bits_for_dr(double dr_sig_db, double margin_db, const DynamicRangeRule& rule = {});

}  // namespace hrf
