#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrf/quantizer.hpp"
#include "hrf/scenario.hpp"
#include "hrf/signal.hpp"

namespace hrf {

struct AngleGrid {
  double min_rad = -kPi / 2;
  double max_rad = kPi / 2;
  double step_rad = deg_to_rad(0.05);

  size_t size() const;
  double at(size_t i) const { return min_rad + static_cast<double>(i) * step_rad; }
};

struct MlExperiment {
  AngleGrid grid;
  // Coarse pass spacing before the local fine search; 0 searches every grid point.
  double coarse_step_rad = deg_to_rad(0.5);
  bool parabolic_refine = true;
  int trials = 1000;
  std::vector<double> snr_db;
  std::optional<QuantizerSpec> quantizer;  // empty: ideal ADC
  int target = 0;
  std::uint64_t seed = 0;
  int threads = 1;

  std::vector<std::string> violations(const ScenarioConfig& sc) const;
};

// Log-likelihood of an observation given the noiseless candidate frame. spec == nullptr selects the
// unquantized Gaussian likelihood; otherwise the observation holds quantizer outputs.
double log_likelihood(const Frame& observation, const Frame& candidate, const QuantizerSpec* spec,
                      const std::vector<double>& component_std, double noise_variance);

struct MlOutcome {
  double estimate_rad = 0.0;
  size_t grid_index = 0;
  bool flat = false;  // maximum ties span more than three grid cells
};

// Grid-search ML over theta of one target with every other parameter at truth.
class MlSearch {
 public:
  MlSearch(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols,
           const MlExperiment& experiment);

  MlOutcome estimate(const Frame& observation, const QuantizerSpec* spec, const std::vector<double>& component_std,
                     double noise_variance) const;
  const Frame& candidate(size_t i) const { return candidates_[i]; }
  const AngleGrid& grid() const { return exp_.grid; }

 private:
  double score(size_t i, const Frame& obs, const std::vector<std::vector<int>>* cells, const QuantizerSpec* spec,
               const std::vector<double>& stdv, double s2) const;

  MlExperiment exp_;
  std::vector<Frame> candidates_;
};

MlOutcome ml_estimate(const Frame& observation, const MlSearch& search, const QuantizerSpec* spec,
                      const std::vector<double>& component_std, double noise_variance);

struct SweepPoint {
  double snr_db = 0.0;
  double noise_variance = 0.0;
  double mse = 0.0;
  double crb = 0.0;
  double bias = 0.0;
  int flat_trials = 0;
  int trials = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::uint64_t seed = 0;
  int trials = 0;
  int bits = 0;  // 0 for the ideal ADC
  std::vector<std::string> warnings;
};

// Per-antenna SNR is mean |x|^2 over the frame divided by sigma^2.
SweepResult mse_vs_crb_sweep(const ScenarioConfig& sc, const PrecoderSet& precoders, const MlExperiment& experiment);

// theta-only CRB of one target with the other parameters known; spec == nullptr for the ideal ADC.
double theta_crb(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols, int target,
                 const QuantizerSpec* spec);

struct ResonanceCurve {
  int bits = 0;  // 0 for the ideal ADC
  std::vector<double> crb;
  double argmin_snr_db = 0.0;
  bool interior_minimum = false;
};

struct ResonanceResult {
  std::vector<double> snr_db;
  std::vector<ResonanceCurve> curves;  // requested bits, then the ideal ADC
};

ResonanceResult stochastic_resonance_sweep(const ScenarioConfig& sc, const PrecoderSet& precoders,
                                           const std::vector<int>& bits, const std::vector<double>& snr_db,
                                           int target, std::uint64_t seed, int threads = 1);

}  // namespace hrf
