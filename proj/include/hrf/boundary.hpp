#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hrf/bussgang.hpp"
#include "hrf/quantizer.hpp"
#include "hrf/scenario.hpp"
#include "hrf/sdp.hpp"

namespace hrf {

enum class Objective { MinimizeCrb, MaximizeRate };

inline constexpr double kNoCrbCeiling = std::numeric_limits<double>::infinity();

struct BoundaryQuery {
  Objective objective = Objective::MinimizeCrb;
  int target = 0;                 // which theta_i the CRB refers to
  double mu = 0.0;                // rate floor for P0, trace-linear surrogate units
  double gamma = kNoCrbCeiling;   // CRB ceiling for P1, rad^2
  double bs_power_max_w = 0.0;    // <= 0 takes the scenario cap
  double user_power_max_w = 0.0;  // <= 0 takes the scenario cap
  double eta = 0.0;
  bool per_user_rate = false;     // floor each user's rate instead of the sum
  AoaFimOptions fim_options;
  sdp::Options solver;
};

struct BoundaryPoint {
  double mu = 0.0;
  double gamma = kNoCrbCeiling;
  double rate_bits_per_use = 0.0;  // trace-linear surrogate the optimizer works with
  double rate_logdet_bits = 0.0;   // log-det low-SNR bound at the returned covariances
  double rate_kbps = 0.0;         // throughput of the log-det bound
  double crb_rad2 = 0.0;           // recomputed from the returned covariances
  double epigraph_t = 0.0;         // Schur epigraph variable (P0 only)
  MatrixXcd R0;
  std::vector<MatrixXcd> Rk;
  VectorXcd f;
  std::vector<VectorXcd> fk;
  double rank1_gap = 0.0;          // worst lambda2/lambda1 over the covariances that carry power
  sdp::Status solver_status = sdp::Status::NumericalFailure;
  double duality_gap = 0.0;
  bool pareto = false;
  std::string note;

  bool ok() const { return solver_status == sdp::Status::Optimal; }
};

// Precomputed data shared by every solve on one scenario.
class BoundaryModel {
 public:
  BoundaryModel(const ScenarioConfig& sc, const BoundaryQuery& base);

  BoundaryPoint solve_p0(double mu) const;
  BoundaryPoint solve_p1(double gamma) const;
  // Analytic best surrogate rate: every user's power on its dominant eigenvector.
  double max_rate_analytic() const;
  double surrogate_rate(const std::vector<MatrixXcd>& Rk) const;
  double crb(const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk) const;
  const AoaFimMap& fim_map() const { return map_; }
  const std::vector<MatrixXcd>& rate_weights() const { return W_; }

 private:
  BoundaryPoint finish(const sdp::Result& r, const std::vector<int>& offsets, int t_var, double mu, double gamma) const;
  sdp::Problem build(bool with_schur, double gamma_scaled, bool rate_objective, double mu) const;

  const ScenarioConfig* sc_;
  BoundaryQuery q_;
  double cap_bs_, cap_u_;
  AoaFimMap map_;
  std::vector<MatrixXcd> W_;  // surrogate rate = sum_k Re tr(R_k W_k)
  double fim_scale_ = 1.0, rate_scale_ = 1.0;
  ChannelSet channels_;
};

BoundaryPoint solve_p0(const ScenarioConfig& sc, const BoundaryQuery& query);
BoundaryPoint solve_p1(const ScenarioConfig& sc, const BoundaryQuery& query);

struct FrontierOptions {
  bool polish = true;            // re-solve P1 at each P0 optimum to land on the Pareto boundary
  double polish_slack = 1e-7;    // relative CRB slack of the polishing ceiling
  double monotonic_tol = 1e-6;
  // The rate floor is capped at mu_max (1 - backoff): at mu_max the user blocks lose their interior.
  double endpoint_backoff = 1e-6;
};

struct Frontier {
  std::vector<BoundaryPoint> points;  // ordered by mu
  double mu_max = 0.0;
  int monotonicity_violations = 0;
};

// 0 followed by (points - 1) log-spaced values up to mu_max.
std::vector<double> default_mu_grid(double mu_max, int points, double min_fraction = 1e-3);

Frontier trace_frontier(const ScenarioConfig& sc, const std::vector<double>& mu_grid, const BoundaryQuery& tmpl,
                        const FrontierOptions& options = {});
// Solves P1 without a CRB ceiling first and sweeps the default grid up to its rate.
Frontier trace_frontier(const ScenarioConfig& sc, int points, const BoundaryQuery& tmpl,
                        const FrontierOptions& options = {});

struct RecoveredPrecoder {
  VectorXcd vector;
  double rank1_gap = 0.0;
  bool degenerate = false;  // zero matrix or rank far from one
};

RecoveredPrecoder recover_precoder(const MatrixXcd& R);

// DR gate: a reflected path contributes only if its dynamic range fits the ADC. bits <= 0 means ideal.
AoaFimOptions dr_gated_options(const ScenarioConfig& sc, int bits, double margin_db,
                               const DynamicRangeRule& rule = {});
double path_dynamic_range_db(const ScenarioConfig& sc, int user, int path);

struct PlacementResult {
  double target_distance_m = 0.0;
  double target_angle_rad = 0.0;
  double dr_sig_db = 0.0;
  int min_bits = 1;
};

struct MinBitsScan {
  double radius_m = 200.0;
  int placements = 200;
  double margin_db = 0.0;
  double min_separation_m = 1.0;
  DynamicRangeRule rule;
};

// Random single-target placements around the BS with the geometry's first user fixed; sorted by DR.
std::vector<PlacementResult> min_bits_scan(const SceneGeometry& geometry, const ArrayConfig& array, double carrier_hz,
                                           const MinBitsScan& scan, std::uint64_t seed);

}  // namespace hrf
