#pragma once

#include <string>
#include <vector>

#include "hrf/types.hpp"

namespace hrf {

struct FrameConfig {
  double carrier_freq_hz = 24e9;
  double subcarrier_spacing_hz = 15e3;
  int num_symbols = 14;
  int samples_per_symbol = 1;
  std::vector<int> dl_subcarriers;
  std::vector<std::vector<int>> ul_subcarriers;
  // sigma_k^2 for k = 0 (downlink) .. K
  std::vector<double> symbol_power;

  double symbol_duration() const { return 1.0 / subcarrier_spacing_hz; }
  int num_users() const { return static_cast<int>(ul_subcarriers.size()); }
  // Subcarrier set of stream k: k = 0 is the downlink, k >= 1 user k-1.
  const std::vector<int>& stream_subcarriers(int k) const {
    return k == 0 ? dl_subcarriers : ul_subcarriers.at(k - 1);
  }
  std::vector<std::string> violations() const;
  bool operator==(const FrameConfig&) const = default;
};

// Contiguous allocation: downlink first, then each user in turn.
FrameConfig make_frame(int num_dl, int num_ul_per_user, int num_users, int num_symbols = 14);

struct ArrayConfig {
  int bs_tx_antennas = 8;
  int bs_rx_antennas = 8;
  std::vector<int> user_tx_antennas;
  double element_spacing_wavelengths = 0.5;
  double bs_gain_dbi = 25.0;
  double user_gain_dbi = 17.0;

  std::vector<std::string> violations() const;
  bool operator==(const ArrayConfig&) const = default;
};

struct TargetState {
  double aoa_rad = 0.0;
  double one_way_delay_s = 0.0;
  double doppler_hz = 0.0;
  cd complex_gain{1.0, 0.0};
};

struct ReflectedPath {
  int target_index = 0;
  double delay_s = 0.0;
  double aod_to_target_rad = 0.0;
  cd complex_gain{1.0, 0.0};
};

struct UserState {
  double aod_rad = 0.0;
  double aoa_at_bs_rad = 0.0;
  double delay_s = 0.0;
  cd complex_gain{1.0, 0.0};
  std::vector<ReflectedPath> reflected_paths;

  std::vector<int> visible_targets() const;
};

struct NoiseModel {
  double psd_dbm_per_hz = -174.0;
  double noise_variance = 0.0;

  static NoiseModel from_psd(double psd_dbm_per_hz, double bandwidth_hz);
};

struct ScenarioConfig {
  FrameConfig frame;
  ArrayConfig array;
  std::vector<TargetState> targets;
  std::vector<UserState> users;
  NoiseModel noise;
  double bs_power_max_w = 1.0;
  double user_power_max_w = 0.1;
  int sample_index = 0;

  int num_targets() const { return static_cast<int>(targets.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  std::vector<std::string> violations() const;
  // Throws DimensionError listing every violation.
  void validate() const;
};

VectorXcd steering_vector(double theta, int n_elems, double spacing);
VectorXcd steering_derivative(double theta, int n_elems, double spacing);
cd subcarrier_phase(int m, double tau, int v, const FrameConfig& frame);
// d c_m / d tau
cd subcarrier_phase_derivative(int m, double tau, int v, const FrameConfig& frame);

// Rank-1 matrix scale * rx * tx^T.
struct Rank1Channel {
  cd scale;
  VectorXcd rx;
  VectorXcd tx;

  MatrixXcd matrix() const { return scale * rx * tx.transpose(); }
  // H f
  VectorXcd apply(const VectorXcd& f) const { return (scale * tx.transpose() * f)(0) * rx; }
};

struct ChannelSet {
  int sample_index = 0;
  int num_rx = 0;
  // echo[l][mi][i], mi indexes frame.dl_subcarriers
  std::vector<std::vector<std::vector<Rank1Channel>>> echo;
  // direct[l][k][mi], mi indexes frame.ul_subcarriers[k]
  std::vector<std::vector<std::vector<Rank1Channel>>> direct;
  // reflected[l][k][mi][j], j indexes users[k].reflected_paths
  std::vector<std::vector<std::vector<std::vector<Rank1Channel>>>> reflected;

  // H^UL = H^dp + sum_j H^ref
  MatrixXcd uplink(int l, int k, int mi) const;
};

ChannelSet build_channels(const ScenarioConfig& scenario, int v);

// Geometry-driven construction.

enum class PathlossModel { FreeSpace, Unit };

struct TargetPlacement {
  double distance_m = 100.0;
  double angle_rad = 0.0;
  double doppler_hz = 0.0;
  double rcs_m2 = 1.0;
  bool operator==(const TargetPlacement&) const = default;
};

struct UserPlacement {
  double distance_m = 100.0;
  double angle_rad = 0.0;
  // Empty means every target is visible.
  std::vector<int> visible_targets;
  bool operator==(const UserPlacement&) const = default;
};

struct SceneGeometry {
  std::vector<TargetPlacement> targets;
  std::vector<UserPlacement> users;
  bool operator==(const SceneGeometry&) const = default;
};

struct LinkBudget {
  double bs_power_dbm = 30.0;
  double user_power_dbm = 20.0;
  double noise_psd_dbm_per_hz = -174.0;
  PathlossModel pathloss = PathlossModel::FreeSpace;
  bool operator==(const LinkBudget&) const = default;
};

struct PathGains {
  std::vector<double> echo;                   // per target
  std::vector<double> direct;                 // per user
  std::vector<std::vector<double>> reflected; // per user, per visible target
};

double free_space_amplitude(double distance_m, double tx_gain_dbi, double rx_gain_dbi, double carrier_hz);
double monostatic_amplitude(double distance_m, double gain_dbi, double rcs_m2, double carrier_hz);
double bistatic_amplitude(double d_tx_m, double d_rx_m, double tx_gain_dbi, double rx_gain_dbi,
                          double rcs_m2, double carrier_hz);

PathGains pathloss_and_gains(const SceneGeometry& geometry, const ArrayConfig& array, double carrier_hz,
                             PathlossModel model = PathlossModel::FreeSpace);

ScenarioConfig make_scenario(const SceneGeometry& geometry, const FrameConfig& frame, const ArrayConfig& array,
                             const LinkBudget& budget);

}  // namespace hrf
