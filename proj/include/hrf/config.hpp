#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrf/scenario.hpp"
#include "hrf/types.hpp"

namespace hrf {

struct FrameBlock {
  double carrier_freq_hz = 24e9;
  double subcarrier_spacing_hz = 15e3;
  int num_symbols = 14;
  int samples_per_symbol = 1;
  int sample_index = 0;
  int num_dl_subcarriers = 36;
  int num_ul_subcarriers_per_user = 24;
  // Explicit allocations override the counts above when non-empty.
  std::vector<int> dl_subcarriers;
  std::vector<std::vector<int>> ul_subcarriers;
  std::vector<double> symbol_power;
  bool operator==(const FrameBlock&) const = default;
};

struct ArrayBlock {
  int bs_tx_antennas = 8;
  int bs_rx_antennas = 8;
  int user_antennas = 4;
  double element_spacing_wavelengths = 0.5;
  double bs_gain_dbi = 25.0;
  double user_gain_dbi = 17.0;
  bool operator==(const ArrayBlock&) const = default;
};

struct TargetBlock {
  double distance_m = 100.0;
  double angle_deg = 50.0;
  double doppler_hz = 0.0;
  double rcs_m2 = 1.0;
  bool operator==(const TargetBlock&) const = default;
};

struct UserBlock {
  double distance_m = 100.0;
  double angle_deg = 0.0;
  std::vector<int> visible_targets;  // empty: all targets
  bool operator==(const UserBlock&) const = default;
};

struct PrecoderBlock {
  std::optional<double> bs_angle_deg;  // default: toward the first target
  std::optional<double> user_angle_deg;  // default: boresight toward the BS
  bool operator==(const PrecoderBlock&) const = default;
};

struct ScenarioBlock {
  FrameBlock frame;
  ArrayBlock array;
  double bs_power_dbm = 30.0;
  double user_power_dbm = 20.0;
  double noise_psd_dbm_per_hz = -174.0;
  std::string pathloss = "free-space";
  std::vector<TargetBlock> targets{TargetBlock{}};
  std::vector<UserBlock> users{UserBlock{}};
  PrecoderBlock precoder;
  bool operator==(const ScenarioBlock&) const = default;
};

struct QuantizerBlock {
  int bits = 1;
  double margin_db = 0.0;
  double dr_db_per_bit = 6.02;
  double dr_offset_db = 1.76;
  bool operator==(const QuantizerBlock&) const = default;
};

// bits lists use 0 for the ideal ADC; an empty list means [quantizer.bits].
struct CrbParams {
  std::vector<int> bits{1, 2, 3, 4, 0};
  bool operator==(const CrbParams&) const = default;
};

struct MseParams {
  std::vector<double> snr_db{-10, 0, 10, 20, 30, 40, 50, 60};
  int trials = 1000;
  double grid_min_deg = -90.0;
  double grid_max_deg = 90.0;
  double grid_step_deg = 0.05;
  double coarse_step_deg = 0.5;
  int target = 0;
  std::vector<int> bits{1, 0};
  bool operator==(const MseParams&) const = default;
};

struct ResonanceParams {
  std::vector<int> bits{1, 2, 3, 4};
  double snr_db_min = -20.0;
  double snr_db_max = 100.0;
  double snr_db_step = 2.0;
  int target = 0;
  bool operator==(const ResonanceParams&) const = default;
};

struct BoundaryParams {
  int points = 20;
  std::vector<int> bits{1, 2, 14};
  int target = 0;
  bool dr_gating = true;
  bool polish = true;
  bool per_user_rate = false;
  bool operator==(const BoundaryParams&) const = default;
};

struct MinBitsParams {
  int placements = 200;
  double radius_m = 200.0;
  bool operator==(const MinBitsParams&) const = default;
};

enum class ExperimentType { Crb, Mse, Resonance, Boundary, MinBits };

const char* experiment_name(ExperimentType t);
std::optional<ExperimentType> parse_experiment(const std::string& name);

struct ExperimentBlock {
  ExperimentType type = ExperimentType::Crb;
  CrbParams crb;
  MseParams mse;
  ResonanceParams resonance;
  BoundaryParams boundary;
  MinBitsParams minbits;
  bool operator==(const ExperimentBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
  bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
  ScenarioBlock scenario;
  QuantizerBlock quantizer;
  ExperimentBlock experiment;
  OutputBlock output;
  std::uint64_t seed = 0;
  bool operator==(const RunConfig&) const = default;
};

struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> issues);
  std::vector<std::string> issues;
};

// Parses JSON text; an empty document yields the defaults. Throws ConfigError listing every issue.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string write_config(const RunConfig& cfg);
std::vector<std::string> validate(const RunConfig& cfg);
// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

ScenarioConfig build_scenario(const RunConfig& cfg);
SceneGeometry build_geometry(const RunConfig& cfg);

}  // namespace hrf
