#include "hrf/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hrf {

using nlohmann::json;

const char* experiment_name(ExperimentType t) {
  switch (t) {
    case ExperimentType::Crb: return "crb";
    case ExperimentType::Mse: return "mse";
    case ExperimentType::Resonance: return "resonance";
    case ExperimentType::Boundary: return "boundary";
    case ExperimentType::MinBits: return "minbits";
  }
  return "?";
}

std::optional<ExperimentType> parse_experiment(const std::string& name) {
  for (auto t : {ExperimentType::Crb, ExperimentType::Mse, ExperimentType::Resonance, ExperimentType::Boundary,
                 ExperimentType::MinBits})
    if (name == experiment_name(t)) return t;
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += "\n  - " + x;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> list)
    : Error("invalid configuration:" + join(list)), issues(std::move(list)) {}

namespace {

// Reads JSON fields into typed slots, recording every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> issues;

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
      issues.push_back(path + ": expected an object");
      return false;
    }
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
      if (!known.count(k)) issues.push_back(path + "." + k + ": unknown field");
    return true;
  }

  void get(const json& j, const std::string& path, double& out) {
    if (j.is_number()) out = j.get<double>();
    else issues.push_back(path + ": expected a number");
  }
  void get(const json& j, const std::string& path, int& out) {
    if (j.is_number_integer()) out = j.get<int>();
    else issues.push_back(path + ": expected an integer");
  }
  void get(const json& j, const std::string& path, std::uint64_t& out) {
    if (j.is_number_unsigned()) out = j.get<std::uint64_t>();
    else issues.push_back(path + ": expected a non-negative integer");
  }
  void get(const json& j, const std::string& path, bool& out) {
    if (j.is_boolean()) out = j.get<bool>();
    else issues.push_back(path + ": expected true or false");
  }
  void get(const json& j, const std::string& path, std::string& out) {
    if (j.is_string()) out = j.get<std::string>();
    else issues.push_back(path + ": expected a string");
  }
  void get(const json& j, const std::string& path, std::optional<double>& out) {
    if (j.is_null()) out.reset();
    else if (j.is_number()) out = j.get<double>();
    else issues.push_back(path + ": expected a number or null");
  }
  template <class T>
  void get(const json& j, const std::string& path, std::vector<T>& out) {
    if (!j.is_array()) {
      issues.push_back(path + ": expected an array");
      return;
    }
    std::vector<T> v(j.size());
    for (size_t i = 0; i < j.size(); ++i) get(j[i], path + "[" + std::to_string(i) + "]", v[i]);
    out = std::move(v);
  }

  template <class T>
  void field(const json& obj, const std::string& path, const char* key, T& out) {
    if (obj.contains(key)) get(obj.at(key), path + "." + key, out);
  }
};

void read(Reader& r, const json& j, const std::string& p, TargetBlock& t) {
  if (!r.object(j, p, {"distance_m", "angle_deg", "doppler_hz", "rcs_m2"})) return;
  r.field(j, p, "distance_m", t.distance_m);
  r.field(j, p, "angle_deg", t.angle_deg);
  r.field(j, p, "doppler_hz", t.doppler_hz);
  r.field(j, p, "rcs_m2", t.rcs_m2);
}

void read(Reader& r, const json& j, const std::string& p, UserBlock& u) {
  if (!r.object(j, p, {"distance_m", "angle_deg", "visible_targets"})) return;
  r.field(j, p, "distance_m", u.distance_m);
  r.field(j, p, "angle_deg", u.angle_deg);
  r.field(j, p, "visible_targets", u.visible_targets);
}

template <class T>
void read_list(Reader& r, const json& obj, const std::string& p, const char* key, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  const json& arr = obj.at(key);
  const std::string path = p + "." + key;
  if (!arr.is_array()) {
    r.issues.push_back(path + ": expected an array");
    return;
  }
  out.assign(arr.size(), T{});
  for (size_t i = 0; i < arr.size(); ++i) read(r, arr[i], path + "[" + std::to_string(i) + "]", out[i]);
}

void read(Reader& r, const json& j, const std::string& p, ScenarioBlock& s) {
  if (!r.object(j, p, {"frame", "array", "bs_power_dbm", "user_power_dbm", "noise_psd_dbm_per_hz", "pathloss",
                       "targets", "users", "precoder"}))
    return;
  if (j.contains("frame")) {
    const json& f = j.at("frame");
    const std::string q = p + ".frame";
    if (r.object(f, q, {"carrier_freq_hz", "subcarrier_spacing_hz", "num_symbols", "samples_per_symbol",
                        "sample_index", "num_dl_subcarriers", "num_ul_subcarriers_per_user", "dl_subcarriers",
                        "ul_subcarriers", "symbol_power"})) {
      auto& fr = s.frame;
      r.field(f, q, "carrier_freq_hz", fr.carrier_freq_hz);
      r.field(f, q, "subcarrier_spacing_hz", fr.subcarrier_spacing_hz);
      r.field(f, q, "num_symbols", fr.num_symbols);
      r.field(f, q, "samples_per_symbol", fr.samples_per_symbol);
      r.field(f, q, "sample_index", fr.sample_index);
      r.field(f, q, "num_dl_subcarriers", fr.num_dl_subcarriers);
      r.field(f, q, "num_ul_subcarriers_per_user", fr.num_ul_subcarriers_per_user);
      r.field(f, q, "dl_subcarriers", fr.dl_subcarriers);
      r.field(f, q, "ul_subcarriers", fr.ul_subcarriers);
      r.field(f, q, "symbol_power", fr.symbol_power);
    }
  }
  if (j.contains("array")) {
    const json& a = j.at("array");
    const std::string q = p + ".array";
    if (r.object(a, q, {"bs_tx_antennas", "bs_rx_antennas", "user_antennas", "element_spacing_wavelengths",
                        "bs_gain_dbi", "user_gain_dbi"})) {
      r.field(a, q, "bs_tx_antennas", s.array.bs_tx_antennas);
      r.field(a, q, "bs_rx_antennas", s.array.bs_rx_antennas);
      r.field(a, q, "user_antennas", s.array.user_antennas);
      r.field(a, q, "element_spacing_wavelengths", s.array.element_spacing_wavelengths);
      r.field(a, q, "bs_gain_dbi", s.array.bs_gain_dbi);
      r.field(a, q, "user_gain_dbi", s.array.user_gain_dbi);
    }
  }
  r.field(j, p, "bs_power_dbm", s.bs_power_dbm);
  r.field(j, p, "user_power_dbm", s.user_power_dbm);
  r.field(j, p, "noise_psd_dbm_per_hz", s.noise_psd_dbm_per_hz);
  r.field(j, p, "pathloss", s.pathloss);
  read_list(r, j, p, "targets", s.targets);
  read_list(r, j, p, "users", s.users);
  if (j.contains("precoder")) {
    const json& pc = j.at("precoder");
    const std::string q = p + ".precoder";
    if (r.object(pc, q, {"bs_angle_deg", "user_angle_deg"})) {
      r.field(pc, q, "bs_angle_deg", s.precoder.bs_angle_deg);
      r.field(pc, q, "user_angle_deg", s.precoder.user_angle_deg);
    }
  }
}

void read(Reader& r, const json& j, const std::string& p, ExperimentBlock& e) {
  if (!r.object(j, p, {"type", "crb", "mse", "resonance", "boundary", "minbits"})) return;
  if (j.contains("type")) {
    std::string name;
    r.get(j.at("type"), p + ".type", name);
    if (auto t = parse_experiment(name)) e.type = *t;
    else if (j.at("type").is_string()) r.issues.push_back(p + ".type: unknown experiment '" + name + "'");
  }
  auto sub = [&](const char* key, std::initializer_list<const char*> keys) -> const json* {
    if (!j.contains(key)) return nullptr;
    return r.object(j.at(key), p + "." + key, keys) ? &j.at(key) : nullptr;
  };
  if (auto c = sub("crb", {"bits"})) r.field(*c, p + ".crb", "bits", e.crb.bits);
  if (auto m = sub("mse", {"snr_db", "trials", "grid_min_deg", "grid_max_deg", "grid_step_deg", "coarse_step_deg",
                           "target", "bits"})) {
    const std::string q = p + ".mse";
    r.field(*m, q, "snr_db", e.mse.snr_db);
    r.field(*m, q, "trials", e.mse.trials);
    r.field(*m, q, "grid_min_deg", e.mse.grid_min_deg);
    r.field(*m, q, "grid_max_deg", e.mse.grid_max_deg);
    r.field(*m, q, "grid_step_deg", e.mse.grid_step_deg);
    r.field(*m, q, "coarse_step_deg", e.mse.coarse_step_deg);
    r.field(*m, q, "target", e.mse.target);
    r.field(*m, q, "bits", e.mse.bits);
  }
  if (auto s = sub("resonance", {"bits", "snr_db_min", "snr_db_max", "snr_db_step", "target"})) {
    const std::string q = p + ".resonance";
    r.field(*s, q, "bits", e.resonance.bits);
    r.field(*s, q, "snr_db_min", e.resonance.snr_db_min);
    r.field(*s, q, "snr_db_max", e.resonance.snr_db_max);
    r.field(*s, q, "snr_db_step", e.resonance.snr_db_step);
    r.field(*s, q, "target", e.resonance.target);
  }
  if (auto b = sub("boundary", {"points", "bits", "target", "dr_gating", "polish", "per_user_rate"})) {
    const std::string q = p + ".boundary";
    r.field(*b, q, "points", e.boundary.points);
    r.field(*b, q, "bits", e.boundary.bits);
    r.field(*b, q, "target", e.boundary.target);
    r.field(*b, q, "dr_gating", e.boundary.dr_gating);
    r.field(*b, q, "polish", e.boundary.polish);
    r.field(*b, q, "per_user_rate", e.boundary.per_user_rate);
  }
  if (auto m = sub("minbits", {"placements", "radius_m"})) {
    r.field(*m, p + ".minbits", "placements", e.minbits.placements);
    r.field(*m, p + ".minbits", "radius_m", e.minbits.radius_m);
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const RunConfig& c) {
  const auto& s = c.scenario;
  json targets = json::array(), users = json::array();
  for (const auto& t : s.targets)
    targets.push_back({{"distance_m", t.distance_m}, {"angle_deg", t.angle_deg}, {"doppler_hz", t.doppler_hz},
                       {"rcs_m2", t.rcs_m2}});
  for (const auto& u : s.users)
    users.push_back({{"distance_m", u.distance_m}, {"angle_deg", u.angle_deg}, {"visible_targets", u.visible_targets}});
  const auto& f = s.frame;
  const auto& e = c.experiment;
  return {
      {"seed", c.seed},
      {"scenario",
       {{"frame",
         {{"carrier_freq_hz", f.carrier_freq_hz},
          {"subcarrier_spacing_hz", f.subcarrier_spacing_hz},
          {"num_symbols", f.num_symbols},
          {"samples_per_symbol", f.samples_per_symbol},
          {"sample_index", f.sample_index},
          {"num_dl_subcarriers", f.num_dl_subcarriers},
          {"num_ul_subcarriers_per_user", f.num_ul_subcarriers_per_user},
          {"dl_subcarriers", f.dl_subcarriers},
          {"ul_subcarriers", f.ul_subcarriers},
          {"symbol_power", f.symbol_power}}},
        {"array",
         {{"bs_tx_antennas", s.array.bs_tx_antennas},
          {"bs_rx_antennas", s.array.bs_rx_antennas},
          {"user_antennas", s.array.user_antennas},
          {"element_spacing_wavelengths", s.array.element_spacing_wavelengths},
          {"bs_gain_dbi", s.array.bs_gain_dbi},
          {"user_gain_dbi", s.array.user_gain_dbi}}},
        {"bs_power_dbm", s.bs_power_dbm},
        {"user_power_dbm", s.user_power_dbm},
        {"noise_psd_dbm_per_hz", s.noise_psd_dbm_per_hz},
        {"pathloss", s.pathloss},
        {"targets", targets},
        {"users", users},
        {"precoder",
         {{"bs_angle_deg", optional_json(s.precoder.bs_angle_deg)},
          {"user_angle_deg", optional_json(s.precoder.user_angle_deg)}}}}},
      {"quantizer",
       {{"bits", c.quantizer.bits},
        {"margin_db", c.quantizer.margin_db},
        {"dr_db_per_bit", c.quantizer.dr_db_per_bit},
        {"dr_offset_db", c.quantizer.dr_offset_db}}},
      {"experiment",
       {{"type", experiment_name(e.type)},
        {"crb", {{"bits", e.crb.bits}}},
        {"mse",
         {{"snr_db", e.mse.snr_db},
          {"trials", e.mse.trials},
          {"grid_min_deg", e.mse.grid_min_deg},
          {"grid_max_deg", e.mse.grid_max_deg},
          {"grid_step_deg", e.mse.grid_step_deg},
          {"coarse_step_deg", e.mse.coarse_step_deg},
          {"target", e.mse.target},
          {"bits", e.mse.bits}}},
        {"resonance",
         {{"bits", e.resonance.bits},
          {"snr_db_min", e.resonance.snr_db_min},
          {"snr_db_max", e.resonance.snr_db_max},
          {"snr_db_step", e.resonance.snr_db_step},
          {"target", e.resonance.target}}},
        {"boundary",
         {{"points", e.boundary.points},
          {"bits", e.boundary.bits},
          {"target", e.boundary.target},
          {"dr_gating", e.boundary.dr_gating},
          {"polish", e.boundary.polish},
          {"per_user_rate", e.boundary.per_user_rate}}},
        {"minbits", {{"placements", e.minbits.placements}, {"radius_m", e.minbits.radius_m}}}}},
      {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}},
  };
}

std::string line_col(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  if (blank(text)) return cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({"parse error at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what()});
  }
  Reader r;
  if (r.object(j, "config", {"seed", "scenario", "quantizer", "experiment", "output"})) {
    r.field(j, "config", "seed", cfg.seed);
    if (j.contains("scenario")) read(r, j.at("scenario"), "scenario", cfg.scenario);
    if (j.contains("quantizer")) {
      const json& q = j.at("quantizer");
      if (r.object(q, "quantizer", {"bits", "margin_db", "dr_db_per_bit", "dr_offset_db"})) {
        r.field(q, "quantizer", "bits", cfg.quantizer.bits);
        r.field(q, "quantizer", "margin_db", cfg.quantizer.margin_db);
        r.field(q, "quantizer", "dr_db_per_bit", cfg.quantizer.dr_db_per_bit);
        r.field(q, "quantizer", "dr_offset_db", cfg.quantizer.dr_offset_db);
      }
    }
    if (j.contains("experiment")) read(r, j.at("experiment"), "experiment", cfg.experiment);
    if (j.contains("output")) {
      const json& o = j.at("output");
      if (r.object(o, "output", {"directory", "formats"})) {
        r.field(o, "output", "directory", cfg.output.directory);
        r.field(o, "output", "formats", cfg.output.formats);
      }
    }
  }
  auto issues = r.issues;
  if (issues.empty()) issues = validate(cfg);
  if (!issues.empty()) throw ConfigError(issues);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

void check_bits_list(const std::vector<int>& bits, const std::string& path, bool allow_ideal,
                     std::vector<std::string>& out) {
  for (int b : bits)
    if (b < (allow_ideal ? 0 : 1) || b > 16)
      out.push_back(path + ": " + std::to_string(b) + " outside [" + (allow_ideal ? "0" : "1") + ", 16]");
}

void check_target(int t, size_t P, const std::string& path, std::vector<std::string>& out) {
  if (t < 0 || static_cast<size_t>(t) >= P) out.push_back(path + ": target index " + std::to_string(t) + " out of range");
}

}  // namespace

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> out;
  const auto& s = c.scenario;
  const auto& f = s.frame;
  if (c.quantizer.bits < 1 || c.quantizer.bits > 16) out.push_back("quantizer.bits: must lie in [1, 16]");
  if (!(c.quantizer.dr_db_per_bit > 0)) out.push_back("quantizer.dr_db_per_bit: must be positive");
  if (f.num_dl_subcarriers < 1 && f.dl_subcarriers.empty()) out.push_back("scenario.frame: no downlink subcarriers");
  if (f.num_ul_subcarriers_per_user < 1 && f.ul_subcarriers.empty() && !s.users.empty())
    out.push_back("scenario.frame: no uplink subcarriers");
  if (!f.ul_subcarriers.empty() && f.ul_subcarriers.size() != s.users.size())
    out.push_back("scenario.frame.ul_subcarriers: one set per user required");
  if (s.array.user_antennas < 1) out.push_back("scenario.array.user_antennas: must be >= 1");
  if (s.pathloss != "free-space" && s.pathloss != "unit")
    out.push_back("scenario.pathloss: expected 'free-space' or 'unit'");
  if (s.targets.empty()) out.push_back("scenario.targets: at least one target is required");
  for (size_t i = 0; i < s.targets.size(); ++i) {
    const auto& t = s.targets[i];
    const std::string p = "scenario.targets[" + std::to_string(i) + "]";
    if (!(t.distance_m > 0)) out.push_back(p + ".distance_m: must be positive");
    if (!(std::abs(t.angle_deg) <= 90)) out.push_back(p + ".angle_deg: must lie in [-90, 90]");
    if (!(t.rcs_m2 > 0)) out.push_back(p + ".rcs_m2: must be positive");
  }
  for (size_t k = 0; k < s.users.size(); ++k) {
    const auto& u = s.users[k];
    const std::string p = "scenario.users[" + std::to_string(k) + "]";
    if (!(u.distance_m > 0)) out.push_back(p + ".distance_m: must be positive");
    std::set<int> seen;
    for (int j : u.visible_targets) {
      if (j < 0 || static_cast<size_t>(j) >= s.targets.size())
        out.push_back(p + ".visible_targets: unknown target " + std::to_string(j));
      if (!seen.insert(j).second) out.push_back(p + ".visible_targets: repeats target " + std::to_string(j));
    }
    for (size_t i = 0; i < s.targets.size(); ++i) {
      const auto& t = s.targets[i];
      const double ux = u.distance_m * std::sin(deg_to_rad(u.angle_deg));
      const double uy = u.distance_m * std::cos(deg_to_rad(u.angle_deg));
      const double tx = t.distance_m * std::sin(deg_to_rad(t.angle_deg));
      const double ty = t.distance_m * std::cos(deg_to_rad(t.angle_deg));
      if (std::hypot(ux - tx, uy - ty) < 1e-6) out.push_back(p + ": co-located with target " + std::to_string(i));
    }
  }

  const auto& e = c.experiment;
  const size_t P = s.targets.size();
  switch (e.type) {
    case ExperimentType::Crb: check_bits_list(e.crb.bits, "experiment.crb.bits", true, out); break;
    case ExperimentType::Mse:
      check_bits_list(e.mse.bits, "experiment.mse.bits", true, out);
      if (e.mse.snr_db.empty()) out.push_back("experiment.mse.snr_db: must not be empty");
      if (e.mse.trials < 1) out.push_back("experiment.mse.trials: must be >= 1");
      if (!(e.mse.grid_step_deg > 0)) out.push_back("experiment.mse.grid_step_deg: must be positive");
      if (!(e.mse.grid_max_deg > e.mse.grid_min_deg)) out.push_back("experiment.mse: grid range is empty");
      if (e.mse.coarse_step_deg < 0) out.push_back("experiment.mse.coarse_step_deg: must be non-negative");
      check_target(e.mse.target, P, "experiment.mse.target", out);
      if (e.mse.target >= 0 && static_cast<size_t>(e.mse.target) < P) {
        const double a = s.targets[e.mse.target].angle_deg;
        if (a < e.mse.grid_min_deg || a > e.mse.grid_max_deg)
          out.push_back("experiment.mse: grid does not cover the target angle");
      }
      break;
    case ExperimentType::Resonance:
      check_bits_list(e.resonance.bits, "experiment.resonance.bits", false, out);
      if (!(e.resonance.snr_db_step > 0)) out.push_back("experiment.resonance.snr_db_step: must be positive");
      if (!(e.resonance.snr_db_max > e.resonance.snr_db_min)) out.push_back("experiment.resonance: SNR range is empty");
      check_target(e.resonance.target, P, "experiment.resonance.target", out);
      break;
    case ExperimentType::Boundary:
      check_bits_list(e.boundary.bits, "experiment.boundary.bits", true, out);
      if (e.boundary.points < 2) out.push_back("experiment.boundary.points: must be >= 2");
      check_target(e.boundary.target, P, "experiment.boundary.target", out);
      break;
    case ExperimentType::MinBits:
      if (e.minbits.placements < 1) out.push_back("experiment.minbits.placements: must be >= 1");
      if (!(e.minbits.radius_m > 1)) out.push_back("experiment.minbits.radius_m: must exceed 1 m");
      if (s.users.empty()) out.push_back("experiment.minbits: needs a user");
      break;
  }
  if (c.output.directory.empty()) out.push_back("output.directory: must not be empty");
  for (const auto& fmt : c.output.formats)
    if (fmt != "csv") out.push_back("output.formats: unsupported format '" + fmt + "'");

  if (out.empty()) {
    try {
      const auto sc = build_scenario(c);
      for (auto& v : sc.violations()) out.push_back("scenario: " + v);
    } catch (const DimensionError& err) {
      std::string msg = err.what();
      std::istringstream lines(msg);
      std::string line;
      std::getline(lines, line);
      while (std::getline(lines, line)) out.push_back("scenario: " + line.substr(line.find("- ") + 2));
    } catch (const std::exception& err) {
      out.push_back(std::string("scenario: ") + err.what());
    }
  }
  return out;
}

SceneGeometry build_geometry(const RunConfig& c) {
  SceneGeometry g;
  for (const auto& t : c.scenario.targets)
    g.targets.push_back({t.distance_m, deg_to_rad(t.angle_deg), t.doppler_hz, t.rcs_m2});
  for (const auto& u : c.scenario.users) g.users.push_back({u.distance_m, deg_to_rad(u.angle_deg), u.visible_targets});
  return g;
}

ScenarioConfig build_scenario(const RunConfig& c) {
  const auto& s = c.scenario;
  const auto& fb = s.frame;
  const int K = static_cast<int>(s.users.size());
  FrameConfig frame = make_frame(fb.num_dl_subcarriers, fb.num_ul_subcarriers_per_user, K, fb.num_symbols);
  if (!fb.dl_subcarriers.empty()) frame.dl_subcarriers = fb.dl_subcarriers;
  if (!fb.ul_subcarriers.empty()) frame.ul_subcarriers = fb.ul_subcarriers;
  frame.carrier_freq_hz = fb.carrier_freq_hz;
  frame.subcarrier_spacing_hz = fb.subcarrier_spacing_hz;
  frame.samples_per_symbol = fb.samples_per_symbol;
  if (!fb.symbol_power.empty()) frame.symbol_power = fb.symbol_power;

  ArrayConfig array;
  array.bs_tx_antennas = s.array.bs_tx_antennas;
  array.bs_rx_antennas = s.array.bs_rx_antennas;
  array.user_tx_antennas.assign(K, s.array.user_antennas);
  array.element_spacing_wavelengths = s.array.element_spacing_wavelengths;
  array.bs_gain_dbi = s.array.bs_gain_dbi;
  array.user_gain_dbi = s.array.user_gain_dbi;

  LinkBudget budget;
  budget.bs_power_dbm = s.bs_power_dbm;
  budget.user_power_dbm = s.user_power_dbm;
  budget.noise_psd_dbm_per_hz = s.noise_psd_dbm_per_hz;
  budget.pathloss = s.pathloss == "unit" ? PathlossModel::Unit : PathlossModel::FreeSpace;

  ScenarioConfig sc = make_scenario(build_geometry(c), frame, array, budget);
  sc.sample_index = fb.sample_index;
  sc.validate();
  return sc;
}

}  // namespace hrf
