#include "hrf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace hrf {

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

double dbi(double g) { return db_to_linear(g); }

}  // namespace

std::vector<std::string> FrameConfig::violations() const {
  std::vector<std::string> out;
  if (carrier_freq_hz <= 0) out.push_back("carrier frequency must be positive");
  if (subcarrier_spacing_hz <= 0) out.push_back("subcarrier spacing must be positive");
  if (num_symbols < 1) out.push_back("num_symbols must be >= 1");
  if (samples_per_symbol < 1) out.push_back("samples_per_symbol must be >= 1");
  if (dl_subcarriers.empty()) out.push_back("downlink subcarrier set is empty");

  std::map<int, std::vector<std::string>> owners;
  auto collect = [&](const std::vector<int>& set, const std::string& name) {
    std::set<int> seen;
    for (int m : set) {
      if (m < 0) out.push_back(name + " contains negative index " + std::to_string(m));
      if (!seen.insert(m).second) out.push_back(name + " repeats index " + std::to_string(m));
      else owners[m].push_back(name);
    }
  };
  collect(dl_subcarriers, "downlink");
  for (size_t k = 0; k < ul_subcarriers.size(); ++k) {
    if (ul_subcarriers[k].empty()) out.push_back("uplink set of user " + std::to_string(k) + " is empty");
    collect(ul_subcarriers[k], "uplink user " + std::to_string(k));
  }
  std::vector<int> overlap;
  for (const auto& [m, who] : owners)
    if (who.size() > 1) overlap.push_back(m);
  if (!overlap.empty()) out.push_back("subcarrier sets overlap at indices [" + join_ints(overlap) + "]");

  if (symbol_power.size() != ul_subcarriers.size() + 1)
    out.push_back("symbol_power needs " + std::to_string(ul_subcarriers.size() + 1) + " entries, got " +
                  std::to_string(symbol_power.size()));
  for (size_t k = 0; k < symbol_power.size(); ++k)
    if (!(symbol_power[k] > 0)) out.push_back("symbol_power[" + std::to_string(k) + "] must be positive");
  return out;
}

FrameConfig make_frame(int num_dl, int num_ul_per_user, int num_users, int num_symbols) {
  FrameConfig f;
  f.num_symbols = num_symbols;
  int m = 0;
  for (int i = 0; i < num_dl; ++i) f.dl_subcarriers.push_back(m++);
  for (int k = 0; k < num_users; ++k) {
    std::vector<int> set;
    for (int i = 0; i < num_ul_per_user; ++i) set.push_back(m++);
    f.ul_subcarriers.push_back(std::move(set));
  }
  f.symbol_power.assign(num_users + 1, 1.0);
  return f;
}

std::vector<std::string> ArrayConfig::violations() const {
  std::vector<std::string> out;
  if (bs_tx_antennas < 1) out.push_back("bs_tx_antennas must be >= 1");
  if (bs_rx_antennas < 1) out.push_back("bs_rx_antennas must be >= 1");
  for (size_t k = 0; k < user_tx_antennas.size(); ++k)
    if (user_tx_antennas[k] < 1) out.push_back("user_tx_antennas[" + std::to_string(k) + "] must be >= 1");
  if (!(element_spacing_wavelengths > 0)) out.push_back("element spacing must be positive");
  return out;
}

std::vector<int> UserState::visible_targets() const {
  std::vector<int> out;
  for (const auto& p : reflected_paths) out.push_back(p.target_index);
  return out;
}

NoiseModel NoiseModel::from_psd(double psd_dbm_per_hz, double bandwidth_hz) {
  return {psd_dbm_per_hz, dbm_to_watt(psd_dbm_per_hz) * bandwidth_hz};
}

std::vector<std::string> ScenarioConfig::violations() const {
  std::vector<std::string> out = frame.violations();
  for (auto& s : array.violations()) out.push_back(std::move(s));
  const int K = num_users();
  if (frame.num_users() != K)
    out.push_back("frame allocates " + std::to_string(frame.num_users()) + " uplink sets for " + std::to_string(K) +
                  " users");
  if (static_cast<int>(array.user_tx_antennas.size()) != K)
    out.push_back("user_tx_antennas has " + std::to_string(array.user_tx_antennas.size()) + " entries for " +
                  std::to_string(K) + " users");
  for (int i = 0; i < num_targets(); ++i) {
    const auto& t = targets[i];
    if (t.one_way_delay_s < 0) out.push_back("target " + std::to_string(i) + " has negative delay");
    if (std::abs(t.aoa_rad) > kPi / 2) out.push_back("target " + std::to_string(i) + " AoA outside [-90, 90] deg");
  }
  for (int k = 0; k < K; ++k) {
    const auto& u = users[k];
    const std::string tag = "user " + std::to_string(k);
    if (u.delay_s < 0) out.push_back(tag + " has negative delay");
    if (static_cast<int>(u.reflected_paths.size()) > num_targets())
      out.push_back(tag + " sees more targets than the BS monitors");
    std::set<int> seen;
    for (const auto& p : u.reflected_paths) {
      if (p.target_index < 0 || p.target_index >= num_targets())
        out.push_back(tag + " reflected path references unknown target " + std::to_string(p.target_index));
      else if (!seen.insert(p.target_index).second)
        out.push_back(tag + " has two reflected paths for target " + std::to_string(p.target_index));
      if (p.delay_s < u.delay_s) out.push_back(tag + " reflected path shorter than the direct path");
    }
  }
  if (!(noise.noise_variance > 0)) out.push_back("noise variance must be positive");
  if (!(bs_power_max_w > 0)) out.push_back("BS power cap must be positive");
  if (!(user_power_max_w > 0)) out.push_back("user power cap must be positive");
  if (sample_index < 0 || sample_index >= frame.samples_per_symbol)
    out.push_back("sample index outside [0, samples_per_symbol)");
  return out;
}

void ScenarioConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw DimensionError(msg);
}

VectorXcd steering_vector(double theta, int n_elems, double spacing) {
  VectorXcd a(n_elems);
  const double k = 2.0 * kPi * spacing * std::sin(theta);
  for (int n = 0; n < n_elems; ++n) a[n] = std::polar(1.0, k * n);
  return a;
}

VectorXcd steering_derivative(double theta, int n_elems, double spacing) {
  VectorXcd a = steering_vector(theta, n_elems, spacing);
  const double k = 2.0 * kPi * spacing * std::cos(theta);
  for (int n = 0; n < n_elems; ++n) a[n] *= kJ * (k * n);
  return a;
}

cd subcarrier_phase(int m, double tau, int v, const FrameConfig& frame) {
  const double M = frame.samples_per_symbol;
  const double phase = (m * frame.subcarrier_spacing_hz + frame.carrier_freq_hz) * tau - m * v / M;
  return std::polar(1.0, -2.0 * kPi * phase);
}

cd subcarrier_phase_derivative(int m, double tau, int v, const FrameConfig& frame) {
  const double f = m * frame.subcarrier_spacing_hz + frame.carrier_freq_hz;
  return -2.0 * kPi * f * kJ * subcarrier_phase(m, tau, v, frame);
}

MatrixXcd ChannelSet::uplink(int l, int k, int mi) const {
  MatrixXcd h = direct[l][k][mi].matrix();
  for (const auto& r : reflected[l][k][mi]) h += r.matrix();
  return h;
}

ChannelSet build_channels(const ScenarioConfig& sc, int v) {
  sc.validate();
  const auto& fr = sc.frame;
  const auto& ar = sc.array;
  const int L = fr.num_symbols;
  const double T = fr.symbol_duration();
  const int P = sc.num_targets();
  const int K = sc.num_users();

  std::vector<VectorXcd> tgt_rx(P), tgt_tx(P);
  for (int i = 0; i < P; ++i) {
    tgt_rx[i] = steering_vector(sc.targets[i].aoa_rad, ar.bs_rx_antennas, ar.element_spacing_wavelengths);
    tgt_tx[i] = steering_vector(sc.targets[i].aoa_rad, ar.bs_tx_antennas, ar.element_spacing_wavelengths);
  }

  ChannelSet ch;
  ch.sample_index = v;
  ch.num_rx = ar.bs_rx_antennas;
  ch.echo.resize(L);
  ch.direct.resize(L);
  ch.reflected.resize(L);
  for (int l = 0; l < L; ++l) {
    for (int m : fr.dl_subcarriers) {
      std::vector<Rank1Channel> row;
      for (int i = 0; i < P; ++i) {
        const auto& t = sc.targets[i];
        const cd doppler = std::polar(1.0, 2.0 * kPi * t.doppler_hz * l * T);
        row.push_back({t.complex_gain * doppler * subcarrier_phase(m, 2.0 * t.one_way_delay_s, v, fr), tgt_rx[i],
                       tgt_tx[i]});
      }
      ch.echo[l].push_back(std::move(row));
    }
    ch.direct[l].resize(K);
    ch.reflected[l].resize(K);
    for (int k = 0; k < K; ++k) {
      const auto& u = sc.users[k];
      const int nu = ar.user_tx_antennas[k];
      const VectorXcd a_r = steering_vector(u.aoa_at_bs_rad, ar.bs_rx_antennas, ar.element_spacing_wavelengths);
      const VectorXcd a_u = steering_vector(u.aod_rad, nu, ar.element_spacing_wavelengths);
      for (int m : fr.ul_subcarriers[k]) {
        ch.direct[l][k].push_back({u.complex_gain * subcarrier_phase(m, u.delay_s, v, fr), a_r, a_u});
        std::vector<Rank1Channel> refl;
        for (const auto& p : u.reflected_paths) {
          const auto& t = sc.targets[p.target_index];
          const cd doppler = std::polar(1.0, 2.0 * kPi * t.doppler_hz * l * T);
          refl.push_back({p.complex_gain * doppler * subcarrier_phase(m, p.delay_s, v, fr), tgt_rx[p.target_index],
                          steering_vector(p.aod_to_target_rad, nu, ar.element_spacing_wavelengths)});
        }
        ch.reflected[l][k].push_back(std::move(refl));
      }
    }
  }
  return ch;
}

double free_space_amplitude(double d, double tx_gain_dbi, double rx_gain_dbi, double fc) {
  if (!(d > 0)) throw std::invalid_argument("link distance must be positive");
  const double lambda = kSpeedOfLight / fc;
  return std::sqrt(dbi(tx_gain_dbi) * dbi(rx_gain_dbi)) * lambda / (4.0 * kPi * d);
}

double monostatic_amplitude(double d, double gain_dbi, double rcs, double fc) {
  return bistatic_amplitude(d, d, gain_dbi, gain_dbi, rcs, fc);
}

double bistatic_amplitude(double d1, double d2, double tx_gain_dbi, double rx_gain_dbi, double rcs, double fc) {
  if (!(d1 > 0) || !(d2 > 0)) throw std::invalid_argument("link distance must be positive");
  const double lambda = kSpeedOfLight / fc;
  const double p = dbi(tx_gain_dbi) * dbi(rx_gain_dbi) * lambda * lambda * rcs /
                   (std::pow(4.0 * kPi, 3) * d1 * d1 * d2 * d2);
  return std::sqrt(p);
}

namespace {

struct Point {
  double x, y;
};

// BS at the origin, broadside along +y, angles positive toward +x.
Point place(double d, double angle) { return {d * std::sin(angle), d * std::cos(angle)}; }
double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<int> visible(const UserPlacement& u, int P) {
  if (!u.visible_targets.empty()) return u.visible_targets;
  std::vector<int> all(P);
  for (int i = 0; i < P; ++i) all[i] = i;
  return all;
}

}  // namespace

PathGains pathloss_and_gains(const SceneGeometry& g, const ArrayConfig& ar, double fc, PathlossModel model) {
  PathGains out;
  const int P = static_cast<int>(g.targets.size());
  for (const auto& t : g.targets) {
    if (!(t.distance_m > 0)) throw std::invalid_argument("target distance must be positive");
    out.echo.push_back(model == PathlossModel::Unit ? 1.0
                                                    : monostatic_amplitude(t.distance_m, ar.bs_gain_dbi, t.rcs_m2, fc));
  }
  for (const auto& u : g.users) {
    if (!(u.distance_m > 0)) throw std::invalid_argument("user distance must be positive");
    const Point pu = place(u.distance_m, u.angle_rad);
    out.direct.push_back(model == PathlossModel::Unit
                             ? 1.0
                             : free_space_amplitude(u.distance_m, ar.user_gain_dbi, ar.bs_gain_dbi, fc));
    std::vector<double> refl;
    for (int j : visible(u, P)) {
      const auto& t = g.targets.at(j);
      const Point pt = place(t.distance_m, t.angle_rad);
      const double d1 = dist(pu, pt);
      refl.push_back(model == PathlossModel::Unit
                         ? 1.0
                         : bistatic_amplitude(d1, t.distance_m, ar.user_gain_dbi, ar.bs_gain_dbi, t.rcs_m2, fc));
    }
    out.reflected.push_back(std::move(refl));
  }
  return out;
}

ScenarioConfig make_scenario(const SceneGeometry& g, const FrameConfig& frame, const ArrayConfig& array,
                             const LinkBudget& budget) {
  ScenarioConfig sc;
  sc.frame = frame;
  sc.array = array;
  sc.noise = NoiseModel::from_psd(budget.noise_psd_dbm_per_hz, frame.subcarrier_spacing_hz);
  sc.bs_power_max_w = dbm_to_watt(budget.bs_power_dbm);
  sc.user_power_max_w = dbm_to_watt(budget.user_power_dbm);

  const PathGains gains = pathloss_and_gains(g, array, frame.carrier_freq_hz, budget.pathloss);
  const int P = static_cast<int>(g.targets.size());
  for (int i = 0; i < P; ++i) {
    const auto& t = g.targets[i];
    sc.targets.push_back({t.angle_rad, t.distance_m / kSpeedOfLight, t.doppler_hz, cd(gains.echo[i], 0.0)});
  }
  for (size_t k = 0; k < g.users.size(); ++k) {
    const auto& u = g.users[k];
    const Point pu = place(u.distance_m, u.angle_rad);
    // User array boresight points at the BS.
    const double bx = -pu.x / u.distance_m, by = -pu.y / u.distance_m;
    UserState us;
    us.aod_rad = 0.0;
    us.aoa_at_bs_rad = u.angle_rad;
    us.delay_s = u.distance_m / kSpeedOfLight;
    us.complex_gain = cd(gains.direct[k], 0.0);
    const auto vis = visible(u, P);
    for (size_t jj = 0; jj < vis.size(); ++jj) {
      const int j = vis[jj];
      const auto& t = g.targets[j];
      const Point pt = place(t.distance_m, t.angle_rad);
      const double d1 = dist(pu, pt);
      const double ex = (pt.x - pu.x) / d1, ey = (pt.y - pu.y) / d1;
      ReflectedPath rp;
      rp.target_index = j;
      rp.delay_s = (d1 + t.distance_m) / kSpeedOfLight;
      rp.aod_to_target_rad = std::atan2(bx * ey - by * ex, bx * ex + by * ey);
      rp.complex_gain = cd(gains.reflected[k][jj], 0.0);
      us.reflected_paths.push_back(rp);
    }
    sc.users.push_back(std::move(us));
  }
  sc.validate();
  return sc;
}

}  // namespace hrf
