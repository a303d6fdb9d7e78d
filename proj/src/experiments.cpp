#include "hrf/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hrf/boundary.hpp"
#include "hrf/crb.hpp"
#include "hrf/estimator.hpp"
#include "hrf/quantizer.hpp"
#include "hrf/rng.hpp"
#include "json.hpp"

namespace hrf {

namespace fs = std::filesystem;

PrecoderSet build_precoders(const RunConfig& cfg, const ScenarioConfig& sc) {
  const auto& pc = cfg.scenario.precoder;
  const double bs = pc.bs_angle_deg ? deg_to_rad(*pc.bs_angle_deg)
                                    : (sc.targets.empty() ? 0.0 : sc.targets.front().aoa_rad);
  const double ua = pc.user_angle_deg ? deg_to_rad(*pc.user_angle_deg) : 0.0;
  return PrecoderSet::steered(sc, bs, std::vector<double>(sc.users.size(), ua));
}

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

class Table {
 public:
  Table(const fs::path& path, const std::vector<std::string>& header, RunSummary& summary, std::string provenance)
      : out_(path), summary_(summary), tail_(std::move(provenance)) {
    if (!out_) throw Error("cannot write " + path.string());
    summary.files.push_back(path.filename().string());
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << ",status,seed,config_hash\n";
  }

  void row(const std::vector<std::string>& cells, const std::string& status) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "," << csv_field(status) << "," << tail_ << "\n";
    (status == "ok" ? summary_.rows_ok : summary_.rows_failed)++;
  }

 private:
  std::ofstream out_;
  RunSummary& summary_;
  std::string tail_;
};

std::optional<QuantizerSpec> spec_for(int bits) {
  if (bits <= 0) return std::nullopt;
  return design_lloyd_max(bits);
}

std::vector<int> bits_or_default(const std::vector<int>& bits, const RunConfig& cfg) {
  return bits.empty() ? std::vector<int>{cfg.quantizer.bits} : bits;
}

DynamicRangeRule dr_rule(const RunConfig& cfg) { return {cfg.quantizer.dr_db_per_bit, cfg.quantizer.dr_offset_db}; }

SymbolFrame config_symbols(const RunConfig& cfg, const ScenarioConfig& sc) {
  Rng rng(derive_seed(cfg.seed, 0x5eed, 0));
  return draw_symbols(sc.frame, rng);
}

// psi without user-side AoDs; with one stream per user those angles are treated as known.
ParameterVector identifiable_basis(const ScenarioConfig& sc) {
  const auto psi = ParameterVector::for_scenario(sc);
  std::vector<size_t> keep;
  for (size_t i = 0; i < psi.size(); ++i)
    if (psi[i].kind != ParamKind::UserAod && psi[i].kind != ParamKind::PathAod) keep.push_back(i);
  return psi.subset(keep);
}

void run_crb(const RunConfig& cfg, const ScenarioConfig& sc, const fs::path& dir, RunSummary& s,
             const std::string& tail) {
  Table t(dir / "crb.csv", {"bits", "model", "parameter", "crb", "condition_number"}, s, tail);
  const auto pre = build_precoders(cfg, sc);
  const auto sym = config_symbols(cfg, sc);
  const auto basis = identifiable_basis(sc);
  for (int b : bits_or_default(cfg.experiment.crb.bits, cfg)) {
    const std::string bits = std::to_string(b);
    try {
      const auto spec = spec_for(b);
      const FisherMatrix F = spec ? quantized_fim(sc, pre, sym, *spec, basis) : ideal_fim(sc, pre, sym, basis);
      try {
        const CrbResult r = crb_from_fim(F);
        for (size_t i = 0; i < r.params.size(); ++i)
          t.row({bits, "joint", r.params[i].name(), num(r.values[i]), num(r.condition_number)}, "ok");
      } catch (const SingularFimError& e) {
        std::string names;
        for (const auto& n : e.unidentifiable) names += (names.empty() ? "" : " ") + n;
        t.row({bits, "joint", "", "", num(e.condition_number)}, "singular FIM: " + names);
      }
      for (int i = 0; i < sc.num_targets(); ++i) {
        const ParamEntry e{ParamKind::TargetAoa, i};
        const std::string name = e.name();
        try {
          const CrbResult r = crb_from_fim(restrict_fim(F, {F.basis.index_of(e)}));
          t.row({bits, "theta_only", name, num(r.values[0]), num(r.condition_number)}, "ok");
        } catch (const SingularFimError& err) {
          t.row({bits, "theta_only", name, "", num(err.condition_number)}, "singular FIM");
        }
      }
    } catch (const std::exception& e) {
      t.row({bits, "", "", "", ""}, std::string("error: ") + e.what());
    }
  }
}

void run_mse(const RunConfig& cfg, const ScenarioConfig& sc, const fs::path& dir, RunSummary& s,
             const std::string& tail, int threads) {
  const auto& p = cfg.experiment.mse;
  Table t(dir / "mse.csv", {"bits", "snr_db", "noise_variance", "mse", "crb", "bias", "flat_trials", "trials"}, s,
          tail);
  const auto pre = build_precoders(cfg, sc);
  for (int b : bits_or_default(p.bits, cfg)) {
    MlExperiment e;
    e.grid = {deg_to_rad(p.grid_min_deg), deg_to_rad(p.grid_max_deg), deg_to_rad(p.grid_step_deg)};
    e.coarse_step_rad = deg_to_rad(p.coarse_step_deg);
    e.trials = p.trials;
    e.snr_db = p.snr_db;
    e.target = p.target;
    e.seed = cfg.seed;
    e.threads = threads;
    try {
      e.quantizer = spec_for(b);
      const auto r = mse_vs_crb_sweep(sc, pre, e);
      for (const auto& pt : r.points) {
        const bool ok = std::isfinite(pt.mse) && std::isfinite(pt.crb);
        t.row({std::to_string(b), num(pt.snr_db), num(pt.noise_variance), num(pt.mse), num(pt.crb), num(pt.bias),
               std::to_string(pt.flat_trials), std::to_string(pt.trials)},
              ok ? "ok" : "non-finite result");
      }
    } catch (const std::exception& ex) {
      for (double snr : p.snr_db)
        t.row({std::to_string(b), num(snr), "", "", "", "", "", ""}, std::string("error: ") + ex.what());
    }
  }
}

void run_resonance(const RunConfig& cfg, const ScenarioConfig& sc, const fs::path& dir, RunSummary& s,
                   const std::string& tail, int threads) {
  const auto& p = cfg.experiment.resonance;
  std::vector<double> snr;
  for (double x = p.snr_db_min; x <= p.snr_db_max + 1e-9; x += p.snr_db_step) snr.push_back(x);
  const auto pre = build_precoders(cfg, sc);
  std::vector<std::string> files;
  try {
    const auto r = stochastic_resonance_sweep(sc, pre, bits_or_default(p.bits, cfg), snr, p.target, cfg.seed, threads);
    for (const auto& c : r.curves) {
      const std::string name = c.bits > 0 ? "resonance_b" + std::to_string(c.bits) + ".csv" : "resonance_ideal.csv";
      Table t(dir / name, {"snr_db", "crb_theta"}, s, tail);
      for (size_t i = 0; i < r.snr_db.size(); ++i)
        t.row({num(r.snr_db[i]), num(c.crb[i])}, std::isfinite(c.crb[i]) ? "ok" : "singular FIM");
    }
  } catch (const std::exception& ex) {
    Table t(dir / "resonance_error.csv", {"snr_db", "crb_theta"}, s, tail);
    for (double x : snr) t.row({num(x), ""}, std::string("error: ") + ex.what());
  }
}

void run_boundary(const RunConfig& cfg, const ScenarioConfig& sc, const fs::path& dir, RunSummary& s,
                  const std::string& tail) {
  const auto& p = cfg.experiment.boundary;
  const std::vector<std::string> header{"mu",        "rate_bits", "rate_kbps",        "crb",
                                        "rank1_gap", "solver",    "rate_logdet_bits", "pareto"};
  for (int b : bits_or_default(p.bits, cfg)) {
    const std::string name = b > 0 ? "boundary_b" + std::to_string(b) + ".csv" : "boundary_ideal.csv";
    Table t(dir / name, header, s, tail);
    try {
      BoundaryQuery q;
      q.target = p.target;
      q.eta = b > 0 ? design_lloyd_max(b).distortion_factor : 0.0;
      q.per_user_rate = p.per_user_rate;
      if (p.dr_gating) q.fim_options = dr_gated_options(sc, b, cfg.quantizer.margin_db, dr_rule(cfg));
      FrontierOptions fo;
      fo.polish = p.polish;
      const Frontier f = trace_frontier(sc, p.points, q, fo);
      for (const auto& pt : f.points)
        t.row({num(pt.mu), num(pt.rate_bits_per_use), num(pt.rate_kbps), num(pt.crb_rad2), num(pt.rank1_gap),
               sdp::status_name(pt.solver_status), num(pt.rate_logdet_bits), pt.pareto ? "1" : "0"},
              pt.ok() ? "ok" : (pt.note.empty() ? std::string("solver failure") : pt.note));
    } catch (const std::exception& ex) {
      t.row({"", "", "", "", "", "", "", ""}, std::string("error: ") + ex.what());
    }
  }
}

void run_minbits(const RunConfig& cfg, const ScenarioConfig& sc, const fs::path& dir, RunSummary& s,
                 const std::string& tail) {
  Table t(dir / "minbits.csv", {"dr_sig_db", "min_bits", "target_distance_m", "target_angle_deg"}, s, tail);
  MinBitsScan scan;
  scan.radius_m = cfg.experiment.minbits.radius_m;
  scan.placements = cfg.experiment.minbits.placements;
  scan.margin_db = cfg.quantizer.margin_db;
  scan.rule = dr_rule(cfg);
  try {
    const auto rows = min_bits_scan(build_geometry(cfg), sc.array, sc.frame.carrier_freq_hz, scan, cfg.seed);
    for (const auto& r : rows)
      t.row({num(r.dr_sig_db), std::to_string(r.min_bits), num(r.target_distance_m),
             num(rad_to_deg(r.target_angle_rad))},
            "ok");
  } catch (const std::exception& ex) {
    t.row({"", "", "", ""}, std::string("error: ") + ex.what());
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

RunSummary run_experiment(const RunConfig& cfg, const std::string& out_dir, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const ScenarioConfig sc = build_scenario(cfg);
  const std::string hash = config_hash(cfg);
  const std::string tail = std::to_string(cfg.seed) + "," + hash;

  RunSummary s;
  switch (cfg.experiment.type) {
    case ExperimentType::Crb: run_crb(cfg, sc, dir, s, tail); break;
    case ExperimentType::Mse: run_mse(cfg, sc, dir, s, tail, threads); break;
    case ExperimentType::Resonance: run_resonance(cfg, sc, dir, s, tail, threads); break;
    case ExperimentType::Boundary: run_boundary(cfg, sc, dir, s, tail); break;
    case ExperimentType::MinBits: run_minbits(cfg, sc, dir, s, tail); break;
  }
  s.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json m;
  m["experiment"] = experiment_name(cfg.experiment.type);
  m["config_hash"] = hash;
  m["seed"] = cfg.seed;
  m["tool_version"] = kToolVersion;
  m["started_at"] = started;
  m["duration_s"] = s.duration_s;
  m["rows_ok"] = s.rows_ok;
  m["rows_failed"] = s.rows_failed;
  m["files"] = s.files;
  m["config"] = nlohmann::json::parse(write_config(cfg));
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  return s;
}

}  // namespace hrf
