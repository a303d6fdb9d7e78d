#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hrf/config.hpp"
#include "hrf/experiments.hpp"
#include "json.hpp"

using namespace hrf;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues;
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hrf_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("empty document gives the default scenario") {
    const auto cfg = parse_config("");
    CHECK(cfg == RunConfig{});
    CHECK(cfg.seed == 0);
    const auto sc = build_scenario(cfg);
    CHECK(sc.frame.carrier_freq_hz == 24e9);
    CHECK(sc.frame.subcarrier_spacing_hz == 15e3);
    CHECK(sc.frame.num_symbols == 14);
    CHECK(sc.frame.dl_subcarriers.size() == 36);
    CHECK(sc.frame.ul_subcarriers[0].size() == 24);
    CHECK(sc.array.bs_tx_antennas == 8);
    CHECK(sc.array.user_tx_antennas[0] == 4);
    CHECK(sc.bs_power_max_w == doctest::Approx(1.0));
    CHECK(sc.user_power_max_w == doctest::Approx(0.1));
    CHECK(sc.noise.psd_dbm_per_hz == -174.0);
    CHECK(parse_config("{}") == cfg);
  }

  TEST_CASE("zero bits is rejected") {
    CHECK(any_contains(issues_of(R"({"quantizer": {"bits": 0}})"), "quantizer.bits"));
  }

  TEST_CASE("overlapping subcarriers are named") {
    const auto v = issues_of(R"({"scenario": {"frame": {"dl_subcarriers": [0, 1, 2, 3], "ul_subcarriers": [[3, 4, 2]]}}})");
    CHECK(any_contains(v, "overlap"));
    CHECK(any_contains(v, "2, 3"));
  }

  TEST_CASE("every problem is reported") {
    const auto v = issues_of(R"({"seed": -1, "scenario": {"bs_power_dbm": "high", "colour": 1},
                                 "quantizer": {"bits": 3.5}, "output": {"formats": ["csv"]}})");
    CHECK(any_contains(v, "config.seed"));
    CHECK(any_contains(v, "scenario.bs_power_dbm"));
    CHECK(any_contains(v, "scenario.colour: unknown field"));
    CHECK(any_contains(v, "quantizer.bits: expected an integer"));
    CHECK(v.size() == 4);

    const auto w = issues_of(R"({"experiment": {"type": "mse", "mse": {"trials": 0, "target": 4}},
                                 "output": {"formats": ["parquet"]}})");
    CHECK(any_contains(w, "experiment.mse.trials"));
    CHECK(any_contains(w, "experiment.mse.target"));
    CHECK(any_contains(w, "parquet"));
  }

  TEST_CASE("parse errors carry a position") {
    const auto v = issues_of("{\n  \"seed\": 3,\n  \"quantizer\": {\"bits\": }\n}");
    REQUIRE(v.size() == 1);
    CHECK(any_contains(v, "line 3"));
    CHECK(any_contains(v, "column"));
  }

  TEST_CASE("round trip") {
    RunConfig c;
    c.seed = 1234567890123ULL;
    c.scenario.targets = {{80.0, 30.0, 10.0, 2.0}, {150.0, -20.0, 0.0, 1.0}};
    c.scenario.users[0].visible_targets = {1};
    c.scenario.frame.num_dl_subcarriers = 8;
    c.scenario.frame.ul_subcarriers = {{20, 21, 22}};
    c.scenario.precoder.bs_angle_deg = 12.5;
    c.scenario.pathloss = "unit";
    c.quantizer.bits = 3;
    c.quantizer.margin_db = 1.5;
    c.experiment.type = ExperimentType::Boundary;
    c.experiment.boundary.points = 7;
    c.experiment.boundary.bits = {1, 14};
    c.experiment.mse.snr_db = {-5.5, 3.25};
    c.output.directory = "elsewhere";
    const auto back = parse_config(write_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    c.seed += 1;
    CHECK(config_hash(back) != config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }

  TEST_CASE("load from a file") {
    const auto dir = scratch("load");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"seed": 9})";
    CHECK(load_config((dir / "c.json").string()).seed == 9);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
  }

  TEST_CASE("crb run writes rows and a manifest") {
    RunConfig c;
    c.seed = 4;
    c.scenario.bs_power_dbm = -40;
    c.scenario.user_power_dbm = -50;
    c.experiment.crb.bits = {3, 0};
    const auto dir = scratch("crb");
    const auto s = run_experiment(c, dir.string());
    CHECK(s.rows_ok > 0);
    const auto csv = slurp(dir / "crb.csv");
    CHECK(csv.rfind("bits,model,parameter,crb,condition_number,status,seed,config_hash\n", 0) == 0);
    CHECK(csv.find("," + config_hash(c)) != std::string::npos);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    for (const char* k : {"config_hash", "seed", "tool_version", "started_at", "duration_s", "rows_ok", "rows_failed"})
      CHECK(m.contains(k));
    CHECK(m["rows_ok"] == s.rows_ok);
    CHECK(parse_config(m["config"].dump()) == c);
  }

  TEST_CASE("outputs are deterministic for a fixed seed") {
    RunConfig c;
    c.experiment.type = ExperimentType::MinBits;
    c.experiment.minbits.placements = 30;
    c.seed = 17;
    const auto a = scratch("mb_a"), b = scratch("mb_b");
    run_experiment(c, a.string());
    run_experiment(c, b.string(), 2);
    CHECK(slurp(a / "minbits.csv") == slurp(b / "minbits.csv"));
    CHECK(slurp(a / "minbits.csv").rfind("dr_sig_db,min_bits,", 0) == 0);
  }

  TEST_CASE("resonance and boundary tables") {
    RunConfig c;
    c.experiment.type = ExperimentType::Resonance;
    c.experiment.resonance.bits = {1, 2};
    c.experiment.resonance.snr_db_min = 0;
    c.experiment.resonance.snr_db_max = 20;
    c.experiment.resonance.snr_db_step = 10;
    auto dir = scratch("res");
    run_experiment(c, dir.string());
    for (const char* f : {"resonance_b1.csv", "resonance_b2.csv", "resonance_ideal.csv"}) {
      const auto t = slurp(dir / f);
      CHECK(t.rfind("snr_db,crb_theta,", 0) == 0);
      CHECK(std::count(t.begin(), t.end(), '\n') == 4);
    }

    c.experiment.type = ExperimentType::Boundary;
    c.experiment.boundary.points = 3;
    c.experiment.boundary.bits = {2};
    dir = scratch("bd");
    const auto s = run_experiment(c, dir.string());
    const auto t = slurp(dir / "boundary_b2.csv");
    CHECK(t.rfind("mu,rate_bits,rate_kbps,crb,rank1_gap,solver,", 0) == 0);
    CHECK(std::count(t.begin(), t.end(), '\n') == 4);
    CHECK(s.rows_ok + s.rows_failed == 3);
  }
  TEST_CASE("quantizer block feeds the experiments") {
    RunConfig c;
    c.experiment.type = ExperimentType::Resonance;
    c.experiment.resonance.bits = {};
    c.quantizer.bits = 3;
    c.experiment.resonance.snr_db_max = 0;
    c.experiment.resonance.snr_db_step = 10;
    auto dir = scratch("qb");
    run_experiment(c, dir.string());
    CHECK(fs::exists(dir / "resonance_b3.csv"));
    CHECK(!fs::exists(dir / "resonance_b1.csv"));

    // A steeper DR rule never needs more bits.
    c.experiment.type = ExperimentType::MinBits;
    c.experiment.minbits.placements = 40;
    const auto a = scratch("qb_a"), b = scratch("qb_b");
    run_experiment(c, a.string());
    c.quantizer.dr_db_per_bit = 12.0;
    run_experiment(c, b.string());
    const auto max_bits = [](const fs::path& f) {
      std::ifstream in(f);
      std::string line;
      std::getline(in, line);
      int m = 0;
      while (std::getline(in, line)) m = std::max(m, std::stoi(line.substr(line.find(',') + 1)));
      return m;
    };
    CHECK(max_bits(b / "minbits.csv") < max_bits(a / "minbits.csv"));
  }
}
