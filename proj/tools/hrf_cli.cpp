#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hrf/config.hpp"
#include "hrf/experiments.hpp"
#include "json.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

hrf::RunConfig load(const Flags& f) { return f.config.empty() ? hrf::parse_config("") : hrf::load_config(f.config); }

int run(const Flags& f, hrf::ExperimentType verb, bool explicit_type) {
  hrf::RunConfig cfg = load(f);
  if (explicit_type && cfg.experiment.type != verb) {
    // The verb picks the experiment unless the config names a different one.
    std::cerr << "error: config selects experiment '" << hrf::experiment_name(cfg.experiment.type)
              << "' but the command is '" << hrf::experiment_name(verb) << "'\n";
    return 2;
  }
  cfg.experiment.type = verb;
  if (f.seed_set) cfg.seed = f.seed;
  if (!f.out.empty()) cfg.output.directory = f.out;
  const auto issues = hrf::validate(cfg);
  if (!issues.empty()) throw hrf::ConfigError(issues);
  const auto s = hrf::run_experiment(cfg, cfg.output.directory, f.threads);
  std::cout << hrf::experiment_name(verb) << ": " << s.rows_ok << " rows ok, " << s.rows_failed << " failed, "
            << s.duration_s << " s -> " << cfg.output.directory << "\n";
  return s.rows_ok > 0 ? 0 : 1;
}

bool names_experiment(const std::string& path);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized hybrid radar fusion: CRB, rate and frontier studies"};
  app.require_subcommand(1);
  Flags f;
  std::string verb_name;

  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
    if (!runs) return;
    sub->add_option("--out", f.out, "output directory (overrides the config)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { f.seed = v, f.seed_set = true; }, "base RNG seed");
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  for (auto t : {hrf::ExperimentType::Crb, hrf::ExperimentType::Mse, hrf::ExperimentType::Resonance,
                 hrf::ExperimentType::Boundary, hrf::ExperimentType::MinBits}) {
    auto* sub = app.add_subcommand(hrf::experiment_name(t), std::string("run the ") + hrf::experiment_name(t) +
                                                                " experiment");
    add_common(sub, true);
  }
  auto* val = app.add_subcommand("validate", "check a configuration and print its canonical form");
  add_common(val, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) {
      const auto cfg = load(f);
      std::cout << hrf::write_config(cfg) << "config_hash: " << hrf::config_hash(cfg) << "\n";
      return 0;
    }
    for (auto* sub : app.get_subcommands()) {
      const auto t = hrf::parse_experiment(sub->get_name());
      if (!t) continue;
      return run(f, *t, !f.config.empty() && names_experiment(f.config));
    }
  } catch (const hrf::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

namespace {

bool names_experiment(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  return j.is_object() && j.contains("experiment") && j["experiment"].is_object() &&
         j["experiment"].contains("type");
}

}  // namespace
