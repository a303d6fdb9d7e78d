#pragma once

#include <string>
#include <vector>

#include "hrf/config.hpp"
#include "hrf/signal.hpp"

namespace hrf {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunSummary {
  int rows_ok = 0;
  int rows_failed = 0;
  double duration_s = 0.0;
  std::vector<std::string> files;  // relative to the output directory
};

// Precoders from the config: the BS beam defaults to the first target, user beams to boresight.
PrecoderSet build_precoders(const RunConfig& cfg, const ScenarioConfig& sc);

// Writes the experiment tables and manifest.json into out_dir. Per-point failures land in their rows.
RunSummary run_experiment(const RunConfig& cfg, const std::string& out_dir, int threads = 1);

}  // namespace hrf
