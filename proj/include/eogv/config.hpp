#pragma once

#include "eogv/gate.hpp"
#include "eogv/geometry.hpp"
#include "eogv/gesture.hpp"
#include "eogv/sigcond.hpp"

#include <cstdint>
#include <string>

namespace eogv {

// Every tunable constant of the pipeline in one place. Loaded from JSON;
// unknown keys are rejected, missing keys keep their defaults.
struct RunConfig {
  double sample_rate{500.0};
  FilterSpec filter{};
  WindowSpec window{};
  GateSpec gate{};
  ArtifactFeatureSpec artifact_features{};
  LogisticOptions logistic{};
  PeakSpec peaks{};
  double segment_half_s{0.5};
  double merge_gap_s{0.5};
  ForestParams forest{};
  PreambleSpec preamble{};
  EyeConfig eye{};
  DepthSet depths{};
  uint64_t seed{7};

  // Acceptance thresholds used by `eval` for its exit code.
  double min_accuracy{0.95};
  double max_false_positive_rate{0.0};

  void validate() const;
};

std::string config_to_json(const RunConfig& c);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

// Config from `path` if non-empty, else from $EOGV_CONFIG if set, else defaults.
RunConfig resolve_config(const std::string& path);

// FNV-1a 64 over the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& c);

} // namespace eogv
