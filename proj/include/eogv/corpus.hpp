#pragma once

#include "eogv/config.hpp"
#include "eogv/gate.hpp"
#include "eogv/gesture.hpp"
#include "eogv/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eogv {

// Labelled feature rows with a recording id per row for grouped splits.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<int> group;

  size_t size() const { return y.size(); }
  void append(const Dataset& other);
};

// One recording of the gate corpus.
struct GateRecordingSpec {
  std::string category;  // "vergence", "walking", "chewing+vergence", ...
  bool vergence{false};
  std::vector<ArtifactKind> kinds;  // empty for pure vergence
  bool with_vergence{false};
  int segments{6};
};

// Class mix of the gate corpus: 17 vergence recordings (102 segments) and
// 480 noise segments over 12 motion/noise categories.
std::vector<GateRecordingSpec> gate_corpus_layout();

Session gen_gate_recording(const GateRecordingSpec& r, const RunConfig& cfg, uint64_t seed);

// One 2 s window per annotated event, centred on it with up to +-jitter_s of
// random offset, conditioned and reduced to artifact features. Label is 1
// (vergence) when `vergence` is set, else 0.
Dataset gate_windows(const Session& s, bool vergence, int group, const RunConfig& cfg, uint64_t seed,
                     double jitter_s = 0.4);

Dataset gate_corpus(const RunConfig& cfg, uint64_t seed);

// Gesture features for each annotated gesture: a window around the event is
// conditioned and smoothed, and the detected peak nearest to the event
// centre (within 0.25 s) is segmented. Events without such a peak are
// dropped. Label is the gesture index.
Dataset gesture_samples(const Session& s, int group, const RunConfig& cfg, uint64_t seed, double jitter_s = 0.3);

std::vector<ArtifactFeatures> to_artifact_features(const Dataset& d);
std::vector<WindowClass> to_window_classes(const Dataset& d);

ArtifactModel train_gate_model(const Dataset& d, const RunConfig& cfg);

// The gate corpus plus `extra` vergence sessions whose durations are drawn
// with a wider spread, so that the fast tail of the duration distribution
// (rare in the corpus itself) is represented. Used for deployed models.
Dataset gate_training_set(const RunConfig& cfg, uint64_t seed, int extra = 4, double duration_std = 0.4);

// Session spec filled from the run config (rate, eye, seed).
SessionSpec session_spec(const RunConfig& cfg, uint64_t seed, bool four_class = false, int rounds = 10);

struct TrainedModels {
  ArtifactModel gate;
  ForestModel forest;
};

// Gate model on the gate corpus, forest on `sessions` generated sessions.
TrainedModels train_default_models(const RunConfig& cfg, uint64_t seed, int sessions = 16, bool four_class = false);

} // namespace eogv
