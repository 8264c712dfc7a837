#pragma once

#include "eogv/config.hpp"
#include "eogv/gate.hpp"
#include "eogv/gesture.hpp"
#include "eogv/recording.hpp"
#include "eogv/sigcond.hpp"

#include <optional>
#include <vector>

namespace eogv {

struct Detection {
  double timestamp_s{0.0};  // absolute time of the gesture peak
  int label{-1};            // gesture index, see GestureLabel::from_index
  double confidence{0.0};   // forest vote fraction
  double window_start_s{0.0};
};

// Per-window bookkeeping, mostly for diagnostics and FPR denominators.
struct WindowTrace {
  bool active{false};       // passed the MAD gate
  bool vergence{false};     // logistic said vergence
  bool brow{false};         // consumed by the preamble
  bool toggled{false};
  size_t peaks{0};
  size_t segments{0};
  size_t skipped_edge{0};   // peaks too close to a window edge
};

// Windows of one stream, processed in order. Owns the preamble state.
class StreamProcessor {
public:
  StreamProcessor(const RunConfig& cfg, const ArtifactModel& gate, const ForestModel& forest,
                  bool preamble_enabled, bool start_active = false);

  void set_threshold(const GateThreshold& t) { threshold_ = t; }
  const GateThreshold& threshold() const { return threshold_; }
  const PreambleState& preamble() const { return preamble_; }

  // Raw (unconditioned) window in, per-window detections out (not merged).
  std::vector<Detection> process(const Window& raw, WindowTrace* trace = nullptr);

private:
  RunConfig cfg_;
  const ArtifactModel& gate_;
  const ForestModel& forest_;
  bool preamble_enabled_;
  Conditioner conditioner_;
  SavgolFilter smoother_;
  GateThreshold threshold_;
  PreambleState preamble_;
};

// Chains detections closer than `gap` in time and keeps the most confident
// one of each chain (earliest on ties). Detections may arrive out of order
// across overlapping windows, so chains are only released once no later
// detection can extend them.
class DetectionMerger {
public:
  explicit DetectionMerger(double gap_s) : gap_(gap_s) {}

  void push(const Detection& d) { pending_.push_back(d); }
  // Emits chains that no detection at time >= horizon can extend.
  std::vector<Detection> release(double horizon);
  std::vector<Detection> flush();

private:
  double gap_;
  std::vector<Detection> pending_;
};

std::vector<Detection> merge_detections(std::vector<Detection> dets, double gap_s);

struct StreamResult {
  std::vector<Detection> events;
  size_t windows{0};
  size_t active_windows{0};
  size_t vergence_windows{0};
  size_t toggles{0};
};

struct StreamOptions {
  bool preamble{false};
  bool start_active{false};  // initial preamble state
};

// Offline run over a whole recording. Recordings shorter than one window
// (including empty ones) yield no events.
StreamResult classify_vergence_stream(const Recording& rec, const RunConfig& cfg, const ArtifactModel& gate,
                                      const ForestModel& forest, const StreamOptions& opt = {});

} // namespace eogv
