#pragma once

#include "eogv/config.hpp"
#include "eogv/corpus.hpp"
#include "eogv/pipeline.hpp"
#include "eogv/recording.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace eogv {

// ---------------------------------------------------------------------------
// SNR

struct SnrReport {
  std::vector<double> per_event_db;  // NaN for excluded events
  std::vector<size_t> excluded;      // events without full flanks
  double mean_db{0.0};               // over included events; NaN if none
  size_t used{0};
};

// 20 log10(rms(event) / rms(flank before ++ flank after)), both channels
// pooled. Spans are in recording time.
SnrReport snr_db(const Recording& rec, std::span<const EventSpan> spans, double flank_s = 0.2);

// ---------------------------------------------------------------------------
// Classification protocols

using Predictor = std::function<int(std::span<const double>)>;
using Trainer = std::function<Predictor(const Dataset& train)>;

Trainer forest_trainer(const ForestParams& params);

struct EvalReport {
  std::string protocol;  // within_session, cross_session, cross_user
  std::vector<int> classes;
  std::vector<double> fold_accuracy;  // per fold, direction or held-out user
  double mean{0.0};
  double stdev{0.0};  // sample standard deviation, 0 for a single fold
  std::vector<std::vector<long>> confusion;  // [truth][predicted], rows follow `classes`
  std::string config_hash;

  long total() const;
  double pooled_accuracy() const;  // trace / total
  std::vector<double> precision() const;
  std::vector<double> recall() const;
};

// Fold id per row. Stratified by label, no group split across folds.
std::vector<int> stratified_group_folds(std::span<const int> y, std::span<const int> group, int k, uint64_t seed);

EvalReport kfold_cv(const Dataset& d, int k, uint64_t seed, const Trainer& trainer);

// Each group (session) standardised by its own feature statistics.
Dataset normalize_per_group(const Dataset& d);

// Train on A, test on B, and the reverse.
EvalReport cross_session_eval(const Dataset& a, const Dataset& b, const Trainer& trainer,
                              bool per_session_norm = true);

EvalReport leave_one_user_out(std::span<const Dataset> users, const Trainer& trainer, bool per_session_norm = true);

// Report as "key: value" lines in a fixed order.
std::string report_text(const EvalReport& r);
// One header row and one value row.
std::string report_csv(const EvalReport& r);
std::string confusion_csv(const EvalReport& r);

// ---------------------------------------------------------------------------
// Stream-level scoring

struct MatchPair {
  size_t truth{0};
  size_t detection{0};
  double timing_error_s{0.0};  // |peak time - span centre|
  bool label_correct{false};
  bool direction_confused{false};  // convergence read as divergence or back
};

struct MatchReport {
  std::vector<MatchPair> pairs;
  std::vector<size_t> misses;           // truth indices
  std::vector<size_t> false_positives;  // detection indices
  size_t truths{0};
  size_t correct{0};  // right label and timing error below the tolerance
  size_t direction_confusions{0};
  double max_timing_error_s{0.0};
};

// A detection matches a gesture span when its time lies in
// [onset - tol, offset + tol]; the nearest unclaimed one to the span centre
// wins. Non-gesture spans are ignored.
MatchReport match_detections(std::span<const Detection> dets, std::span<const EventSpan> truth,
                             double tol_s = 0.25, double timing_tol_s = 0.1);

struct FprReport {
  size_t events{0};
  size_t active_windows{0};
  size_t windows{0};
  double minutes{0.0};
  double rate{0.0};  // events / active windows, 0 when undefined
  bool defined{false};
  double events_per_minute{0.0};
};

FprReport false_positive_rate(const Recording& rec, const RunConfig& cfg, const ArtifactModel& gate,
                              const ForestModel& forest, bool preamble_on);

struct LatencyReport {
  size_t windows{0};
  double mean_ms{0.0};
  double stdev_ms{0.0};
  double max_ms{0.0};
  double stride_ms{0.0};
};

// Wall-clock time of StreamProcessor::process per window on a synthetic
// stream, after a short warm-up.
LatencyReport latency_bench(const RunConfig& cfg, const ArtifactModel& gate, const ForestModel& forest,
                            size_t n_windows = 2500, uint64_t seed = 1);

} // namespace eogv
