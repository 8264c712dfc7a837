#pragma once

#include "eogv/gate.hpp"
#include "eogv/geometry.hpp"
#include "eogv/zscore.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eogv {

// ---------------------------------------------------------------------------
// Peak-anchored segmentation

struct PeakSpec {
  double min_amplitude_mv{30.0};
  double min_separation_s{0.5};
};

// Local maxima of max_c |x_c - reference_c| above the amplitude threshold.
// Candidates are kept greedily from the largest down, discarding any closer
// than min_separation to one already kept. Returns ascending indices.
// Without a reference, each channel's window median is used.
std::vector<size_t> detect_peaks(const Window& smoothed, const PeakSpec& spec = {},
                                 const std::optional<std::array<double, 2>>& reference = std::nullopt);

// Closed interval [peak - half, peak + half]: 2 * half + 1 samples with the
// peak on the centre sample.
struct GestureSegment {
  double sample_rate{500.0};
  std::array<std::vector<double>, 2> samples;
  size_t peak_index{0};         // within the source window
  size_t source_start_index{0}; // source window offset in the stream

  size_t size() const { return samples[kLeft].size(); }
  size_t center() const { return size() / 2; }
};

// Returns nullopt when the peak lies closer than half_s to either window edge.
std::optional<GestureSegment> extract_segment(const Window& w, size_t peak, double half_s = 0.5);

// ---------------------------------------------------------------------------
// Features
//
// For each channel (left first) and each half (first half first), split at
// the centre sample which both halves include:
//   amplitude_range, definite_integral, end_to_end_slope,
//   mean_first_derivative, variance_first_derivative
// Integrals use the trapezoidal rule (mV s); derivatives are first
// differences times the sample rate (mV/s); variances are population
// variances; slope is (last - first) / half duration.

inline constexpr size_t kGestureFeatureCount = 20;
using GestureFeatures = std::array<double, kGestureFeatureCount>;

const std::array<std::string, kGestureFeatureCount>& gesture_feature_names();
GestureFeatures extract_features(const GestureSegment& seg);

// ---------------------------------------------------------------------------
// Random forest

struct ForestParams {
  int n_trees{100};
  int max_depth{0};     // 0: unlimited
  int max_features{0};  // 0: floor(sqrt(n_features))
  bool bootstrap{true};
  int min_samples_split{2};
  uint64_t seed{1};
};

struct TreeNode {
  int feature{-1};  // -1 marks a leaf
  double threshold{0.0};
  int left{-1};
  int right{-1};
  std::vector<int> counts;  // per class slot, leaves only
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  // Majority class slot of the leaf; ties go to the lowest slot.
  int predict_slot(std::span<const double> x) const;
};

struct ForestModel {
  std::vector<int> classes;  // gesture label indices, ascending; slot i -> classes[i]
  size_t n_features{0};
  ForestParams params;
  NormStats norm;
  std::vector<DecisionTree> trees;

  bool fitted() const { return !trees.empty(); }
};

// Inputs are already normalised; `norm` is stored for use by classify().
ForestModel fit_forest(std::span<const std::vector<double>> x, std::span<const int> y,
                       const ForestParams& params, NormStats norm = {});

// zscore_fit on the raw features, then fit_forest on the normalised rows.
ForestModel train_gesture_model(std::span<const std::vector<double>> raw, std::span<const int> y,
                                const ForestParams& params);

struct ForestPrediction {
  int label{-1};  // class label (gesture index)
  double confidence{0.0};
  std::vector<double> votes;  // vote fraction per slot
};

// Majority vote on already-normalised features; ties to the lowest label.
ForestPrediction predict_normalized(const ForestModel& m, std::span<const double> x);
// Normalises raw features with the model's own statistics first.
ForestPrediction classify(const ForestModel& m, std::span<const double> raw);

// ---------------------------------------------------------------------------
// Brow-raise preamble

struct PreambleSpec {
  double threshold_mv{243.0};
  double refractory_s{1.0};
};

struct PreambleState {
  bool active{false};
  double last_toggle_time{-std::numeric_limits<double>::infinity()};
  double refractory{1.0};
};

struct PreambleUpdate {
  PreambleState state;
  bool toggled{false};
  std::optional<double> brow_time;  // absolute time of a detected brow raise
};

// A brow raise is a window whose largest deviation from its median exceeds
// the threshold. Its time is the time of that sample, so the same physical
// raise seen through overlapping windows toggles at most once.
PreambleUpdate update_preamble(const PreambleState& state, const Window& conditioned,
                               double threshold_mv);

} // namespace eogv
