#pragma once

#include "eogv/recording.hpp"
#include "eogv/zscore.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eogv {

struct WindowSpec {
  double length_s{2.0};
  double step_s{0.1};

  size_t length_samples(double sample_rate) const;
  size_t step_samples(double sample_rate) const;
  void validate(double sample_rate) const;
};

// A fixed-length two-channel slice of a stream.
struct Window {
  double sample_rate{500.0};
  size_t start_index{0};   // sample offset into the source recording
  double start_time{0.0};  // s
  std::array<std::vector<double>, 2> samples;

  size_t size() const { return samples[kLeft].size(); }
};

// Number of full windows in n samples: floor((n - N) / S) + 1, or 0.
size_t window_count(size_t n, double sample_rate, const WindowSpec& spec = {});
Window window_at(const Recording& rec, size_t k, const WindowSpec& spec = {});
std::vector<Window> sliding_windows(const Recording& rec, const WindowSpec& spec = {});

struct GateSpec {
  double baseline_s{2.0};
  double mad_multiplier{4.5};
  double mad_floor_mv{1.0};  // substituted when the baseline MAD is exactly zero
};

struct GateThreshold {
  std::array<double, 2> threshold{1.0, 1.0};        // mV
  std::array<double, 2> baseline_median{0.0, 0.0};  // mV
};

double median(std::vector<double> v);
double median_absolute_deviation(std::span<const double> x);

// MAD of the first baseline_s seconds of each channel times the multiplier.
GateThreshold baseline_threshold(const Recording& rec, const GateSpec& spec = {});

// True iff some sample on some channel deviates from the baseline median by
// more than that channel's threshold.
bool is_active(const Window& w, const GateThreshold& t);

// 11 features per channel, left channel first:
// mean, max, min, band_power, wavelet_energy, variance, rms, peak_to_rms,
// trapezoidal_integral, max_derivative, min_derivative
inline constexpr size_t kArtifactFeaturesPerChannel = 11;
inline constexpr size_t kArtifactFeatureCount = 2 * kArtifactFeaturesPerChannel;

struct ArtifactFeatureSpec {
  double band_lo_hz{0.5};
  double band_hi_hz{10.0};
  int wavelet_levels{4};
};

using ArtifactFeatures = std::array<double, kArtifactFeatureCount>;

const std::array<std::string, kArtifactFeatureCount>& artifact_feature_names();

// Periodogram power between lo and hi (inclusive bins), mV^2.
double band_power(std::span<const double> x, double sample_rate, double lo_hz, double hi_hz);
// Sum of squared detail coefficients of an orthonormal Haar transform.
double haar_detail_energy(std::span<const double> x, int levels);

ArtifactFeatures artifact_features(const Window& w, const ArtifactFeatureSpec& spec = {});

enum class WindowClass { Vergence, Noise };

struct LogisticOptions {
  double l2{1e-4};
  int max_iter{10000};
  double tol{1e-6};
  // Weight classes inversely to their frequency.
  bool balanced{true};
};

struct ArtifactModel {
  NormStats norm;
  std::vector<double> weights;  // one per feature, on normalised features
  double bias{0.0};
  int iterations{0};
  double gradient_norm{0.0};

  bool fitted() const { return !weights.empty(); }
};

ArtifactModel fit_artifact_model(std::span<const ArtifactFeatures> features,
                                 std::span<const WindowClass> labels, const LogisticOptions& opt = {});

struct WindowDecision {
  WindowClass cls{WindowClass::Noise};
  double p_vergence{0.0};
};

// p > 0.5 is vergence; an exact tie goes to noise.
WindowDecision classify_window(const ArtifactModel& m, const ArtifactFeatures& f);

} // namespace eogv
