#pragma once

#include "eogv/geometry.hpp"
#include "eogv/recording.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eogv {

// Parametric ground-truth generator. Every function here is a pure function
// of its arguments and seed.

struct GestureTemplate {
  GestureLabel label{Depth::Far, Depth::Near};
  double amplitude_gain{15.0};  // mV per degree of vergence change
  double duration_mean{0.737};  // s
  double duration_std{0.170};   // s
  std::array<double, 2> channel_polarity{1.0, 1.0};
};

inline constexpr double kMinGestureDuration = 0.3;
inline constexpr double kMaxGestureDuration = 1.5;

// Support of a gesture pulse relative to its nominal duration: the pulse is
// rendered over [-1.5 D, 1.5 D] around the peak while the annotated event
// spans [-D/2, D/2].
inline constexpr double kPulseSupport = 1.5;

struct GestureWaveform {
  double sample_rate{500.0};
  std::array<std::vector<double>, 2> channels;
  size_t peak_index{0};
  double duration{0.0};  // nominal, s
  std::array<double, 2> peak_mv{0.0, 0.0};  // signed value at peak_index
};

// Unit-peak pulse shape: sech^2(t / 0.5D) * exp(-t^2 / 2 (0.8D)^2).
double gesture_pulse(double t, double duration);

GestureWaveform gen_gesture(const GestureTemplate& tpl, const EyeConfig& cfg, uint64_t seed,
                            double sample_rate = 500.0, const DepthSet& depths = {});

enum class ArtifactKind {
  Blink,
  Saccade,
  BrowRaise,
  Chewing,
  Talking,
  Walking,
  Nodding,
  HeadTilt,
  StandSit,
  Turning,
};

inline constexpr std::array<ArtifactKind, 10> kAllArtifactKinds{
    ArtifactKind::Blink,   ArtifactKind::Saccade,  ArtifactKind::BrowRaise, ArtifactKind::Chewing,
    ArtifactKind::Talking, ArtifactKind::Walking,  ArtifactKind::Nodding,   ArtifactKind::HeadTilt,
    ArtifactKind::StandSit, ArtifactKind::Turning};

// Peak amplitudes of artifacts are expressed as multiples of this reference
// vergence peak.
inline constexpr double kReferenceVergencePeakMv = 45.0;

struct ArtifactProfile {
  double amplitude_scale{1.0};
  double duration{1.0};  // s; for continuous kinds, the default render length
  bool continuous{false};
};

ArtifactProfile artifact_profile(ArtifactKind kind);
std::string_view artifact_name(ArtifactKind kind);
ArtifactKind parse_artifact(std::string_view name);

struct ArtifactWaveform {
  double sample_rate{500.0};
  std::array<std::vector<double>, 2> channels;
};

// `duration` only applies to continuous kinds; <= 0 uses the profile default.
ArtifactWaveform gen_artifact(ArtifactKind kind, uint64_t seed, double sample_rate = 500.0,
                              double duration = 0.0);

struct DriftSpec {
  double gain_jitter{0.0};    // fraction, sampled uniformly in [-j, j] per channel
  double offset_jitter{0.0};  // mV, sampled uniformly in [-j, j] per channel

  void validate() const;
};

struct SessionSpec {
  int rounds{10};
  double cue_interval{3.0};  // s
  std::vector<GestureLabel> gesture_order{all_gestures().begin(), all_gestures().end()};
  double noise_floor_std{2.0};  // mV
  double wander_amplitude{0.0};  // mV, optional slow baseline wander
  double wander_hz{0.3};
  DriftSpec drift{};
  uint64_t seed{7};
  double sample_rate{500.0};
  double lead_in{3.0};  // quiescent seconds before the first cue
  double amplitude_gain{15.0};
  double duration_mean{0.737};
  double duration_std{0.170};
  std::array<double, 2> channel_polarity{1.0, 1.0};

  void validate() const;
};

// Artifact-only (or artifact-plus-vergence) sessions. Cue i uses
// kinds[i % kinds.size()]; discrete kinds fire once per cue, continuous kinds
// fill the cue interval.
struct ArtifactSessionSpec {
  std::vector<ArtifactKind> kinds{ArtifactKind::Chewing};
  int cues{6};
  double cue_interval{3.0};
  bool with_vergence{false};  // overlay one gesture per cue ("mixed" class)
  double noise_floor_std{2.0};
  uint64_t seed{11};
  double sample_rate{500.0};
  double lead_in{3.0};
  double amplitude_gain{15.0};

  void validate() const;
};

struct Session {
  Recording recording;
  std::vector<EventSpan> events;
};

Session gen_session(const SessionSpec& spec, const EyeConfig& cfg = {}, const DepthSet& depths = {});
Session gen_artifact_session(const ArtifactSessionSpec& spec, const EyeConfig& cfg = {});

// Per-channel affine drift y = (1 + g) x + b, with g and b drawn once per call.
Recording apply_drift(const Recording& rec, const DriftSpec& d, uint64_t seed);

} // namespace eogv
