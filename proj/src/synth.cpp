#include "eogv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eogv {

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Half-sine bump of the given width starting at t0.
double bump(double t, double t0, double width) {
  if (t < t0 || t > t0 + width) return 0.0;
  return std::sin(kPi * (t - t0) / width);
}

double hann(double t, double length) {
  if (t < 0.0 || t > length) return 0.0;
  return 0.5 - 0.5 * std::cos(2.0 * kPi * t / length);
}

size_t samples_for(double seconds, double fs) {
  return static_cast<size_t>(std::llround(seconds * fs));
}

double sample_duration(Rng& rng, double mean, double stdev) {
  const double d = stdev > 0.0 ? std::normal_distribution<double>(mean, stdev)(rng) : mean;
  return std::clamp(d, kMinGestureDuration, kMaxGestureDuration);
}

// Renders f(t) for t = i / fs, i in [0, n), into two channels scaled by gains.
template <class F>
ArtifactWaveform render(double fs, size_t n, std::array<double, 2> gains, F&& f) {
  ArtifactWaveform w;
  w.sample_rate = fs;
  for (auto& ch : w.channels) ch.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double v = f(static_cast<double>(i) / fs);
    w.channels[kLeft][i] = gains[0] * v;
    w.channels[kRight][i] = gains[1] * v;
  }
  return w;
}

void add_emg(ArtifactWaveform& w, Rng& rng, double stdev, const std::vector<double>& envelope) {
  std::normal_distribution<double> noise(0.0, stdev);
  for (auto& ch : w.channels) {
    for (size_t i = 0; i < ch.size(); ++i) ch[i] += envelope[i] * noise(rng);
  }
}

void taper_edges(ArtifactWaveform& w, double seconds) {
  const size_t n = w.channels[kLeft].size();
  const size_t m = std::min(n / 2, samples_for(seconds, w.sample_rate));
  for (size_t i = 0; i < m; ++i) {
    const double g = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / static_cast<double>(m));
    for (auto& ch : w.channels) {
      ch[i] *= g;
      ch[n - 1 - i] *= g;
    }
  }
}

// Adds `src` into `dst` so that src[anchor] lands on dst[at]; out-of-range
// samples are dropped.
void add_at(std::vector<double>& dst, const std::vector<double>& src, std::ptrdiff_t at,
            std::ptrdiff_t anchor) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dst.size());
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(src.size()); ++j) {
    const std::ptrdiff_t k = at - anchor + j;
    if (k >= 0 && k < n) dst[static_cast<size_t>(k)] += src[static_cast<size_t>(j)];
  }
}

void add_noise(Recording& rec, double stdev, double wander_amp, double wander_hz, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& ch : rec.channels) {
    const double phase = uniform(rng, 0.0, 2.0 * kPi);
    for (size_t i = 0; i < ch.size(); ++i) {
      if (stdev > 0.0) ch[i] += stdev * noise(rng);
      if (wander_amp > 0.0) {
        ch[i] += wander_amp * std::sin(2.0 * kPi * wander_hz * static_cast<double>(i) / rec.sample_rate + phase);
      }
    }
  }
}

GestureTemplate template_for(const GestureLabel& g, double gain, double mean, double stdev,
                             std::array<double, 2> polarity) {
  GestureTemplate tpl;
  tpl.label = g;
  tpl.amplitude_gain = gain;
  tpl.duration_mean = mean;
  tpl.duration_std = stdev;
  tpl.channel_polarity = polarity;
  return tpl;
}

} // namespace

double gesture_pulse(double t, double duration) {
  if (std::abs(t) > kPulseSupport * duration) return 0.0;
  const double s = 1.0 / std::cosh(t / (0.5 * duration));
  const double sigma = 0.8 * duration;
  return s * s * std::exp(-t * t / (2.0 * sigma * sigma));
}

GestureWaveform gen_gesture(const GestureTemplate& tpl, const EyeConfig& cfg, uint64_t seed,
                            double sample_rate, const DepthSet& depths) {
  if (!(tpl.amplitude_gain > 0.0)) throw std::invalid_argument("amplitude gain must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  Rng rng(seed);
  GestureWaveform w;
  w.sample_rate = sample_rate;
  w.duration = sample_duration(rng, tpl.duration_mean, tpl.duration_std);

  const double delta = angle_delta(cfg, tpl.label, depths);
  const double amplitude = tpl.amplitude_gain * delta;  // signed: convergence positive
  const size_t half = samples_for(kPulseSupport * w.duration, sample_rate);
  const size_t n = 2 * half + 1;
  w.peak_index = half;
  for (size_t c = 0; c < 2; ++c) {
    auto& ch = w.channels[c];
    ch.resize(n);
    const double a = amplitude * tpl.channel_polarity[c];
    for (size_t i = 0; i < n; ++i) {
      const double t = (static_cast<double>(i) - static_cast<double>(half)) / sample_rate;
      ch[i] = a * gesture_pulse(t, w.duration);
    }
    w.peak_mv[c] = ch[half];
  }
  return w;
}

ArtifactProfile artifact_profile(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Blink: return {1.5, 0.3, false};
    case ArtifactKind::Saccade: return {1.0, 2.0, true};
    case ArtifactKind::BrowRaise: return {6.5, 0.8, false};
    case ArtifactKind::Chewing: return {3.2, 2.0, true};
    case ArtifactKind::Talking: return {3.0, 2.0, true};
    case ArtifactKind::Walking: return {1.0, 2.0, true};
    case ArtifactKind::Nodding: return {1.5, 0.8, false};
    case ArtifactKind::HeadTilt: return {2.0, 1.2, false};
    case ArtifactKind::StandSit: return {2.5, 1.5, false};
    case ArtifactKind::Turning: return {1.0, 2.0, true};
  }
  throw std::invalid_argument("unknown artifact kind");
}

std::string_view artifact_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Blink: return "blink";
    case ArtifactKind::Saccade: return "saccade";
    case ArtifactKind::BrowRaise: return "brow_raise";
    case ArtifactKind::Chewing: return "chewing";
    case ArtifactKind::Talking: return "talking";
    case ArtifactKind::Walking: return "walking";
    case ArtifactKind::Nodding: return "nodding";
    case ArtifactKind::HeadTilt: return "head_tilt";
    case ArtifactKind::StandSit: return "stand_sit";
    case ArtifactKind::Turning: return "turning";
  }
  return "unknown";
}

ArtifactKind parse_artifact(std::string_view name) {
  for (ArtifactKind k : kAllArtifactKinds) {
    if (artifact_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown artifact kind '" + std::string(name) + "'");
}

ArtifactWaveform gen_artifact(ArtifactKind kind, uint64_t seed, double fs, double duration) {
  if (!(fs > 0.0)) throw std::invalid_argument("sample rate must be positive");
  Rng rng(seed);
  const ArtifactProfile prof = artifact_profile(kind);
  const double amp = prof.amplitude_scale * kReferenceVergencePeakMv;
  const double length = (prof.continuous && duration > 0.0) ? duration : prof.duration;
  const size_t n = samples_for(length, fs) + 1;
  const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;

  switch (kind) {
    case ArtifactKind::Blink: {
      // Sharp biphasic deflection, same sign on both channels.
      const double sigma = 0.035;
      const double a = amp * uniform(rng, 0.9, 1.0);
      const double mid = length / 2.0;
      return render(fs, n, {1.0, 0.9}, [&](double t) {
        const double u = (t - mid) / sigma;
        return -a * u * std::exp(0.5 - 0.5 * u * u);
      });
    }
    case ArtifactKind::Saccade: {
      // Conjugate gaze jumps between fixations: opposite sign on the channels.
      struct Step { double t; double delta; };
      std::vector<Step> steps;
      double level = 0.0;
      for (double t = uniform(rng, 0.05, 0.3); t < length; t += uniform(rng, 0.25, 0.6)) {
        double next = level;
        while (next == level) next = std::floor(uniform(rng, 0.0, 3.0)) - 1.0;
        steps.push_back({t, next - level});
        level = next;
      }
      const double a = amp * uniform(rng, 0.8, 1.0);
      auto w = render(fs, n, {1.0, -1.0}, [&](double t) {
        double v = 0.0;
        for (const Step& s : steps) v += s.delta * sigmoid((t - s.t) / 0.006);
        return a * v;
      });
      taper_edges(w, 0.05);
      return w;
    }
    case ArtifactKind::BrowRaise: {
      const double a = amp * uniform(rng, 0.95, 1.05);
      auto env = [&](double t) {
        const double rise = 0.12, hold = 0.35, fall = 0.2, t0 = 0.06;
        if (t < t0) return 0.0;
        if (t < t0 + rise) return 0.5 - 0.5 * std::cos(kPi * (t - t0) / rise);
        if (t < t0 + rise + hold) return 1.0;
        if (t < t0 + rise + hold + fall) return 0.5 + 0.5 * std::cos(kPi * (t - t0 - rise - hold) / fall);
        return 0.0;
      };
      auto w = render(fs, n, {1.0, 0.95}, [&](double t) { return a * env(t); });
      std::vector<double> e(n);
      for (size_t i = 0; i < n; ++i) e[i] = env(static_cast<double>(i) / fs);
      add_emg(w, rng, 15.0, e);
      return w;
    }
    case ArtifactKind::Chewing: {
      struct Burst { double t0; double a; };
      std::vector<Burst> bursts;
      for (double t = uniform(rng, 0.0, 0.3); t < length; t += uniform(rng, 0.55, 0.75)) {
        bursts.push_back({t, amp * uniform(rng, 0.8, 1.0)});
      }
      const double right_gain = uniform(rng, 0.7, 0.9);
      auto shape = [&](double t) {
        double v = 0.0;
        for (const Burst& b : bursts) v += b.a * bump(t, b.t0, 0.2);
        return v;
      };
      auto w = render(fs, n, {1.0, right_gain}, shape);
      std::vector<double> e(n);
      for (size_t i = 0; i < n; ++i) e[i] = shape(static_cast<double>(i) / fs) / amp;
      add_emg(w, rng, 10.0, e);
      taper_edges(w, 0.05);
      return w;
    }
    case ArtifactKind::Talking: {
      struct Syllable { double t0; double width; double a; };
      std::vector<Syllable> syl;
      for (double t = uniform(rng, 0.0, 0.2); t < length; t += uniform(rng, 0.2, 0.35)) {
        syl.push_back({t, uniform(rng, 0.1, 0.18), amp * uniform(rng, 0.4, 1.0)});
      }
      auto shape = [&](double t) {
        double v = 0.0;
        for (const Syllable& s : syl) v += s.a * bump(t, s.t0, s.width);
        return v;
      };
      auto w = render(fs, n, {1.0, 0.85}, shape);
      std::vector<double> e(n);
      for (size_t i = 0; i < n; ++i) e[i] = shape(static_cast<double>(i) / fs) / amp;
      add_emg(w, rng, 8.0, e);
      taper_edges(w, 0.05);
      return w;
    }
    case ArtifactKind::Walking: {
      std::vector<std::pair<double, double>> strikes;
      for (double t = uniform(rng, 0.0, 0.3); t < length; t += uniform(rng, 0.5, 0.6)) {
        strikes.emplace_back(t, amp * uniform(rng, 0.7, 1.0));
      }
      const double phase = uniform(rng, 0.0, 2.0 * kPi);
      auto w = render(fs, n, {1.0, 0.9}, [&](double t) {
        double v = 0.3 * amp * std::sin(2.0 * kPi * 0.9 * t + phase);
        for (const auto& [t0, a] : strikes) v += a * bump(t, t0, 0.12);
        return v;
      });
      taper_edges(w, 0.05);
      return w;
    }
    case ArtifactKind::Nodding: {
      const double a = sign * amp * uniform(rng, 0.85, 1.0);
      return render(fs, n, {1.0, 0.9}, [&](double t) {
        return a * std::sin(2.0 * kPi * 2.5 * t) * hann(t, length);
      });
    }
    case ArtifactKind::HeadTilt: {
      const double a = sign * amp * uniform(rng, 0.85, 1.0);
      const double hold = uniform(rng, 0.55, 0.75);
      return render(fs, n, {1.0, -1.0}, [&](double t) {
        return a * (sigmoid((t - 0.15) / 0.03) - sigmoid((t - 0.15 - hold) / 0.03));
      });
    }
    case ArtifactKind::StandSit: {
      const double a = sign * amp * uniform(rng, 0.85, 1.0);
      return render(fs, n, {1.0, 0.9}, [&](double t) {
        return a * (-std::sin(2.0 * kPi * t / length) * hann(t, length) + 0.5 * bump(t, 0.3, 0.08) +
                    0.5 * bump(t, 1.1, 0.08));
      });
    }
    case ArtifactKind::Turning: {
      // Nystagmus: slow drift with quick resets, conjugate.
      std::vector<double> resets;
      for (double t = uniform(rng, 0.1, 0.5); t < length; t += uniform(rng, 0.4, 0.6)) resets.push_back(t);
      const double a = sign * amp;
      auto w = render(fs, n, {1.0, -1.0}, [&](double t) {
        double prev = 0.0;
        for (double r : resets) {
          if (r > t) break;
          prev = r;
        }
        const double since = t - prev;
        const double next = [&] {
          for (double r : resets) if (r > t) return r;
          return length + 0.5;
        }();
        const double period = std::max(next - prev, 0.1);
        double v = since / period - 0.5;  // sawtooth in [-0.5, 0.5)
        // Quick phase: last 30 ms of each period ramps back linearly.
        if (next - t < 0.03) v = 0.5 - (0.03 - (next - t)) / 0.03;
        return a * v;
      });
      taper_edges(w, 0.05);
      return w;
    }
  }
  throw std::invalid_argument("unknown artifact kind");
}

void DriftSpec::validate() const {
  if (!(gain_jitter >= 0.0 && gain_jitter <= 0.5)) throw std::invalid_argument("gain jitter must lie in [0, 0.5]");
  if (!(offset_jitter >= 0.0)) throw std::invalid_argument("offset jitter must be non-negative");
}

void SessionSpec::validate() const {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (gesture_order.empty()) throw std::invalid_argument("gesture order must not be empty");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(cue_interval >= kMaxGestureDuration)) {
    throw std::invalid_argument("cue interval must be at least the maximum gesture duration (" +
                                std::to_string(kMaxGestureDuration) + " s)");
  }
  if (noise_floor_std < 0.0) throw std::invalid_argument("noise floor must be non-negative");
  if (lead_in < 0.0) throw std::invalid_argument("lead-in must be non-negative");
  if (!(amplitude_gain > 0.0)) throw std::invalid_argument("amplitude gain must be positive");
  drift.validate();
}

void ArtifactSessionSpec::validate() const {
  if (kinds.empty()) throw std::invalid_argument("artifact session needs at least one kind");
  if (cues < 1) throw std::invalid_argument("cues must be >= 1");
  if (!(cue_interval >= 2.0)) throw std::invalid_argument("artifact cue interval must be at least 2 s");
  if (noise_floor_std < 0.0) throw std::invalid_argument("noise floor must be non-negative");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
}

Session gen_session(const SessionSpec& spec, const EyeConfig& cfg, const DepthSet& depths) {
  spec.validate();
  Rng rng(spec.seed);
  const double fs = spec.sample_rate;
  const size_t n_events = static_cast<size_t>(spec.rounds) * spec.gesture_order.size();
  const double length = spec.lead_in + static_cast<double>(n_events) * spec.cue_interval;

  Session s;
  s.recording.sample_rate = fs;
  s.recording.start_time = 0.0;
  for (auto& ch : s.recording.channels) ch.assign(samples_for(length, fs), 0.0);

  const double jitter = std::clamp(spec.cue_interval / 2.0 - 0.95, 0.0, 0.3);
  for (size_t k = 0; k < n_events; ++k) {
    const GestureLabel& label = spec.gesture_order[k % spec.gesture_order.size()];
    const double cue_start = spec.lead_in + static_cast<double>(k) * spec.cue_interval;
    const double offset = jitter > 0.0 ? uniform(rng, -jitter, jitter) : 0.0;
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(
        std::llround((cue_start + spec.cue_interval / 2.0 + offset) * fs));
    const auto tpl = template_for(label, spec.amplitude_gain, spec.duration_mean, spec.duration_std,
                                  spec.channel_polarity);
    const GestureWaveform w = gen_gesture(tpl, cfg, rng(), fs, depths);
    for (size_t c = 0; c < 2; ++c) {
      add_at(s.recording.channels[c], w.channels[c], center, static_cast<std::ptrdiff_t>(w.peak_index));
    }
    const double tc = static_cast<double>(center) / fs;
    s.events.push_back({tc - w.duration / 2.0, tc + w.duration / 2.0, label.name()});
  }

  add_noise(s.recording, spec.noise_floor_std, spec.wander_amplitude, spec.wander_hz, rng);
  s.recording = apply_drift(s.recording, spec.drift, rng());
  return s;
}

Session gen_artifact_session(const ArtifactSessionSpec& spec, const EyeConfig& cfg) {
  spec.validate();
  Rng rng(spec.seed);
  const double fs = spec.sample_rate;
  const double length = spec.lead_in + spec.cues * spec.cue_interval;

  Session s;
  s.recording.sample_rate = fs;
  for (auto& ch : s.recording.channels) ch.assign(samples_for(length, fs), 0.0);

  for (int k = 0; k < spec.cues; ++k) {
    const ArtifactKind kind = spec.kinds[static_cast<size_t>(k) % spec.kinds.size()];
    const ArtifactProfile prof = artifact_profile(kind);
    const double cue_start = spec.lead_in + k * spec.cue_interval;
    std::string tag(artifact_name(kind));
    EventSpan span;

    if (prof.continuous) {
      const ArtifactWaveform w = gen_artifact(kind, rng(), fs, spec.cue_interval);
      const auto at = static_cast<std::ptrdiff_t>(std::llround(cue_start * fs));
      for (size_t c = 0; c < 2; ++c) add_at(s.recording.channels[c], w.channels[c], at, 0);
      const double pad = (spec.cue_interval - 2.0) / 2.0;
      span = {cue_start + pad, cue_start + pad + 2.0, tag};
    } else {
      const double slack = std::max(spec.cue_interval - prof.duration - 0.6, 0.0);
      const double start = cue_start + 0.3 + uniform(rng, 0.0, slack);
      const ArtifactWaveform w = gen_artifact(kind, rng(), fs);
      const auto at = static_cast<std::ptrdiff_t>(std::llround(start * fs));
      for (size_t c = 0; c < 2; ++c) add_at(s.recording.channels[c], w.channels[c], at, 0);
      span = {static_cast<double>(at) / fs, static_cast<double>(at) / fs + prof.duration, tag};
    }

    if (spec.with_vergence) {
      const auto& gestures = all_gestures();
      const GestureLabel g = gestures[static_cast<size_t>(rng() % gestures.size())];
      const auto tpl = template_for(g, spec.amplitude_gain, 0.737, 0.170, {1.0, 1.0});
      const GestureWaveform w = gen_gesture(tpl, cfg, rng(), fs);
      const double center_t = cue_start + spec.cue_interval / 2.0 + uniform(rng, -0.3, 0.3);
      const auto center = static_cast<std::ptrdiff_t>(std::llround(center_t * fs));
      for (size_t c = 0; c < 2; ++c) {
        add_at(s.recording.channels[c], w.channels[c], center, static_cast<std::ptrdiff_t>(w.peak_index));
      }
      const double tc = static_cast<double>(center) / fs;
      span = {tc - w.duration / 2.0, tc + w.duration / 2.0, tag + "+vergence"};
    }
    s.events.push_back(span);
  }

  add_noise(s.recording, spec.noise_floor_std, 0.0, 0.0, rng);
  return s;
}

Recording apply_drift(const Recording& rec, const DriftSpec& d, uint64_t seed) {
  d.validate();
  Rng rng(seed);
  Recording out = rec;
  for (auto& ch : out.channels) {
    const double g = d.gain_jitter * uniform(rng, -1.0, 1.0);
    const double b = d.offset_jitter * uniform(rng, -1.0, 1.0);
    for (double& v : ch) v = (1.0 + g) * v + b;
  }
  return out;
}

} // namespace eogv
