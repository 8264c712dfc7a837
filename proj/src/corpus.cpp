#include "eogv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace eogv {

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Window of the configured length centred near `center_s`, clamped to the
// recording.
Window window_around(const Recording& rec, double center_s, const RunConfig& cfg) {
  const size_t len = cfg.window.length_samples(rec.sample_rate);
  if (rec.size() < len) throw std::invalid_argument("recording shorter than one window");
  const double start_s = center_s - cfg.window.length_s / 2.0 - rec.start_time;
  const long long raw = std::llround(start_s * rec.sample_rate);
  const size_t start = static_cast<size_t>(std::clamp<long long>(raw, 0, static_cast<long long>(rec.size() - len)));
  Window w;
  w.sample_rate = rec.sample_rate;
  w.start_index = start;
  w.start_time = rec.time_at(start);
  for (size_t c = 0; c < 2; ++c) {
    const auto first = rec.channels[c].begin() + static_cast<std::ptrdiff_t>(start);
    w.samples[c].assign(first, first + static_cast<std::ptrdiff_t>(len));
  }
  return w;
}

Window conditioned(const Window& raw, const Conditioner& cond) {
  Window w = raw;
  for (size_t c = 0; c < 2; ++c) w.samples[c] = cond.apply(raw.samples[c]);
  return w;
}

} // namespace

void Dataset::append(const Dataset& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
  group.insert(group.end(), other.group.begin(), other.group.end());
}

std::vector<GateRecordingSpec> gate_corpus_layout() {
  struct Row {
    const char* name;
    std::vector<ArtifactKind> kinds;
    bool with_vergence;
    int segments;
    int recordings;
  };
  using K = ArtifactKind;
  const std::vector<Row> rows = {
      {"walking", {K::Walking}, false, 30, 5},         {"turning", {K::Turning}, false, 30, 5},
      {"head_tilt", {K::HeadTilt}, false, 30, 5},      {"stand_sit", {K::StandSit}, false, 78, 13},
      {"nodding", {K::Nodding}, false, 28, 5},         {"brow_raise", {K::BrowRaise}, false, 48, 8},
      {"saccade", {K::Saccade}, false, 62, 7},         {"blink", {K::Blink}, false, 42, 7},
      {"chewing", {K::Chewing}, false, 42, 7},         {"talking", {K::Talking}, false, 30, 5},
      {"chewing+vergence", {K::Chewing}, true, 30, 5}, {"talking+vergence", {K::Talking}, true, 30, 5},
  };
  std::vector<GateRecordingSpec> out;
  for (int i = 0; i < 17; ++i) out.push_back({"vergence", true, {}, false, 6});
  for (const auto& r : rows) {
    for (int i = 0; i < r.recordings; ++i) {
      const int n = r.segments / r.recordings + (i < r.segments % r.recordings ? 1 : 0);
      out.push_back({r.name, false, r.kinds, r.with_vergence, n});
    }
  }
  return out;
}

Session gen_gate_recording(const GateRecordingSpec& r, const RunConfig& cfg, uint64_t seed) {
  if (r.vergence) {
    SessionSpec s = session_spec(cfg, seed);
    const auto& all = all_gestures();
    s.gesture_order.assign(all.begin(), all.end());
    s.rounds = 1;
    Session out = gen_session(s, cfg.eye, cfg.depths);
    out.events.resize(std::min<size_t>(out.events.size(), static_cast<size_t>(r.segments)));
    return out;
  }
  ArtifactSessionSpec a;
  a.kinds = r.kinds;
  a.cues = r.segments;
  a.with_vergence = r.with_vergence;
  a.seed = seed;
  a.sample_rate = cfg.sample_rate;
  return gen_artifact_session(a, cfg.eye);
}

Dataset gate_windows(const Session& s, bool vergence, int group, const RunConfig& cfg, uint64_t seed,
                     double jitter_s) {
  const Conditioner cond(s.recording.sample_rate, cfg.filter);
  std::mt19937_64 rng(seed);
  Dataset d;
  for (const auto& ev : s.events) {
    const double c = ev.center() + jitter_s * (2.0 * unit(rng) - 1.0);
    const Window w = conditioned(window_around(s.recording, c, cfg), cond);
    const ArtifactFeatures f = artifact_features(w, cfg.artifact_features);
    d.x.emplace_back(f.begin(), f.end());
    d.y.push_back(vergence ? 1 : 0);
    d.group.push_back(group);
  }
  return d;
}

Dataset gate_corpus(const RunConfig& cfg, uint64_t seed) {
  const auto layout = gate_corpus_layout();
  Dataset d;
  for (size_t i = 0; i < layout.size(); ++i) {
    const uint64_t rs = mix(seed, i);
    const Session s = gen_gate_recording(layout[i], cfg, rs);
    d.append(gate_windows(s, layout[i].vergence, static_cast<int>(i), cfg, mix(rs, 1)));
  }
  return d;
}

Dataset gesture_samples(const Session& s, int group, const RunConfig& cfg, uint64_t seed, double jitter_s) {
  const Conditioner cond(s.recording.sample_rate, cfg.filter);
  const SavgolFilter smoother(cfg.filter.savgol_window, cfg.filter.savgol_order);
  const GateThreshold base = baseline_threshold(s.recording, cfg.gate);
  std::mt19937_64 rng(seed);
  Dataset d;
  for (const auto& ev : s.events) {
    const auto g = ev.gesture();
    if (!g) continue;
    const double c = ev.center() + jitter_s * (2.0 * unit(rng) - 1.0);
    Window w = conditioned(window_around(s.recording, c, cfg), cond);
    for (size_t ch = 0; ch < 2; ++ch) w.samples[ch] = smoother.apply(w.samples[ch]);
    const auto peaks = detect_peaks(w, cfg.peaks, base.baseline_median);
    double best_dt = 0.25;
    std::optional<size_t> best;
    for (size_t p : peaks) {
      const double dt = std::abs(w.start_time + static_cast<double>(p) / w.sample_rate - ev.center());
      if (dt <= best_dt) {
        best_dt = dt;
        best = p;
      }
    }
    if (!best) continue;
    const auto seg = extract_segment(w, *best, cfg.segment_half_s);
    if (!seg) continue;
    const GestureFeatures f = extract_features(*seg);
    d.x.emplace_back(f.begin(), f.end());
    d.y.push_back(g->index());
    d.group.push_back(group);
  }
  return d;
}

std::vector<ArtifactFeatures> to_artifact_features(const Dataset& d) {
  std::vector<ArtifactFeatures> out(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    if (d.x[i].size() != kArtifactFeatureCount) throw std::invalid_argument("row is not an artifact feature vector");
    std::copy(d.x[i].begin(), d.x[i].end(), out[i].begin());
  }
  return out;
}

std::vector<WindowClass> to_window_classes(const Dataset& d) {
  std::vector<WindowClass> out(d.size());
  for (size_t i = 0; i < d.size(); ++i) out[i] = d.y[i] == 1 ? WindowClass::Vergence : WindowClass::Noise;
  return out;
}

ArtifactModel train_gate_model(const Dataset& d, const RunConfig& cfg) {
  const auto f = to_artifact_features(d);
  const auto y = to_window_classes(d);
  return fit_artifact_model(f, y, cfg.logistic);
}

Dataset gate_training_set(const RunConfig& cfg, uint64_t seed, int extra, double duration_std) {
  Dataset d = gate_corpus(cfg, seed);
  const int base = static_cast<int>(gate_corpus_layout().size());
  for (int i = 0; i < extra; ++i) {
    const uint64_t ss = mix(seed, 50 + static_cast<uint64_t>(i));
    SessionSpec spec = session_spec(cfg, ss);
    spec.duration_std = duration_std;
    const Session s = gen_session(spec, cfg.eye, cfg.depths);
    d.append(gate_windows(s, true, base + i, cfg, mix(ss, 1)));
  }
  return d;
}

SessionSpec session_spec(const RunConfig& cfg, uint64_t seed, bool four_class, int rounds) {
  SessionSpec s;
  s.seed = seed;
  s.sample_rate = cfg.sample_rate;
  s.rounds = rounds;
  if (four_class) {
    const auto& four = four_gestures();
    s.gesture_order.assign(four.begin(), four.end());
  }
  return s;
}

TrainedModels train_default_models(const RunConfig& cfg, uint64_t seed, int sessions, bool four_class) {
  TrainedModels m;
  m.gate = train_gate_model(gate_training_set(cfg, mix(seed, 100)), cfg);
  Dataset g;
  for (int i = 0; i < sessions; ++i) {
    const uint64_t ss = mix(seed, 200 + static_cast<uint64_t>(i));
    const Session s = gen_session(session_spec(cfg, ss, four_class), cfg.eye, cfg.depths);
    g.append(gesture_samples(s, i, cfg, mix(ss, 1)));
  }
  m.forest = train_gesture_model(g.x, g.y, cfg.forest);
  return m;
}

} // namespace eogv
