#include "eogv/cli.hpp"

#include "eogv/config.hpp"
#include "eogv/corpus.hpp"
#include "eogv/eval.hpp"
#include "eogv/geometry.hpp"
#include "eogv/io.hpp"
#include "eogv/pipeline.hpp"
#include "eogv/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace eogv {

namespace {

constexpr int kOk = 0;
constexpr int kBelowThreshold = 1;
constexpr int kError = 2;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

uint64_t derive_seed(uint64_t a, uint64_t b) {
  uint64_t x = a * 0x9e3779b97f4a7c15ULL + b + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct LabelledRecording {
  Recording recording;
  std::vector<EventSpan> events;
};

std::vector<LabelledRecording> load_labelled(const std::vector<std::string>& recs, const std::vector<std::string>& evs) {
  if (recs.empty()) throw std::invalid_argument("no recordings given");
  if (evs.size() != recs.size()) {
    throw std::invalid_argument("need one events file per recording (" + std::to_string(recs.size()) +
                                " recordings, " + std::to_string(evs.size()) + " event files)");
  }
  std::vector<LabelledRecording> out;
  for (size_t i = 0; i < recs.size(); ++i) {
    LabelledRecording r;
    try {
      r.recording = parse_recording(read_file(recs[i])).recording;
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(recs[i] + ": " + e.what());
    }
    try {
      r.events = parse_events(read_file(evs[i]));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(evs[i] + ": " + e.what());
    }
    if (r.events.empty()) throw std::invalid_argument(evs[i] + ": no labelled events");
    out.push_back(std::move(r));
  }
  return out;
}

void check_rate(const Recording& rec, const RunConfig& cfg) {
  if (rec.sample_rate != cfg.sample_rate) {
    throw std::invalid_argument("recording sample rate " + fixed(rec.sample_rate, 3) +
                                " Hz does not match the configured " + fixed(cfg.sample_rate, 3) + " Hz");
  }
}

Dataset gesture_dataset(const std::vector<LabelledRecording>& recs, const RunConfig& cfg, uint64_t seed,
                        int group_offset = 0) {
  Dataset d;
  for (size_t i = 0; i < recs.size(); ++i) {
    check_rate(recs[i].recording, cfg);
    Session s{recs[i].recording, recs[i].events};
    d.append(gesture_samples(s, group_offset + static_cast<int>(i), cfg, derive_seed(seed, i)));
  }
  return d;
}

Dataset synthetic_gesture_dataset(const RunConfig& cfg, uint64_t seed, int sessions, bool four, double gain = 15.0,
                                  int rounds = 10, DriftSpec drift = {}, int group_offset = 0) {
  Dataset d;
  for (int i = 0; i < sessions; ++i) {
    SessionSpec spec = session_spec(cfg, derive_seed(seed, static_cast<uint64_t>(i)), four, rounds);
    spec.amplitude_gain = gain;
    spec.drift = drift;
    const Session s = gen_session(spec, cfg.eye, cfg.depths);
    d.append(gesture_samples(s, group_offset + i, cfg, derive_seed(seed, 1000 + static_cast<uint64_t>(i))));
  }
  return d;
}

void write_reports(const EvalReport& r, const std::string& dir) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  write_file(dir + "/report.txt", report_text(r));
  write_file(dir + "/report.csv", report_csv(r));
  write_file(dir + "/confusion.csv", confusion_csv(r));
}

// ---------------------------------------------------------------------------

struct Common {
  std::string config_path;
  uint64_t seed{0};
  bool seed_set{false};
};

RunConfig load(const Common& c) {
  RunConfig cfg = resolve_config(c.config_path);
  if (c.seed_set) cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

struct SynthArgs {
  std::string out_recording{"recording.csv"};
  std::string out_events{"events.csv"};
  int rounds{10};
  double cue{3.0};
  double noise{2.0};
  double gain{15.0};
  double wander{0.0};
  double drift_gain{0.0};
  double drift_offset{0.0};
  bool four{false};
  std::vector<std::string> artifacts;
  int cues{6};
  bool with_vergence{false};
};

int cmd_synth(const SynthArgs& a, const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  Session s;
  if (!a.artifacts.empty()) {
    ArtifactSessionSpec spec;
    spec.kinds.clear();
    for (const auto& k : a.artifacts) spec.kinds.push_back(parse_artifact(k));
    spec.cues = a.cues;
    spec.cue_interval = a.cue;
    spec.with_vergence = a.with_vergence;
    spec.noise_floor_std = a.noise;
    spec.seed = cfg.seed;
    spec.sample_rate = cfg.sample_rate;
    spec.amplitude_gain = a.gain;
    s = gen_artifact_session(spec, cfg.eye);
  } else {
    SessionSpec spec = session_spec(cfg, cfg.seed, a.four, a.rounds);
    spec.cue_interval = a.cue;
    spec.noise_floor_std = a.noise;
    spec.amplitude_gain = a.gain;
    spec.wander_amplitude = a.wander;
    spec.drift = {a.drift_gain, a.drift_offset};
    s = gen_session(spec, cfg.eye, cfg.depths);
  }
  const std::string hash = config_hash(cfg);
  write_file(a.out_recording, format_recording(s.recording, hash));
  write_file(a.out_events, format_events(s.events));
  out << "wrote " << a.out_recording << " (" << s.recording.size() << " samples, " << fixed(s.recording.duration(), 1)
      << " s) and " << a.out_events << " (" << s.events.size() << " events)\n";
  return kOk;
}

struct TrainArgs {
  std::string kind;
  std::vector<std::string> recordings;
  std::vector<std::string> events;
  std::string out;
  bool synthetic{false};
  bool four{false};
};

int cmd_train(const TrainArgs& a, const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const std::string hash = config_hash(cfg);
  if (!a.synthetic && a.recordings.empty()) {
    throw std::invalid_argument("no training recordings given (use --recordings/--events or --synthetic)");
  }

  if (a.kind == "gate") {
    Dataset d;
    if (a.synthetic) {
      d = gate_training_set(cfg, cfg.seed);
    } else {
      const auto recs = load_labelled(a.recordings, a.events);
      for (size_t i = 0; i < recs.size(); ++i) {
        check_rate(recs[i].recording, cfg);
        Session verg{recs[i].recording, {}}, noise{recs[i].recording, {}};
        for (const auto& e : recs[i].events) (e.gesture() ? verg : noise).events.push_back(e);
        d.append(gate_windows(verg, true, static_cast<int>(i), cfg, derive_seed(cfg.seed, 2 * i)));
        d.append(gate_windows(noise, false, static_cast<int>(i), cfg, derive_seed(cfg.seed, 2 * i + 1)));
      }
    }
    const ArtifactModel m = train_gate_model(d, cfg);
    const auto f = to_artifact_features(d);
    size_t ok = 0;
    for (size_t i = 0; i < d.size(); ++i) ok += (classify_window(m, f[i]).cls == WindowClass::Vergence) == (d.y[i] == 1);
    write_file(a.out, format_gate_model(m, hash));
    out << "gate model: " << d.size() << " windows, training accuracy "
        << fixed(static_cast<double>(ok) / static_cast<double>(d.size()), 4) << ", " << m.iterations
        << " iterations, gradient norm " << m.gradient_norm << "\n";
  } else {
    Dataset d;
    if (a.synthetic) {
      d = synthetic_gesture_dataset(cfg, cfg.seed, 16, a.four);
    } else {
      d = gesture_dataset(load_labelled(a.recordings, a.events), cfg, cfg.seed);
    }
    if (d.size() == 0) throw std::invalid_argument("no gesture segments found in the labelled inputs");
    const ForestModel m = train_gesture_model(d.x, d.y, cfg.forest);
    size_t ok = 0;
    for (size_t i = 0; i < d.size(); ++i) ok += classify(m, d.x[i]).label == d.y[i];
    write_file(a.out, format_forest_model(m, hash));
    out << "gesture model: " << d.size() << " segments, " << m.classes.size() << " classes, " << m.trees.size()
        << " trees, training accuracy " << fixed(static_cast<double>(ok) / static_cast<double>(d.size()), 4) << "\n";
  }
  out << "config hash " << hash << " -> " << a.out << "\n";
  return kOk;
}

struct RunArgs {
  std::string recording;
  std::string gate_model;
  std::string gesture_model;
  std::string out;
  std::string truth;
  bool live{false};
  bool preamble{false};
  bool start_active{false};
  bool force{false};
  double speed{1.0};
};

int cmd_run(const RunArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(c);
  const std::string hash = config_hash(cfg);
  const GateModelFile gate = parse_gate_model(read_file(a.gate_model));
  const ForestModelFile forest = parse_forest_model(read_file(a.gesture_model));
  for (const auto& [name, h] : {std::pair{a.gate_model, gate.config_hash}, std::pair{a.gesture_model, forest.config_hash}}) {
    if (h != hash) {
      const std::string msg = name + " was trained under config " + (h.empty() ? "<none>" : h) +
                              " but the current config is " + hash;
      if (!a.force) throw std::invalid_argument(msg + "; retrain or pass --force");
      err << "warning: " << msg << "\n";
    }
  }
  RecordingFile rf;
  try {
    rf = parse_recording(read_file(a.recording));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(a.recording + ": " + e.what());
  }
  const Recording& rec = rf.recording;
  check_rate(rec, cfg);

  std::vector<Detection> events;
  size_t windows = 0, active = 0;
  if (!a.live) {
    const StreamResult r = classify_vergence_stream(rec, cfg, gate.model, forest.model, {a.preamble, a.start_active});
    events = r.events;
    windows = r.windows;
    active = r.active_windows;
    for (const auto& d : events) out << format_detection_line(d) << "\n";
  } else {
    if (!(a.speed > 0.0)) throw std::invalid_argument("--speed must be positive");
    const size_t count = window_count(rec.size(), rec.sample_rate, cfg.window);
    if (count > 0) {
      StreamProcessor proc(cfg, gate.model, forest.model, a.preamble, a.start_active);
      proc.set_threshold(baseline_threshold(rec, cfg.gate));
      DetectionMerger merger(cfg.merge_gap_s);
      const auto t0 = std::chrono::steady_clock::now();
      for (size_t k = 0; k < count; ++k) {
        // Window k is complete once its last sample has arrived.
        const double ready_s = (cfg.window.length_s + static_cast<double>(k) * cfg.window.step_s) / a.speed;
        std::this_thread::sleep_until(t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                               std::chrono::duration<double>(ready_s)));
        const Window w = window_at(rec, k, cfg.window);
        WindowTrace tr;
        for (const auto& d : proc.process(w, &tr)) merger.push(d);
        ++windows;
        active += tr.active;
        // Later windows start later, so nothing before this horizon can grow.
        const double horizon = w.start_time + cfg.window.step_s + cfg.segment_half_s;
        for (const auto& d : merger.release(horizon)) {
          out << format_detection_line(d) << "\n" << std::flush;
          events.push_back(d);
        }
      }
      for (const auto& d : merger.flush()) {
        out << format_detection_line(d) << "\n" << std::flush;
        events.push_back(d);
      }
    }
  }
  if (!a.out.empty()) write_file(a.out, format_detections(events, hash));
  err << events.size() << " events from " << windows << " windows (" << active << " active)\n";

  if (!a.truth.empty()) {
    const auto truth = parse_events(read_file(a.truth));
    const MatchReport m = match_detections(events, truth);
    const double frac = m.truths ? static_cast<double>(m.correct) / static_cast<double>(m.truths) : 0.0;
    err << "matched " << m.pairs.size() << "/" << m.truths << ", correct " << m.correct << " (" << fixed(frac, 4)
        << "), false positives " << m.false_positives.size() << ", direction confusions " << m.direction_confusions
        << ", max timing error " << fixed(m.max_timing_error_s * 1000.0, 1) << " ms\n";
  }
  return kOk;
}

struct EvalArgs {
  std::string protocol;
  std::vector<std::string> recordings;
  std::vector<std::string> events;
  std::vector<int> users;
  std::string gate_model;
  std::string gesture_model;
  std::string out_dir;
  bool synthetic{false};
  bool four{false};
  bool preamble{false};
  bool no_session_norm{false};
  int k{5};
};

TrainedModels models_for(const EvalArgs& a, const RunConfig& cfg) {
  if (a.gate_model.empty() != a.gesture_model.empty()) {
    throw std::invalid_argument("give both --gate-model and --gesture-model, or neither");
  }
  if (a.gate_model.empty()) return train_default_models(cfg, cfg.seed);
  return {parse_gate_model(read_file(a.gate_model)).model, parse_forest_model(read_file(a.gesture_model)).model};
}

int cmd_eval(const EvalArgs& a, const Common& c, std::ostream& out) {
  const RunConfig cfg = load(c);
  const std::string hash = config_hash(cfg);
  const Trainer trainer = forest_trainer(cfg.forest);
  const bool norm = !a.no_session_norm;

  auto finish = [&](EvalReport r) {
    r.config_hash = hash;
    out << report_text(r);
    write_reports(r, a.out_dir);
    const bool pass = r.mean >= cfg.min_accuracy;
    out << "threshold: " << fixed(cfg.min_accuracy, 4) << " " << (pass ? "met" : "NOT met") << "\n";
    return pass ? kOk : kBelowThreshold;
  };

  if (a.protocol == "kfold") {
    const Dataset d = a.synthetic ? synthetic_gesture_dataset(cfg, cfg.seed, 10, a.four)
                                  : gesture_dataset(load_labelled(a.recordings, a.events), cfg, cfg.seed);
    return finish(kfold_cv(d, a.k, cfg.seed, trainer));
  }
  if (a.protocol == "cross-session") {
    Dataset da, db;
    if (a.synthetic) {
      da = synthetic_gesture_dataset(cfg, derive_seed(cfg.seed, 1), 1, a.four, 15.0, 25);
      db = synthetic_gesture_dataset(cfg, derive_seed(cfg.seed, 2), 1, a.four, 15.0, 25, {0.1, 0.0}, 1);
    } else {
      const auto recs = load_labelled(a.recordings, a.events);
      if (recs.size() != 2) throw std::invalid_argument("cross-session needs exactly two recordings");
      da = gesture_dataset({recs[0]}, cfg, cfg.seed, 0);
      db = gesture_dataset({recs[1]}, cfg, cfg.seed, 1);
    }
    return finish(cross_session_eval(da, db, trainer, norm));
  }
  if (a.protocol == "cross-user") {
    std::vector<Dataset> users;
    if (a.synthetic) {
      for (int u = 0; u < 4; ++u) {
        users.push_back(synthetic_gesture_dataset(cfg, derive_seed(cfg.seed, 10 + static_cast<uint64_t>(u)), 1, a.four,
                                                  u == 3 ? 30.0 : 15.0, 10, {}, u));
      }
    } else {
      const auto recs = load_labelled(a.recordings, a.events);
      if (a.users.size() != recs.size()) throw std::invalid_argument("--users needs one user id per recording");
      std::map<int, std::vector<LabelledRecording>> by_user;
      for (size_t i = 0; i < recs.size(); ++i) by_user[a.users[i]].push_back(recs[i]);
      int offset = 0;
      for (const auto& [u, rs] : by_user) {
        users.push_back(gesture_dataset(rs, cfg, derive_seed(cfg.seed, static_cast<uint64_t>(u)), offset));
        offset += static_cast<int>(rs.size());
      }
    }
    return finish(leave_one_user_out(users, trainer, norm));
  }
  if (a.protocol == "fpr") {
    std::vector<Recording> recs;
    if (a.synthetic) {
      ArtifactSessionSpec spec;
      spec.kinds = {ArtifactKind::Chewing, ArtifactKind::Talking, ArtifactKind::Walking};
      spec.cues = 30;
      spec.seed = cfg.seed;
      spec.sample_rate = cfg.sample_rate;
      recs.push_back(gen_artifact_session(spec, cfg.eye).recording);
    } else {
      if (a.recordings.empty()) throw std::invalid_argument("no recordings given (use --recordings or --synthetic)");
      for (const auto& p : a.recordings) recs.push_back(parse_recording(read_file(p)).recording);
    }
    const TrainedModels m = models_for(a, cfg);
    size_t events = 0, active = 0;
    double minutes = 0.0;
    for (const auto& r : recs) {
      check_rate(r, cfg);
      const FprReport f = false_positive_rate(r, cfg, m.gate, m.forest, a.preamble);
      events += f.events;
      active += f.active_windows;
      minutes += f.minutes;
    }
    const double rate = active ? static_cast<double>(events) / static_cast<double>(active) : 0.0;
    out << "protocol: fpr\nconfig_hash: " << hash << "\npreamble: " << (a.preamble ? "on" : "off")
        << "\nevents: " << events << "\nactive_windows: " << active << "\nrate: " << fixed(rate, 6)
        << "\nrate_defined: " << (active ? "yes" : "no") << "\nevents_per_minute: "
        << fixed(minutes > 0.0 ? static_cast<double>(events) / minutes : 0.0, 6) << "\n";
    const bool pass = rate <= cfg.max_false_positive_rate;
    out << "threshold: " << fixed(cfg.max_false_positive_rate, 6) << " " << (pass ? "met" : "NOT met") << "\n";
    return pass ? kOk : kBelowThreshold;
  }
  if (a.protocol == "snr") {
    std::vector<LabelledRecording> recs;
    if (a.synthetic) {
      const Session s = gen_session(session_spec(cfg, cfg.seed, a.four), cfg.eye, cfg.depths);
      recs.push_back({s.recording, s.events});
    } else {
      recs = load_labelled(a.recordings, a.events);
    }
    double sum = 0.0;
    size_t used = 0, excluded = 0;
    for (const auto& r : recs) {
      std::vector<EventSpan> gestures;
      for (const auto& e : r.events) {
        if (e.gesture()) gestures.push_back(e);
      }
      const SnrReport s = snr_db(r.recording, gestures);
      for (double v : s.per_event_db) {
        if (!std::isnan(v)) sum += v;
      }
      used += s.used;
      excluded += s.excluded.size();
    }
    out << "protocol: snr\nconfig_hash: " << hash << "\nevents: " << used << "\nexcluded: " << excluded
        << "\nmean_snr_db: " << (used ? fixed(sum / static_cast<double>(used), 4) : std::string("nan")) << "\n";
    return used ? kOk : kBelowThreshold;
  }
  throw CLI::ValidationError("protocol", "unknown protocol '" + a.protocol + "'");
}

int cmd_bench(size_t windows, const std::string& gate_model, const std::string& gesture_model, const Common& c,
              std::ostream& out) {
  const RunConfig cfg = load(c);
  if (windows == 0) throw std::invalid_argument("--windows must be at least 1");
  EvalArgs ea;
  ea.gate_model = gate_model;
  ea.gesture_model = gesture_model;
  const TrainedModels m = models_for(ea, cfg);
  const LatencyReport r = latency_bench(cfg, m.gate, m.forest, windows, cfg.seed);
  out << "windows: " << r.windows << "\nmean_ms: " << fixed(r.mean_ms, 4) << "\nstd_ms: " << fixed(r.stdev_ms, 4)
      << "\nmax_ms: " << fixed(r.max_ms, 4) << "\nstride_ms: " << fixed(r.stride_ms, 1)
      << "\nrealtime_margin_ms: " << fixed(r.stride_ms - r.mean_ms, 4) << "\n";
  const bool pass = r.mean_ms < r.stride_ms;
  out << "realtime: " << (pass ? "yes" : "NO") << "\n";
  return pass ? kOk : kBelowThreshold;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vergence gesture detection on two-channel EOG"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand.
  app.fallthrough();
  app.set_help_all_flag("--help-all");
  Common common;
  app.add_option("--config", common.config_path, "JSON run config (default: $EOGV_CONFIG, else built-in)");
  app.add_option_function<uint64_t>(
      "--seed", [&](uint64_t s) { common.seed = s, common.seed_set = true; }, "Override the config seed");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic session and its ground truth");
  synth->add_option("-o,--out", sa.out_recording, "Recording CSV");
  synth->add_option("-e,--events", sa.out_events, "Event CSV");
  synth->add_option("--rounds", sa.rounds, "Rounds of the gesture order")->check(CLI::PositiveNumber);
  synth->add_option("--cue", sa.cue, "Cue interval, s");
  synth->add_option("--noise", sa.noise, "Noise floor std, mV")->check(CLI::NonNegativeNumber);
  synth->add_option("--gain", sa.gain, "mV per degree")->check(CLI::PositiveNumber);
  synth->add_option("--wander", sa.wander, "Baseline wander amplitude, mV")->check(CLI::NonNegativeNumber);
  synth->add_option("--drift-gain", sa.drift_gain, "Per-channel gain jitter");
  synth->add_option("--drift-offset", sa.drift_offset, "Per-channel offset jitter, mV");
  synth->add_flag("--four", sa.four, "Use the four-gesture subset");
  synth->add_option("--artifacts", sa.artifacts, "Artifact session with these kinds instead")->delimiter(',');
  synth->add_option("--cues", sa.cues, "Cues in an artifact session")->check(CLI::PositiveNumber);
  synth->add_flag("--with-vergence", sa.with_vergence, "Overlay a gesture on every artifact cue");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the gate or gesture model");
  train->add_option("--kind", ta.kind, "gate or gesture")->required()->check(CLI::IsMember({"gate", "gesture"}));
  train->add_option("--recordings", ta.recordings, "Recording CSVs")->delimiter(',');
  train->add_option("--events", ta.events, "Event CSVs, one per recording")->delimiter(',');
  train->add_option("-o,--out", ta.out, "Model file")->required();
  train->add_flag("--synthetic", ta.synthetic, "Train on the built-in synthetic corpus");
  train->add_flag("--four", ta.four, "Four-gesture subset (with --synthetic)");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Detect gestures in a recording");
  run->add_option("recording", ra.recording, "Recording CSV")->required();
  run->add_option("--gate-model", ra.gate_model, "Gate model file")->required();
  run->add_option("--gesture-model", ra.gesture_model, "Gesture model file")->required();
  run->add_option("-o,--out", ra.out, "Detection file");
  run->add_option("--truth", ra.truth, "Event CSV to score against");
  auto* live = run->add_flag("--live", ra.live, "Pace windows at the stride and stream events as they settle");
  run->add_flag("--offline", "Process the whole recording at once (default)")->excludes(live);
  run->add_flag("--preamble", ra.preamble, "Emit events only between brow-raise toggles");
  run->add_flag("--start-active", ra.start_active, "Start with the preamble toggled on");
  run->add_flag("--force", ra.force, "Run even if the models were trained under another config");
  run->add_option("--speed", ra.speed, "Live pacing speed-up factor");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Run an evaluation protocol");
  eval->add_option("protocol", ea.protocol, "kfold, cross-session, cross-user, fpr or snr")
      ->required()
      ->check(CLI::IsMember({"kfold", "cross-session", "cross-user", "fpr", "snr"}));
  eval->add_option("--recordings", ea.recordings, "Recording CSVs")->delimiter(',');
  eval->add_option("--events", ea.events, "Event CSVs")->delimiter(',');
  eval->add_option("--users", ea.users, "User id per recording (cross-user)")->delimiter(',');
  eval->add_option("--gate-model", ea.gate_model, "Gate model (fpr)");
  eval->add_option("--gesture-model", ea.gesture_model, "Gesture model (fpr)");
  eval->add_option("--out-dir", ea.out_dir, "Write report.txt, report.csv and confusion.csv here");
  eval->add_option("-k", ea.k, "Folds")->check(CLI::Range(2, 100));
  eval->add_flag("--synthetic", ea.synthetic, "Use a generated corpus");
  eval->add_flag("--four", ea.four, "Four-gesture subset (with --synthetic)");
  eval->add_flag("--preamble", ea.preamble, "Enable the preamble (fpr)");
  eval->add_flag("--no-session-norm", ea.no_session_norm, "Skip per-session standardisation");

  size_t bench_windows = 2500;
  std::string bench_gate, bench_gesture;
  auto* bench = app.add_subcommand("bench", "Per-window latency benchmark");
  bench->add_option("--windows", bench_windows, "Windows to time");
  bench->add_option("--gate-model", bench_gate, "Gate model");
  bench->add_option("--gesture-model", bench_gesture, "Gesture model");

  std::string geo_kind;
  double ipd = 50.0, dist = 0.0, L = 0.0, d = 0.0, e = 0.0, dp = 0.0;
  std::string from, to;
  auto* geo = app.add_subcommand("geometry", "Vergence and display geometry");
  geo->require_subcommand(1);
  auto* g_angle = geo->add_subcommand("angle", "Vergence angle (deg) at a fixation distance");
  g_angle->add_option("--ipd", ipd, "Interpupillary distance, mm");
  g_angle->add_option("--dist", dist, "Fixation distance, cm")->required();
  auto* g_delta = geo->add_subcommand("delta", "Signed vergence change (deg) of a gesture");
  g_delta->add_option("--ipd", ipd, "Interpupillary distance, mm");
  g_delta->add_option("--from", from, "30, 70, 200 or near/mid/far")->required();
  g_delta->add_option("--to", to, "30, 70, 200 or near/mid/far")->required();
  auto* g_stereo = geo->add_subcommand("stereo", "Image separation (cm) for a virtual depth");
  g_stereo->add_option("--L", L, "Screen distance, cm")->required();
  g_stereo->add_option("--d", d, "Interpupillary distance, cm")->required();
  g_stereo->add_option("--e", e, "Virtual depth, cm")->required();
  auto* g_focal = geo->add_subcommand("focal", "Effective focal length (cm) of an object/image pair");
  g_focal->add_option("--d", d, "Object distance, cm")->required();
  g_focal->add_option("--dp", dp, "Image distance, cm")->required();

  auto* cfgcmd = app.add_subcommand("config", "Print the resolved config and its hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*synth) return cmd_synth(sa, common, out);
    if (*train) return cmd_train(ta, common, out);
    if (*run) return cmd_run(ra, common, out, err);
    if (*eval) return cmd_eval(ea, common, out);
    if (*bench) return cmd_bench(bench_windows, bench_gate, bench_gesture, common, out);
    if (*cfgcmd) {
      const RunConfig cfg = load(common);
      out << config_to_json(cfg) << "hash: " << config_hash(cfg) << "\n";
      return kOk;
    }
    if (*geo) {
      const RunConfig cfg = load(common);
      try {
        if (*g_angle) out << fixed(vergence_angle({ipd}, dist), 3) << "\n";
        if (*g_delta) {
          const GestureLabel g(GestureLabel::parse(from + "->" + to));
          out << fixed(angle_delta({ipd}, g, cfg.depths), 3) << "\n";
        }
        if (*g_stereo) out << fixed(stereo_disparity(L, d, e), 3) << "\n";
        if (*g_focal) out << fixed(effective_focal_length(d, dp), 3) << "\n";
      } catch (const std::domain_error& ex) {
        err << "error: " << ex.what() << "\n";
        for (auto* sub : geo->get_subcommands()) err << sub->help();
        return kError;
      }
      return kOk;
    }
  } catch (const CLI::Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kError;
  }
  return kOk;
}

} // namespace eogv
