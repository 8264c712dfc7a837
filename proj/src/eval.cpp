#include "eogv/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eogv {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<int> sorted_classes(std::span<const int> y) {
  std::vector<int> c(y.begin(), y.end());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

Dataset subset(const Dataset& d, const std::vector<size_t>& idx) {
  Dataset out;
  for (size_t i : idx) {
    out.x.push_back(d.x[i]);
    out.y.push_back(d.y[i]);
    out.group.push_back(d.group[i]);
  }
  return out;
}

// Predicts every row of `test`, accumulating into the confusion matrix, and
// returns the accuracy.
double score(const Predictor& p, const Dataset& test, const std::vector<int>& classes,
             std::vector<std::vector<long>>& confusion) {
  size_t ok = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    const int pred = p(test.x[i]);
    const auto ti = std::lower_bound(classes.begin(), classes.end(), test.y[i]) - classes.begin();
    const auto pi = std::lower_bound(classes.begin(), classes.end(), pred) - classes.begin();
    if (pi == static_cast<std::ptrdiff_t>(classes.size()) || classes[static_cast<size_t>(pi)] != pred) {
      throw std::logic_error("predicted label " + std::to_string(pred) + " is outside the class set");
    }
    ++confusion[static_cast<size_t>(ti)][static_cast<size_t>(pi)];
    ok += pred == test.y[i];
  }
  return test.size() ? static_cast<double>(ok) / static_cast<double>(test.size()) : 0.0;
}

EvalReport empty_report(std::string protocol, std::vector<int> classes) {
  EvalReport r;
  r.protocol = std::move(protocol);
  r.classes = std::move(classes);
  r.confusion.assign(r.classes.size(), std::vector<long>(r.classes.size(), 0));
  return r;
}

void finish(EvalReport& r) {
  r.mean = mean_of(r.fold_accuracy);
  r.stdev = sample_std(r.fold_accuracy);
}

void check_rows(const Dataset& d, const char* what) {
  if (d.x.size() != d.y.size() || d.y.size() != d.group.size()) {
    throw std::invalid_argument(std::string(what) + ": rows, labels and groups differ in length");
  }
  if (d.size() == 0) throw std::invalid_argument(std::string(what) + ": empty dataset");
}

} // namespace

// ---------------------------------------------------------------------------

SnrReport snr_db(const Recording& rec, std::span<const EventSpan> spans, double flank_s) {
  SnrReport r;
  const long long n = static_cast<long long>(rec.size());
  const long long flank = std::llround(flank_s * rec.sample_rate);
  double sum = 0.0;
  for (size_t e = 0; e < spans.size(); ++e) {
    const long long on = std::llround((spans[e].onset - rec.start_time) * rec.sample_rate);
    const long long off = std::llround((spans[e].offset - rec.start_time) * rec.sample_rate);
    if (flank <= 0 || off <= on || on - flank < 0 || off + flank > n) {
      r.per_event_db.push_back(std::numeric_limits<double>::quiet_NaN());
      r.excluded.push_back(e);
      continue;
    }
    double es = 0.0, ns = 0.0;
    for (const auto& ch : rec.channels) {
      for (long long i = on; i < off; ++i) es += ch[static_cast<size_t>(i)] * ch[static_cast<size_t>(i)];
      for (long long i = on - flank; i < on; ++i) ns += ch[static_cast<size_t>(i)] * ch[static_cast<size_t>(i)];
      for (long long i = off; i < off + flank; ++i) ns += ch[static_cast<size_t>(i)] * ch[static_cast<size_t>(i)];
    }
    const double rms_e = std::sqrt(es / static_cast<double>(2 * (off - on)));
    const double rms_n = std::sqrt(ns / static_cast<double>(4 * flank));
    const double db = 20.0 * std::log10(rms_e / rms_n);
    r.per_event_db.push_back(db);
    sum += db;
    ++r.used;
  }
  r.mean_db = r.used ? sum / static_cast<double>(r.used) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

Trainer forest_trainer(const ForestParams& params) {
  return [params](const Dataset& train) -> Predictor {
    auto model = std::make_shared<ForestModel>(train_gesture_model(train.x, train.y, params));
    return [model](std::span<const double> x) { return classify(*model, x).label; };
  };
}

long EvalReport::total() const {
  long t = 0;
  for (const auto& row : confusion) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

double EvalReport::pooled_accuracy() const {
  long trace = 0;
  for (size_t i = 0; i < confusion.size(); ++i) trace += confusion[i][i];
  const long t = total();
  return t ? static_cast<double>(trace) / static_cast<double>(t) : 0.0;
}

std::vector<double> EvalReport::precision() const {
  std::vector<double> p(classes.size(), 0.0);
  for (size_t j = 0; j < classes.size(); ++j) {
    long col = 0;
    for (size_t i = 0; i < classes.size(); ++i) col += confusion[i][j];
    p[j] = col ? static_cast<double>(confusion[j][j]) / static_cast<double>(col) : 0.0;
  }
  return p;
}

std::vector<double> EvalReport::recall() const {
  std::vector<double> r(classes.size(), 0.0);
  for (size_t i = 0; i < classes.size(); ++i) {
    const long row = std::accumulate(confusion[i].begin(), confusion[i].end(), 0L);
    r[i] = row ? static_cast<double>(confusion[i][i]) / static_cast<double>(row) : 0.0;
  }
  return r;
}

std::vector<int> stratified_group_folds(std::span<const int> y, std::span<const int> group, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (y.size() != group.size()) throw std::invalid_argument("labels and groups differ in length");
  const auto classes = sorted_classes(y);
  const auto groups = sorted_classes(group);
  const size_t C = classes.size(), G = groups.size(), K = static_cast<size_t>(k);

  std::vector<double> y_cnt(C, 0.0);
  std::vector<std::vector<double>> per_group(G, std::vector<double>(C, 0.0));
  std::vector<size_t> yi(y.size()), gi(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    yi[i] = static_cast<size_t>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
    gi[i] = static_cast<size_t>(std::lower_bound(groups.begin(), groups.end(), group[i]) - groups.begin());
    y_cnt[yi[i]] += 1.0;
    per_group[gi[i]][yi[i]] += 1.0;
  }
  std::string too_small;
  for (size_t c = 0; c < C; ++c) {
    if (y_cnt[c] < k) too_small += (too_small.empty() ? "" : ", ") + std::to_string(classes[c]);
  }
  if (!too_small.empty()) {
    throw std::invalid_argument("classes with fewer than " + std::to_string(k) + " instances: " + too_small);
  }
  if (G < K) throw std::invalid_argument("need at least " + std::to_string(k) + " groups for " + std::to_string(k) + " folds");

  auto std_of = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };

  std::vector<size_t> order(G);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  for (size_t i = G; i > 1; --i) std::swap(order[i - 1], order[static_cast<size_t>(rng() % i)]);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return std_of(per_group[a]) > std_of(per_group[b]); });

  std::vector<std::vector<double>> per_fold(K, std::vector<double>(C, 0.0));
  std::vector<int> fold_of_group(G, 0);
  std::vector<double> col(K);
  for (size_t g : order) {
    double best_eval = std::numeric_limits<double>::infinity();
    double best_samples = std::numeric_limits<double>::infinity();
    size_t best = 0;
    for (size_t f = 0; f < K; ++f) {
      for (size_t c = 0; c < C; ++c) per_fold[f][c] += per_group[g][c];
      double eval = 0.0;
      for (size_t c = 0; c < C; ++c) {
        for (size_t ff = 0; ff < K; ++ff) col[ff] = per_fold[ff][c] / y_cnt[c];
        eval += std_of(col);
      }
      eval /= static_cast<double>(C);
      for (size_t c = 0; c < C; ++c) per_fold[f][c] -= per_group[g][c];
      const double samples = std::accumulate(per_fold[f].begin(), per_fold[f].end(), 0.0);
      const bool close = std::abs(eval - best_eval) <= 1e-8 + 1e-5 * std::abs(best_eval);
      if (eval < best_eval || (close && samples < best_samples)) {
        best_eval = std::min(eval, best_eval);
        best_samples = samples;
        best = f;
      }
    }
    for (size_t c = 0; c < C; ++c) per_fold[best][c] += per_group[g][c];
    fold_of_group[g] = static_cast<int>(best);
  }

  std::vector<int> folds(y.size());
  for (size_t i = 0; i < y.size(); ++i) folds[i] = fold_of_group[gi[i]];
  return folds;
}

EvalReport kfold_cv(const Dataset& d, int k, uint64_t seed, const Trainer& trainer) {
  check_rows(d, "kfold");
  const auto folds = stratified_group_folds(d.y, d.group, k, seed);
  EvalReport r = empty_report("within_session", sorted_classes(d.y));
  for (int f = 0; f < k; ++f) {
    std::vector<size_t> tr, te;
    for (size_t i = 0; i < d.size(); ++i) (folds[i] == f ? te : tr).push_back(i);
    if (te.empty()) continue;
    const Predictor p = trainer(subset(d, tr));
    r.fold_accuracy.push_back(score(p, subset(d, te), r.classes, r.confusion));
  }
  finish(r);
  return r;
}

Dataset normalize_per_group(const Dataset& d) {
  Dataset out = d;
  std::map<int, std::vector<size_t>> by_group;
  for (size_t i = 0; i < d.size(); ++i) by_group[d.group[i]].push_back(i);
  for (const auto& [g, idx] : by_group) {
    std::vector<std::vector<double>> rows;
    for (size_t i : idx) rows.push_back(d.x[i]);
    const NormStats s = zscore_fit(rows);
    for (size_t i : idx) out.x[i] = zscore_apply(s, d.x[i]);
  }
  return out;
}

EvalReport cross_session_eval(const Dataset& a, const Dataset& b, const Trainer& trainer, bool per_session_norm) {
  check_rows(a, "cross-session A");
  check_rows(b, "cross-session B");
  const auto ca = sorted_classes(a.y), cb = sorted_classes(b.y);
  if (ca != cb) throw std::invalid_argument("cross-session: the two sessions have different class sets");
  // Treat each input as one session regardless of its group ids.
  Dataset na = a, nb = b;
  std::fill(na.group.begin(), na.group.end(), 0);
  std::fill(nb.group.begin(), nb.group.end(), 1);
  if (per_session_norm) {
    na = normalize_per_group(na);
    nb = normalize_per_group(nb);
  }
  EvalReport r = empty_report("cross_session", ca);
  r.fold_accuracy.push_back(score(trainer(na), nb, r.classes, r.confusion));
  r.fold_accuracy.push_back(score(trainer(nb), na, r.classes, r.confusion));
  finish(r);
  return r;
}

EvalReport leave_one_user_out(std::span<const Dataset> users, const Trainer& trainer, bool per_session_norm) {
  if (users.size() < 2) throw std::invalid_argument("leave-one-user-out needs at least two users");
  std::vector<Dataset> prepared;
  std::set<int> all;
  for (const auto& u : users) {
    check_rows(u, "leave-one-user-out");
    prepared.push_back(per_session_norm ? normalize_per_group(u) : u);
    all.insert(u.y.begin(), u.y.end());
  }
  EvalReport r = empty_report("cross_user", std::vector<int>(all.begin(), all.end()));
  for (size_t held = 0; held < prepared.size(); ++held) {
    Dataset train;
    for (size_t u = 0; u < prepared.size(); ++u) {
      if (u != held) train.append(prepared[u]);
    }
    const std::set<int> seen(train.y.begin(), train.y.end());
    for (int c : prepared[held].y) {
      if (!seen.count(c)) {
        throw std::invalid_argument("user " + std::to_string(held) + " has class " + std::to_string(c) +
                                    " that no other user provides");
      }
    }
    r.fold_accuracy.push_back(score(trainer(train), prepared[held], r.classes, r.confusion));
  }
  finish(r);
  return r;
}

std::string report_text(const EvalReport& r) {
  auto join = [](const auto& v, auto f) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
    return s;
  };
  std::ostringstream o;
  o << "protocol: " << r.protocol << "\n";
  o << "config_hash: " << r.config_hash << "\n";
  o << "folds: " << r.fold_accuracy.size() << "\n";
  o << "accuracy_mean: " << fmt(r.mean) << "\n";
  o << "accuracy_std: " << fmt(r.stdev) << "\n";
  o << "pooled_accuracy: " << fmt(r.pooled_accuracy()) << "\n";
  o << "samples: " << r.total() << "\n";
  o << "fold_accuracy: " << join(r.fold_accuracy, fmt) << "\n";
  o << "classes: " << join(r.classes, [](int c) { return GestureLabel::from_index(c).name(); }) << "\n";
  o << "precision: " << join(r.precision(), fmt) << "\n";
  o << "recall: " << join(r.recall(), fmt) << "\n";
  return o.str();
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream o;
  o << "protocol,config_hash,folds,accuracy_mean,accuracy_std,pooled_accuracy,samples\n";
  o << r.protocol << "," << r.config_hash << "," << r.fold_accuracy.size() << "," << fmt(r.mean) << ","
    << fmt(r.stdev) << "," << fmt(r.pooled_accuracy()) << "," << r.total() << "\n";
  return o.str();
}

std::string confusion_csv(const EvalReport& r) {
  std::ostringstream o;
  o << "truth\\predicted";
  for (int c : r.classes) o << "," << GestureLabel::from_index(c).name();
  o << "\n";
  for (size_t i = 0; i < r.classes.size(); ++i) {
    o << GestureLabel::from_index(r.classes[i]).name();
    for (long v : r.confusion[i]) o << "," << v;
    o << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------

MatchReport match_detections(std::span<const Detection> dets, std::span<const EventSpan> truth, double tol_s,
                             double timing_tol_s) {
  MatchReport r;
  std::vector<bool> used(dets.size(), false);
  for (size_t t = 0; t < truth.size(); ++t) {
    const auto g = truth[t].gesture();
    if (!g) continue;
    ++r.truths;
    const double c = truth[t].center();
    std::optional<size_t> best;
    for (size_t i = 0; i < dets.size(); ++i) {
      if (used[i]) continue;
      const double ts = dets[i].timestamp_s;
      if (ts < truth[t].onset - tol_s || ts > truth[t].offset + tol_s) continue;
      if (!best || std::abs(ts - c) < std::abs(dets[*best].timestamp_s - c)) best = i;
    }
    if (!best) {
      r.misses.push_back(t);
      continue;
    }
    used[*best] = true;
    MatchPair p;
    p.truth = t;
    p.detection = *best;
    p.timing_error_s = std::abs(dets[*best].timestamp_s - c);
    const GestureLabel pred = GestureLabel::from_index(dets[*best].label);
    p.label_correct = pred == *g;
    p.direction_confused = is_convergence(pred) != is_convergence(*g);
    r.correct += p.label_correct && p.timing_error_s < timing_tol_s;
    r.direction_confusions += p.direction_confused;
    r.max_timing_error_s = std::max(r.max_timing_error_s, p.timing_error_s);
    r.pairs.push_back(p);
  }
  for (size_t i = 0; i < dets.size(); ++i) {
    if (!used[i]) r.false_positives.push_back(i);
  }
  return r;
}

FprReport false_positive_rate(const Recording& rec, const RunConfig& cfg, const ArtifactModel& gate,
                              const ForestModel& forest, bool preamble_on) {
  FprReport r;
  const StreamResult s = classify_vergence_stream(rec, cfg, gate, forest, {preamble_on, false});
  r.events = s.events.size();
  r.active_windows = s.active_windows;
  r.windows = s.windows;
  r.minutes = rec.duration() / 60.0;
  r.defined = r.active_windows > 0;
  r.rate = r.defined ? static_cast<double>(r.events) / static_cast<double>(r.active_windows) : 0.0;
  r.events_per_minute = r.minutes > 0.0 ? static_cast<double>(r.events) / r.minutes : 0.0;
  return r;
}

LatencyReport latency_bench(const RunConfig& cfg, const ArtifactModel& gate, const ForestModel& forest,
                            size_t n_windows, uint64_t seed) {
  if (n_windows == 0) throw std::invalid_argument("latency benchmark needs at least one window");
  constexpr size_t warmup = 20;
  const double needed = cfg.window.length_s + static_cast<double>(n_windows + warmup) * cfg.window.step_s;
  SessionSpec spec = session_spec(cfg, seed);
  const double per_round = spec.cue_interval * static_cast<double>(spec.gesture_order.size());
  spec.rounds = std::max(1, static_cast<int>(std::ceil((needed - spec.lead_in) / per_round)));
  const Session s = gen_session(spec, cfg.eye, cfg.depths);

  StreamProcessor proc(cfg, gate, forest, false, true);
  proc.set_threshold(baseline_threshold(s.recording, cfg.gate));
  std::vector<double> ms;
  ms.reserve(n_windows);
  for (size_t k = 0; k < warmup + n_windows; ++k) {
    const Window w = window_at(s.recording, k, cfg.window);
    const auto t0 = std::chrono::steady_clock::now();
    auto dets = proc.process(w);
    const auto t1 = std::chrono::steady_clock::now();
    (void)dets;
    if (k >= warmup) ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  LatencyReport r;
  r.windows = ms.size();
  r.mean_ms = mean_of(ms);
  r.stdev_ms = sample_std(ms);
  r.max_ms = *std::max_element(ms.begin(), ms.end());
  r.stride_ms = cfg.window.step_s * 1000.0;
  return r;
}

} // namespace eogv
