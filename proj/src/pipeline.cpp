#include "eogv/pipeline.hpp"

#include <algorithm>
#include <limits>

namespace eogv {

StreamProcessor::StreamProcessor(const RunConfig& cfg, const ArtifactModel& gate, const ForestModel& forest,
                                 bool preamble_enabled, bool start_active)
    : cfg_(cfg),
      gate_(gate),
      forest_(forest),
      preamble_enabled_(preamble_enabled),
      conditioner_(cfg.sample_rate, cfg.filter),
      smoother_(cfg.filter.savgol_window, cfg.filter.savgol_order) {
  preamble_.active = start_active;
  preamble_.refractory = cfg.preamble.refractory_s;
}

std::vector<Detection> StreamProcessor::process(const Window& raw, WindowTrace* trace) {
  WindowTrace local;
  WindowTrace& tr = trace ? *trace : local;
  tr = {};

  Window cond;
  cond.sample_rate = raw.sample_rate;
  cond.start_index = raw.start_index;
  cond.start_time = raw.start_time;
  for (size_t c = 0; c < 2; ++c) cond.samples[c] = conditioner_.apply(raw.samples[c]);

  tr.active = is_active(cond, threshold_);

  if (preamble_enabled_) {
    const PreambleUpdate u = update_preamble(preamble_, cond, cfg_.preamble.threshold_mv);
    preamble_ = u.state;
    tr.toggled = u.toggled;
    if (u.brow_time) {
      tr.brow = true;
      return {};
    }
    if (!preamble_.active) return {};
  }
  if (!tr.active) return {};

  const WindowDecision d = classify_window(gate_, artifact_features(cond, cfg_.artifact_features));
  if (d.cls != WindowClass::Vergence) return {};
  tr.vergence = true;

  Window smooth = cond;
  for (size_t c = 0; c < 2; ++c) smooth.samples[c] = smoother_.apply(cond.samples[c]);

  const auto peaks = detect_peaks(smooth, cfg_.peaks, threshold_.baseline_median);
  tr.peaks = peaks.size();
  std::vector<Detection> out;
  for (size_t p : peaks) {
    const auto seg = extract_segment(smooth, p, cfg_.segment_half_s);
    if (!seg) {
      ++tr.skipped_edge;
      continue;
    }
    ++tr.segments;
    const GestureFeatures f = extract_features(*seg);
    const ForestPrediction pred = classify(forest_, f);
    out.push_back({raw.start_time + static_cast<double>(p) / raw.sample_rate, pred.label, pred.confidence,
                   raw.start_time});
  }
  return out;
}

std::vector<Detection> DetectionMerger::release(double horizon) {
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const Detection& a, const Detection& b) { return a.timestamp_s < b.timestamp_s; });
  std::vector<Detection> out;
  size_t i = 0;
  while (i < pending_.size()) {
    size_t j = i + 1;
    size_t best = i;
    while (j < pending_.size() && pending_[j].timestamp_s - pending_[j - 1].timestamp_s < gap_) {
      if (pending_[j].confidence > pending_[best].confidence) best = j;
      ++j;
    }
    if (!(pending_[j - 1].timestamp_s + gap_ <= horizon)) break;
    out.push_back(pending_[best]);
    i = j;
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

std::vector<Detection> DetectionMerger::flush() {
  return release(std::numeric_limits<double>::infinity());
}

std::vector<Detection> merge_detections(std::vector<Detection> dets, double gap_s) {
  DetectionMerger m(gap_s);
  for (const auto& d : dets) m.push(d);
  return m.flush();
}

StreamResult classify_vergence_stream(const Recording& rec, const RunConfig& cfg, const ArtifactModel& gate,
                                      const ForestModel& forest, const StreamOptions& opt) {
  StreamResult r;
  const size_t count = window_count(rec.size(), rec.sample_rate, cfg.window);
  if (count == 0) return r;
  rec.validate();

  StreamProcessor proc(cfg, gate, forest, opt.preamble, opt.start_active);
  proc.set_threshold(baseline_threshold(rec, cfg.gate));
  std::vector<Detection> raw;
  for (size_t k = 0; k < count; ++k) {
    WindowTrace tr;
    auto dets = proc.process(window_at(rec, k, cfg.window), &tr);
    ++r.windows;
    r.active_windows += tr.active;
    r.vergence_windows += tr.vergence;
    r.toggles += tr.toggled;
    raw.insert(raw.end(), dets.begin(), dets.end());
  }
  r.events = merge_detections(std::move(raw), cfg.merge_gap_s);
  return r;
}

} // namespace eogv
