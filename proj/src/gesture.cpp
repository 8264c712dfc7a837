#include "eogv/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace eogv {

std::vector<size_t> detect_peaks(const Window& smoothed, const PeakSpec& spec,
                                 const std::optional<std::array<double, 2>>& reference) {
  const size_t n = smoothed.size();
  if (n < 3) return {};
  std::array<double, 2> ref{};
  for (size_t c = 0; c < 2; ++c) {
    ref[c] = reference ? (*reference)[c] : median(smoothed.samples[c]);
  }
  std::vector<double> env(n);
  for (size_t i = 0; i < n; ++i) {
    env[i] = std::max(std::abs(smoothed.samples[kLeft][i] - ref[kLeft]),
                      std::abs(smoothed.samples[kRight][i] - ref[kRight]));
  }

  std::vector<size_t> candidates;
  for (size_t i = 1; i + 1 < n; ++i) {
    // Rising into i, strictly falling after: the first sample of a plateau.
    if (env[i] > spec.min_amplitude_mv && env[i] > env[i - 1] && env[i] >= env[i + 1]) {
      size_t j = i;
      while (j + 1 < n && env[j + 1] == env[i]) ++j;
      if (j + 1 < n && env[j + 1] < env[i]) candidates.push_back(i);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](size_t a, size_t b) { return env[a] > env[b]; });

  const double min_sep = spec.min_separation_s * smoothed.sample_rate;
  std::vector<size_t> kept;
  for (size_t c : candidates) {
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](size_t k) {
      return std::abs(static_cast<double>(c) - static_cast<double>(k)) < min_sep;
    });
    if (clear) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::optional<GestureSegment> extract_segment(const Window& w, size_t peak, double half_s) {
  const size_t half = static_cast<size_t>(std::llround(half_s * w.sample_rate));
  if (peak < half || peak + half >= w.size()) return std::nullopt;
  GestureSegment seg;
  seg.sample_rate = w.sample_rate;
  seg.peak_index = peak;
  seg.source_start_index = w.start_index;
  for (size_t c = 0; c < 2; ++c) {
    const auto first = w.samples[c].begin() + static_cast<std::ptrdiff_t>(peak - half);
    seg.samples[c].assign(first, first + static_cast<std::ptrdiff_t>(2 * half + 1));
  }
  return seg;
}

const std::array<std::string, kGestureFeatureCount>& gesture_feature_names() {
  static const std::array<std::string, kGestureFeatureCount> names = [] {
    const char* base[5] = {"range", "integral", "slope", "deriv_mean", "deriv_var"};
    std::array<std::string, kGestureFeatureCount> out;
    size_t k = 0;
    for (const char* ch : {"left", "right"})
      for (const char* half : {"first", "second"})
        for (const char* b : base) out[k++] = std::string(ch) + "_" + half + "_" + b;
    return out;
  }();
  return names;
}

GestureFeatures extract_features(const GestureSegment& seg) {
  GestureFeatures f{};
  const size_t n = seg.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("gesture segment must have an odd length >= 3");
  const size_t mid = seg.center();
  const double fs = seg.sample_rate;
  const double dt = 1.0 / fs;
  const double half_duration = static_cast<double>(mid) / fs;

  size_t k = 0;
  for (size_t c = 0; c < 2; ++c) {
    const auto& x = seg.samples[c];
    for (size_t h = 0; h < 2; ++h) {
      const size_t lo = h == 0 ? 0 : mid;
      const size_t hi = h == 0 ? mid : n - 1;  // inclusive
      double mx = x[lo], mn = x[lo], integral = 0.0, dsum = 0.0;
      for (size_t i = lo; i < hi; ++i) {
        mx = std::max(mx, x[i + 1]);
        mn = std::min(mn, x[i + 1]);
        integral += 0.5 * (x[i] + x[i + 1]) * dt;
        dsum += (x[i + 1] - x[i]) * fs;
      }
      const double nd = static_cast<double>(hi - lo);
      const double dmean = dsum / nd;
      double dvar = 0.0;
      for (size_t i = lo; i < hi; ++i) {
        const double d = (x[i + 1] - x[i]) * fs - dmean;
        dvar += d * d;
      }
      dvar /= nd;
      f[k++] = mx - mn;
      f[k++] = integral;
      f[k++] = (x[hi] - x[lo]) / half_duration;
      f[k++] = dmean;
      f[k++] = dvar;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class TreeBuilder {
public:
  TreeBuilder(std::span<const std::vector<double>> x, std::span<const int> slots, size_t n_classes,
              const ForestParams& params, size_t max_features, uint64_t seed)
      : x_(x), slots_(slots), n_classes_(n_classes), params_(params), max_features_(max_features),
        rng_(seed) {}

  DecisionTree build(std::vector<size_t> idx) {
    DecisionTree tree;
    grow(tree, std::move(idx), 0);
    return tree;
  }

  std::mt19937_64& rng() { return rng_; }

private:
  struct Split {
    int feature{-1};
    double threshold{0.0};
    double score{-1.0};
  };

  std::vector<int> count(const std::vector<size_t>& idx) const {
    std::vector<int> c(n_classes_, 0);
    for (size_t i : idx) ++c[static_cast<size_t>(slots_[i])];
    return c;
  }

  // Maximises sum_c l_c^2 / n_l + sum_c r_c^2 / n_r, i.e. minimises the
  // size-weighted Gini impurity of the children.
  void best_for_feature(const std::vector<size_t>& idx, size_t f, Split& best) const {
    std::vector<std::pair<double, int>> v;
    v.reserve(idx.size());
    for (size_t i : idx) v.emplace_back(x_[i][f], slots_[i]);
    std::sort(v.begin(), v.end());
    std::vector<double> left(n_classes_, 0.0), right(n_classes_, 0.0);
    for (const auto& p : v) right[static_cast<size_t>(p.second)] += 1.0;
    double sl = 0.0, sr = 0.0;
    for (double r : right) sr += r * r;
    const double m = static_cast<double>(v.size());
    for (size_t i = 0; i + 1 < v.size(); ++i) {
      const size_t s = static_cast<size_t>(v[i].second);
      sl += 2.0 * left[s] + 1.0;
      left[s] += 1.0;
      sr -= 2.0 * right[s] - 1.0;
      right[s] -= 1.0;
      if (v[i].first == v[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double score = sl / nl + sr / (m - nl);
      if (score > best.score) {
        double thr = 0.5 * (v[i].first + v[i + 1].first);
        if (!(thr < v[i + 1].first)) thr = v[i].first;
        best = {static_cast<int>(f), thr, score};
      }
    }
  }

  int grow(DecisionTree& tree, std::vector<size_t> idx, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto counts = count(idx);
    const size_t nonzero = static_cast<size_t>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
    const bool stop = nonzero <= 1 || (params_.max_depth > 0 && depth >= params_.max_depth) ||
                      static_cast<int>(idx.size()) < params_.min_samples_split;
    Split best;
    if (!stop) {
      const size_t d = x_.front().size();
      std::vector<size_t> order(d);
      std::iota(order.begin(), order.end(), size_t{0});
      for (size_t i = 0; i < d; ++i) {
        // Partial Fisher-Yates; keep drawing past max_features only while no
        // feature has produced a valid split.
        const size_t j = i + static_cast<size_t>(rng_() % (d - i));
        std::swap(order[i], order[j]);
        best_for_feature(idx, order[i], best);
        if (i + 1 >= max_features_ && best.feature >= 0) break;
      }
    }
    if (stop || best.feature < 0) {
      tree.nodes[static_cast<size_t>(id)].counts = std::move(counts);
      return id;
    }
    std::vector<size_t> l, r;
    for (size_t i : idx) {
      (x_[i][static_cast<size_t>(best.feature)] <= best.threshold ? l : r).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int li = grow(tree, std::move(l), depth + 1);
    const int ri = grow(tree, std::move(r), depth + 1);
    TreeNode& node = tree.nodes[static_cast<size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = ri;
    return id;
  }

  std::span<const std::vector<double>> x_;
  std::span<const int> slots_;
  size_t n_classes_;
  const ForestParams& params_;
  size_t max_features_;
  std::mt19937_64 rng_;
};

size_t argmax_lowest(std::span<const double> v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

} // namespace

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.at(0);
  while (node->feature >= 0) {
    node = &nodes[static_cast<size_t>(x[static_cast<size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                : node->right)];
  }
  return *node;
}

int DecisionTree::predict_slot(std::span<const double> x) const {
  const auto& counts = leaf_for(x).counts;
  size_t best = 0;
  for (size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return static_cast<int>(best);
}

ForestModel fit_forest(std::span<const std::vector<double>> x, std::span<const int> y,
                       const ForestParams& params, NormStats norm) {
  if (x.empty()) throw std::invalid_argument("cannot fit a forest on an empty training set");
  if (x.size() != y.size()) throw std::invalid_argument("features and labels differ in length");
  if (params.n_trees < 1) throw std::invalid_argument("forest needs at least one tree");
  const size_t d = x.front().size();
  if (d == 0) throw std::invalid_argument("features must be non-empty");
  for (const auto& r : x) {
    if (r.size() != d) throw std::invalid_argument("inconsistent feature dimension");
  }

  ForestModel m;
  m.classes.assign(y.begin(), y.end());
  std::sort(m.classes.begin(), m.classes.end());
  m.classes.erase(std::unique(m.classes.begin(), m.classes.end()), m.classes.end());
  if (m.classes.size() < 2) throw std::invalid_argument("forest needs at least two classes");
  m.n_features = d;
  m.params = params;
  m.norm = std::move(norm);

  std::vector<int> slots(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    slots[i] = static_cast<int>(std::lower_bound(m.classes.begin(), m.classes.end(), y[i]) - m.classes.begin());
  }
  const size_t max_features =
      params.max_features > 0 ? std::min<size_t>(static_cast<size_t>(params.max_features), d)
                              : std::max<size_t>(1, static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(d)))));

  const size_t n = x.size();
  for (int t = 0; t < params.n_trees; ++t) {
    TreeBuilder builder(x, slots, m.classes.size(), params, max_features,
                        splitmix64(params.seed ^ splitmix64(static_cast<uint64_t>(t))));
    std::vector<size_t> idx(n);
    if (params.bootstrap) {
      for (size_t i = 0; i < n; ++i) idx[i] = static_cast<size_t>(builder.rng()() % n);
    } else {
      std::iota(idx.begin(), idx.end(), size_t{0});
    }
    m.trees.push_back(builder.build(std::move(idx)));
  }
  return m;
}

ForestModel train_gesture_model(std::span<const std::vector<double>> raw, std::span<const int> y,
                                const ForestParams& params) {
  if (raw.empty()) throw std::invalid_argument("cannot train on an empty training set");
  NormStats stats = zscore_fit(raw);
  const auto normalized = zscore_apply(stats, raw);
  return fit_forest(normalized, y, params, std::move(stats));
}

ForestPrediction predict_normalized(const ForestModel& m, std::span<const double> x) {
  if (!m.fitted()) throw std::logic_error("forest model is not fitted");
  if (x.size() != m.n_features) {
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                                std::to_string(m.n_features));
  }
  ForestPrediction p;
  p.votes.assign(m.classes.size(), 0.0);
  for (const auto& tree : m.trees) p.votes[static_cast<size_t>(tree.predict_slot(x))] += 1.0;
  for (double& v : p.votes) v /= static_cast<double>(m.trees.size());
  const size_t best = argmax_lowest(p.votes);
  p.label = m.classes[best];
  p.confidence = p.votes[best];
  return p;
}

ForestPrediction classify(const ForestModel& m, std::span<const double> raw) {
  if (!m.fitted()) throw std::logic_error("forest model is not fitted");
  if (raw.size() != m.n_features) {
    throw std::invalid_argument("feature dimension " + std::to_string(raw.size()) + " does not match model dimension " +
                                std::to_string(m.n_features));
  }
  if (m.norm.size() == 0) return predict_normalized(m, raw);
  const auto z = zscore_apply(m.norm, raw);
  return predict_normalized(m, z);
}

PreambleUpdate update_preamble(const PreambleState& state, const Window& conditioned, double threshold_mv) {
  PreambleUpdate u{state, false, std::nullopt};
  double best = 0.0;
  size_t best_i = 0;
  for (size_t c = 0; c < 2; ++c) {
    const auto& x = conditioned.samples[c];
    if (x.empty()) continue;
    const double m = median(x);
    for (size_t i = 0; i < x.size(); ++i) {
      const double dev = std::abs(x[i] - m);
      if (dev > best) {
        best = dev;
        best_i = i;
      }
    }
  }
  if (!(best > threshold_mv)) return u;
  const double t = conditioned.start_time + static_cast<double>(best_i) / conditioned.sample_rate;
  u.brow_time = t;
  if (t - state.last_toggle_time >= state.refractory) {
    u.state.active = !state.active;
    u.state.last_toggle_time = t;
    u.toggled = true;
  }
  return u;
}

} // namespace eogv
