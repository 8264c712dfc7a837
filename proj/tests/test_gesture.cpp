#include <doctest.h>

#include "eogv/config.hpp"
#include "eogv/gesture.hpp"
#include "eogv/io.hpp"
#include "eogv/sigcond.hpp"
#include "eogv/synth.hpp"
#include "eogv/zscore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace eogv;

namespace {

constexpr double kFs = 500.0;

Window blank(size_t n = 1000, double start_time = 0.0) {
  Window w;
  w.start_time = start_time;
  w.samples = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  return w;
}

// Places a waveform so that its anchor sample lands on `at`.
void place(Window& w, const std::array<std::vector<double>, 2>& src, size_t anchor, size_t at) {
  for (size_t c = 0; c < 2; ++c) {
    for (size_t i = 0; i < src[c].size(); ++i) {
      const auto k = static_cast<std::ptrdiff_t>(at) - static_cast<std::ptrdiff_t>(anchor) + static_cast<std::ptrdiff_t>(i);
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(w.size())) w.samples[c][static_cast<size_t>(k)] += src[c][i];
    }
  }
}

GestureWaveform gesture(GestureLabel g, double gain = 15.0, uint64_t seed = 4) {
  GestureTemplate t;
  t.label = g;
  t.amplitude_gain = gain;
  return gen_gesture(t, {}, seed);
}

Window smoothed(Window w) {
  const SavgolFilter sg(251, 3);
  for (auto& ch : w.samples) ch = sg.apply(ch);
  return w;
}

// Straightforward per-half feature computation, one half at a time with
// explicit copies.
std::vector<double> naive_features(const GestureSegment& s) {
  std::vector<double> out;
  const size_t n = s.size();
  const size_t m = n / 2;
  for (size_t c = 0; c < 2; ++c) {
    for (int h = 0; h < 2; ++h) {
      std::vector<double> part;
      for (size_t i = (h == 0 ? 0 : m); i <= (h == 0 ? m : n - 1); ++i) part.push_back(s.samples[c][i]);
      const double range = *std::max_element(part.begin(), part.end()) - *std::min_element(part.begin(), part.end());
      double integral = 0.0;
      for (size_t i = 1; i < part.size(); ++i) integral += (part[i - 1] + part[i]) / 2.0 / s.sample_rate;
      const double slope = (part.back() - part.front()) / (static_cast<double>(m) / s.sample_rate);
      std::vector<double> d;
      for (size_t i = 1; i < part.size(); ++i) d.push_back((part[i] - part[i - 1]) * s.sample_rate);
      double mean = 0.0;
      for (double v : d) mean += v;
      mean /= static_cast<double>(d.size());
      double var = 0.0;
      for (double v : d) var += (v - mean) * (v - mean);
      var /= static_cast<double>(d.size());
      out.insert(out.end(), {range, integral, slope, mean, var});
    }
  }
  return out;
}

GestureSegment random_segment(std::mt19937_64& rng, size_t half = 250) {
  std::normal_distribution<double> n(0.0, 20.0);
  GestureSegment s;
  s.sample_rate = kFs;
  for (auto& ch : s.samples) {
    ch.resize(2 * half + 1);
    double acc = n(rng);
    for (double& v : ch) {
      acc += 0.1 * n(rng);
      v = acc + n(rng);
    }
  }
  return s;
}

// Best single threshold on one feature by exhaustive search over midpoints,
// minimising size-weighted Gini impurity.
struct Stump {
  double threshold;
  int left_label;
  int right_label;
};

Stump brute_force_stump(const std::vector<double>& x, const std::vector<int>& y, int n_classes) {
  std::vector<double> values = x;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  double best_impurity = 1e300;
  Stump best{};
  const auto majority = [&](const std::vector<int>& c) {
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  };
  for (size_t k = 0; k + 1 < values.size(); ++k) {
    const double thr = 0.5 * (values[k] + values[k + 1]);
    std::vector<int> l(static_cast<size_t>(n_classes), 0), r(static_cast<size_t>(n_classes), 0);
    for (size_t i = 0; i < x.size(); ++i) (x[i] <= thr ? l : r)[static_cast<size_t>(y[i])]++;
    const auto gini = [](const std::vector<int>& c) {
      double n = 0.0, s = 0.0;
      for (int v : c) n += v;
      for (int v : c) s += (v / n) * (v / n);
      return std::pair{n, 1.0 - s};
    };
    const auto [nl, gl] = gini(l);
    const auto [nr, gr] = gini(r);
    const double imp = (nl * gl + nr * gr) / (nl + nr);
    if (imp < best_impurity - 1e-12) {
      best_impurity = imp;
      best = {thr, majority(l), majority(r)};
    }
  }
  return best;
}

} // namespace

TEST_SUITE("gesture") {

TEST_CASE("one large gesture gives one peak at the generated position") {
  for (const auto& g : all_gestures()) {
    const auto gw = gesture(g);
    Window w = blank();
    place(w, gw.channels, gw.peak_index, 520);
    const auto peaks = detect_peaks(smoothed(w));
    if (std::abs(angle_delta({}, g)) > 8.0) {
      REQUIRE(peaks.size() == 1);
      CHECK(std::abs(static_cast<double>(peaks[0]) - 520.0) <= 10.0);  // 20 ms
    }
    for (size_t p : peaks) CHECK(std::abs(static_cast<double>(p) - 520.0) <= 10.0);
  }
}

TEST_CASE("no peaks in silence or below 30 mV") {
  CHECK(detect_peaks(blank()).empty());
  // 200->70 at gain 9.2 peaks near 25 mV
  const auto gw = gesture(GestureLabel(Depth::Far, Depth::Mid), 25.0 / 2.7);
  CHECK(std::abs(gw.peak_mv[0]) < 30.0);
  Window w = blank();
  place(w, gw.channels, gw.peak_index, 500);
  CHECK(detect_peaks(smoothed(w)).empty());
}

TEST_CASE("both polarities are detected and separated by at least 0.5 s") {
  Window w = blank(1500);
  const auto a = gesture(GestureLabel(Depth::Far, Depth::Near));
  const auto b = gesture(GestureLabel(Depth::Near, Depth::Far));
  place(w, a.channels, a.peak_index, 400);
  place(w, b.channels, b.peak_index, 1100);
  const auto peaks = detect_peaks(w, {}, std::array<double, 2>{0.0, 0.0});
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] == 400);
  CHECK(peaks[1] == 1100);
  // a second bump 0.3 s from the first is suppressed
  Window v = blank(1500);
  place(v, a.channels, a.peak_index, 400);
  for (size_t c = 0; c < 2; ++c) v.samples[c][550] += 500.0;
  const auto close = detect_peaks(v, {}, std::array<double, 2>{0.0, 0.0});
  for (size_t i = 1; i < close.size(); ++i) CHECK(close[i] - close[i - 1] >= 250);
}

TEST_CASE("segment edge rules") {
  Window w = blank();
  for (size_t i = 0; i < 1000; ++i) w.samples[0][i] = static_cast<double>(i);
  const auto mid = extract_segment(w, 500);
  REQUIRE(mid);
  CHECK(mid->size() == 501);
  CHECK(mid->samples[0][mid->center()] == 500.0);
  CHECK(mid->samples[0].front() == 250.0);
  CHECK_FALSE(extract_segment(w, 150).has_value());  // 0.3 s
  const auto edge = extract_segment(w, 250);          // exactly 0.5 s
  REQUIRE(edge);
  CHECK(edge->samples[0].front() == 0.0);
  CHECK_FALSE(extract_segment(w, 750).has_value());
  CHECK(extract_segment(w, 749).has_value());
}

TEST_CASE("constant segment features") {
  GestureSegment s;
  s.sample_rate = kFs;
  s.samples = {std::vector<double>(501, 4.0), std::vector<double>(501, -1.0)};
  const auto f = extract_features(s);
  for (size_t q = 0; q < 4; ++q) {
    const double c = q < 2 ? 4.0 : -1.0;
    CHECK(f[5 * q + 0] == 0.0);
    CHECK(f[5 * q + 1] == doctest::Approx(0.5 * c));
    CHECK(f[5 * q + 2] == 0.0);
    CHECK(f[5 * q + 3] == 0.0);
    CHECK(f[5 * q + 4] == 0.0);
  }
}

TEST_CASE("antisymmetric segment has opposite half integrals") {
  GestureSegment s;
  s.sample_rate = kFs;
  for (auto& ch : s.samples) ch.resize(501);
  for (size_t i = 0; i < 501; ++i) {
    const double t = (static_cast<double>(i) - 250.0) / kFs;
    s.samples[0][i] = std::sin(7.0 * t) * std::exp(-t * t * 4.0);
    s.samples[1][i] = t * t * t;
  }
  const auto f = extract_features(s);
  CHECK(f[1] == doctest::Approx(-f[6]).epsilon(1e-12));
  CHECK(f[11] == doctest::Approx(-f[16]).epsilon(1e-12));
}

TEST_CASE("features match a naive implementation") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_segment(rng, 50 + static_cast<size_t>(trial));
    const auto f = extract_features(s);
    const auto g = naive_features(s);
    for (size_t j = 0; j < f.size(); ++j) CHECK(f[j] == doctest::Approx(g[j]).epsilon(1e-9).scale(1.0));
  }
  // 70->200 gesture at gain 15, through the real segmentation path
  const auto gw = gesture(GestureLabel(Depth::Mid, Depth::Far));
  Window w = blank();
  place(w, gw.channels, gw.peak_index, 500);
  const auto seg = extract_segment(smoothed(w), 500);
  REQUIRE(seg);
  const auto f = extract_features(*seg);
  const auto g = naive_features(*seg);
  for (size_t j = 0; j < f.size(); ++j) CHECK(f[j] == doctest::Approx(g[j]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("malformed segments are rejected") {
  GestureSegment s;
  s.samples = {std::vector<double>(500), std::vector<double>(500)};
  CHECK_THROWS_AS(extract_features(s), std::invalid_argument);
  s.samples = {std::vector<double>(1), std::vector<double>(1)};
  CHECK_THROWS_AS(extract_features(s), std::invalid_argument);
}

TEST_CASE("feature order matches the golden file") {
  std::ifstream in(std::string(EOGV_TEST_DATA) + "/gesture_feature_names.txt");
  REQUIRE(in.good());
  std::vector<std::string> golden;
  for (std::string line; std::getline(in, line);) golden.push_back(line);
  const auto& names = gesture_feature_names();
  REQUIRE(golden.size() == names.size());
  for (size_t i = 0; i < names.size(); ++i) CHECK(golden[i] == names[i]);
}

TEST_CASE("z-score on the fit set has mean 0 and std 1") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(5.0, 3.0);
  std::vector<std::vector<double>> rows(40, std::vector<double>(20));
  for (auto& r : rows)
    for (size_t j = 0; j < r.size(); ++j) r[j] = n(rng) * static_cast<double>(j + 1);
  const auto stats = zscore_fit(rows);
  CHECK_FALSE(stats.any_floored());
  const auto z = zscore_apply(stats, rows);
  for (size_t j = 0; j < 20; ++j) {
    double m = 0.0, v = 0.0;
    for (const auto& r : z) m += r[j];
    m /= 40.0;
    for (const auto& r : z) v += (r[j] - m) * (r[j] - m);
    v /= 40.0;
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-9);
  }
  // pure gain on every feature leaves the normalised values unchanged
  auto scaled = rows;
  for (auto& r : scaled)
    for (size_t j = 0; j < r.size(); ++j) r[j] *= 1.0 + 0.05 * static_cast<double>(j);
  const auto zs = zscore_apply(zscore_fit(scaled), scaled);
  for (size_t i = 0; i < z.size(); ++i)
    for (size_t j = 0; j < 20; ++j) CHECK(zs[i][j] == doctest::Approx(z[i][j]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("single-row z-score floors every std") {
  const std::vector<std::vector<double>> one{{1.0, 2.0, 3.0}};
  const auto stats = zscore_fit(one);
  CHECK(stats.any_floored());
  for (size_t j = 0; j < 3; ++j) {
    CHECK(stats.floored[j]);
    CHECK(stats.stdev[j] == kStdFloor);
  }
}

TEST_CASE("forest interpolates separable data and is deterministic") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 120; ++i) {
    const int label = i % 4;
    std::vector<double> r(20);
    for (double& v : r) v = n(rng);
    r[static_cast<size_t>(label)] += 6.0;
    x.push_back(r);
    y.push_back(label);
  }
  ForestParams p;
  p.n_trees = 30;
  p.seed = 11;
  const auto m = fit_forest(x, y, p);
  for (size_t i = 0; i < x.size(); ++i) CHECK(predict_normalized(m, x[i]).label == y[i]);
  const auto m2 = fit_forest(x, y, p);
  for (int probe = 0; probe < 100; ++probe) {
    std::vector<double> r(20);
    for (double& v : r) v = 3.0 * n(rng);
    const auto a = predict_normalized(m, r);
    const auto b = predict_normalized(m2, r);
    CHECK(a.label == b.label);
    CHECK(a.votes == b.votes);
  }
  CHECK(format_forest_model(m, "") == format_forest_model(m2, ""));
}

TEST_CASE("a depth-1 single tree equals the brute-force stump") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs;
    std::vector<int> y;
    const double cut = u(rng);
    for (int i = 0; i < 60; ++i) {
      const double v = u(rng);
      xs.push_back(v);
      // threshold labels with 10% flips
      const bool flip = u(rng) < 1.0;
      y.push_back((v > cut) != flip ? 1 : 0);
    }
    std::vector<std::vector<double>> x;
    for (double v : xs) x.push_back({v});
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
    ForestParams p;
    p.n_trees = 1;
    p.max_depth = 1;
    p.bootstrap = false;
    const auto m = fit_forest(x, y, p);
    const auto s = brute_force_stump(xs, y, 2);
    for (double q = -0.5; q <= 10.5; q += 0.01) {
      if (std::abs(q - s.threshold) < 1e-9) continue;
      const std::vector<double> probe{q};
      CHECK(predict_normalized(m, probe).label == (q <= s.threshold ? s.left_label : s.right_label));
    }
  }
}

TEST_CASE("ties in the vote go to the lowest label") {
  ForestModel m;
  m.classes = {2, 5};
  m.n_features = 1;
  DecisionTree a, b;
  a.nodes.push_back({-1, 0.0, -1, -1, {0, 3}});
  b.nodes.push_back({-1, 0.0, -1, -1, {3, 0}});
  m.trees = {a, b};
  const std::vector<double> x{0.0};
  const auto p = predict_normalized(m, x);
  CHECK(p.label == 2);
  CHECK(p.confidence == 0.5);
}

TEST_CASE("forest errors") {
  ForestParams p;
  std::vector<std::vector<double>> empty;
  std::vector<int> none;
  CHECK_THROWS_AS(fit_forest(empty, none, p), std::invalid_argument);
  std::vector<std::vector<double>> x{{1.0}, {2.0}};
  std::vector<int> one{3, 3};
  CHECK_THROWS_AS(fit_forest(x, one, p), std::invalid_argument);
  std::vector<int> two{0, 1};
  p.n_trees = 0;
  CHECK_THROWS_AS(fit_forest(x, two, p), std::invalid_argument);
  p.n_trees = 3;
  const auto m = fit_forest(x, two, p);
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(classify(m, wrong), std::invalid_argument);
  CHECK_THROWS_AS(classify(ForestModel{}, wrong), std::logic_error);
}

TEST_CASE("brow raise toggles, vergence does not") {
  const RunConfig cfg;
  const Conditioner cond(cfg.sample_rate, cfg.filter);
  const auto brow = gen_artifact(ArtifactKind::BrowRaise, 3);
  Window w = blank();
  place(w, brow.channels, 0, 300);
  for (auto& ch : w.samples) ch = cond.apply(ch);
  const auto u = update_preamble({}, w, cfg.preamble.threshold_mv);
  CHECK(u.toggled);
  CHECK(u.state.active);
  REQUIRE(u.brow_time);

  const auto big = gesture(GestureLabel(Depth::Far, Depth::Near));
  Window v = blank();
  place(v, big.channels, big.peak_index, 500);
  for (auto& ch : v.samples) ch = cond.apply(ch);
  const auto n = update_preamble({}, v, cfg.preamble.threshold_mv);
  CHECK_FALSE(n.toggled);
  CHECK_FALSE(n.state.active);
}

TEST_CASE("refractory period suppresses a second raise 0.5 s later") {
  Window w = blank();
  for (size_t c = 0; c < 2; ++c) w.samples[c][400] = 300.0;
  PreambleState s;
  const auto first = update_preamble(s, w, 243.0);
  CHECK(first.toggled);
  Window later = w;
  later.start_time = 0.5;
  const auto second = update_preamble(first.state, later, 243.0);
  CHECK_FALSE(second.toggled);
  CHECK(second.state.active);
  Window much_later = w;
  much_later.start_time = 1.0;
  const auto third = update_preamble(second.state, much_later, 243.0);
  CHECK(third.toggled);
  CHECK_FALSE(third.state.active);
}

}
