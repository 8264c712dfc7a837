#include "eogv/gate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace eogv {

size_t WindowSpec::length_samples(double sample_rate) const {
  return static_cast<size_t>(std::llround(length_s * sample_rate));
}

size_t WindowSpec::step_samples(double sample_rate) const {
  return static_cast<size_t>(std::llround(step_s * sample_rate));
}

void WindowSpec::validate(double sample_rate) const {
  if (length_samples(sample_rate) == 0 || step_samples(sample_rate) == 0) {
    throw std::invalid_argument("window length and step must be at least one sample");
  }
}

size_t window_count(size_t n, double sample_rate, const WindowSpec& spec) {
  spec.validate(sample_rate);
  const size_t len = spec.length_samples(sample_rate);
  if (n < len) return 0;
  return (n - len) / spec.step_samples(sample_rate) + 1;
}

Window window_at(const Recording& rec, size_t k, const WindowSpec& spec) {
  const size_t len = spec.length_samples(rec.sample_rate);
  const size_t start = k * spec.step_samples(rec.sample_rate);
  if (start + len > rec.size()) throw std::out_of_range("window exceeds recording");
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

std::vector<Window> sliding_windows(const Recording& rec, const WindowSpec& spec) {
  const size_t count = window_count(rec.size(), rec.sample_rate, spec);
  std::vector<Window> out;
  out.reserve(count);
  for (size_t k = 0; k < count; ++k) out.push_back(window_at(rec, k, spec));
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sequence");
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_absolute_deviation(std::span<const double> x) {
  const double m = median({x.begin(), x.end()});
  std::vector<double> dev(x.size());
  for (size_t i = 0; i < x.size(); ++i) dev[i] = std::abs(x[i] - m);
  return median(std::move(dev));
}

GateThreshold baseline_threshold(const Recording& rec, const GateSpec& spec) {
  const size_t n = static_cast<size_t>(std::llround(spec.baseline_s * rec.sample_rate));
  if (n == 0 || rec.size() < n) {
    throw std::invalid_argument("recording is shorter than the " + std::to_string(spec.baseline_s) +
                                " s baseline");
  }
  GateThreshold t;
  for (size_t c = 0; c < 2; ++c) {
    const std::span<const double> base(rec.channels[c].data(), n);
    t.baseline_median[c] = median({base.begin(), base.end()});
    const double mad = median_absolute_deviation(base);
    t.threshold[c] = mad > 0.0 ? spec.mad_multiplier * mad : spec.mad_floor_mv;
  }
  return t;
}

bool is_active(const Window& w, const GateThreshold& t) {
  for (size_t c = 0; c < 2; ++c) {
    for (double v : w.samples[c]) {
      if (std::abs(v - t.baseline_median[c]) > t.threshold[c]) return true;
    }
  }
  return false;
}

const std::array<std::string, kArtifactFeatureCount>& artifact_feature_names() {
  static const std::array<std::string, kArtifactFeatureCount> names = [] {
    const char* base[kArtifactFeaturesPerChannel] = {
        "mean", "max", "min", "band_power", "wavelet_energy", "variance",
        "rms", "peak_to_rms", "trapezoidal_integral", "max_derivative", "min_derivative"};
    std::array<std::string, kArtifactFeatureCount> out;
    for (size_t c = 0; c < 2; ++c)
      for (size_t j = 0; j < kArtifactFeaturesPerChannel; ++j)
        out[c * kArtifactFeaturesPerChannel + j] = std::string(c == 0 ? "left_" : "right_") + base[j];
    return out;
  }();
  return names;
}

double band_power(std::span<const double> x, double sample_rate, double lo_hz, double hi_hz) {
  const size_t n = x.size();
  if (n == 0) return 0.0;
  const double df = sample_rate / static_cast<double>(n);
  const size_t k_lo = static_cast<size_t>(std::ceil(lo_hz / df - 1e-9));
  const size_t k_hi = std::min(static_cast<size_t>(std::floor(hi_hz / df + 1e-9)), n / 2);
  double total = 0.0;
  for (size_t k = k_lo; k <= k_hi; ++k) {
    // Single DFT bin via a rotating phasor.
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const std::complex<double> step = std::polar(1.0, -w);
    std::complex<double> ph{1.0, 0.0};
    std::complex<double> acc{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) {
      acc += x[i] * ph;
      ph *= step;
      if ((i & 255) == 255) ph = std::polar(1.0, -w * static_cast<double>(i + 1));
    }
    // One-sided periodogram density times bin width.
    const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
    const double p = std::norm(acc) / (static_cast<double>(n) * static_cast<double>(n));
    total += edge ? p : 2.0 * p;
  }
  return total;
}

double haar_detail_energy(std::span<const double> x, int levels) {
  std::vector<double> approx(x.begin(), x.end());
  double energy = 0.0;
  const double r = 1.0 / std::numbers::sqrt2;
  for (int lvl = 0; lvl < levels && approx.size() >= 2; ++lvl) {
    const size_t half = approx.size() / 2;
    std::vector<double> next(half);
    for (size_t i = 0; i < half; ++i) {
      const double a = approx[2 * i];
      const double b = approx[2 * i + 1];
      next[i] = (a + b) * r;
      const double d = (a - b) * r;
      energy += d * d;
    }
    approx = std::move(next);
  }
  return energy;
}

ArtifactFeatures artifact_features(const Window& w, const ArtifactFeatureSpec& spec) {
  ArtifactFeatures f{};
  const double fs = w.sample_rate;
  const double dt = 1.0 / fs;
  for (size_t c = 0; c < 2; ++c) {
    const auto& x = w.samples[c];
    const size_t n = x.size();
    double* out = f.data() + c * kArtifactFeaturesPerChannel;
    if (n == 0) continue;

    double sum = 0.0, sumsq = 0.0, mx = x[0], mn = x[0], peak = 0.0, trap = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sum += x[i];
      sumsq += x[i] * x[i];
      mx = std::max(mx, x[i]);
      mn = std::min(mn, x[i]);
      peak = std::max(peak, std::abs(x[i]));
      if (i + 1 < n) trap += 0.5 * (x[i] + x[i + 1]) * dt;
    }
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double rms = std::sqrt(sumsq / static_cast<double>(n));

    double dmax = 0.0, dmin = 0.0;
    if (n >= 2) {
      dmax = dmin = (x[1] - x[0]) * fs;
      for (size_t i = 1; i + 1 < n; ++i) {
        const double d = (x[i + 1] - x[i]) * fs;
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
      }
    }

    out[0] = mean;
    out[1] = mx;
    out[2] = mn;
    out[3] = band_power(x, fs, spec.band_lo_hz, spec.band_hi_hz);
    out[4] = haar_detail_energy(x, spec.wavelet_levels);
    out[5] = var;
    out[6] = rms;
    out[7] = rms > 0.0 ? peak / rms : 1.0;
    out[8] = trap;
    out[9] = dmax;
    out[10] = dmin;
  }
  return f;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

} // namespace

ArtifactModel fit_artifact_model(std::span<const ArtifactFeatures> features,
                                 std::span<const WindowClass> labels, const LogisticOptions& opt) {
  if (features.size() != labels.size()) throw std::invalid_argument("features and labels differ in length");
  const size_t n = features.size();
  size_t n_pos = 0;
  for (size_t i = 0; i < n; ++i) {
    for (double v : features[i]) {
      if (!std::isfinite(v)) throw std::invalid_argument("artifact features must be finite");
    }
    if (labels[i] == WindowClass::Vergence) ++n_pos;
  }
  if (n_pos == 0 || n_pos == n) throw std::invalid_argument("artifact training set needs both classes");

  std::vector<std::vector<double>> rows(n);
  for (size_t i = 0; i < n; ++i) rows[i].assign(features[i].begin(), features[i].end());

  ArtifactModel m;
  m.norm = zscore_fit(rows);
  const size_t d = kArtifactFeatureCount;
  const Eigen::Index dim = static_cast<Eigen::Index>(d + 1);  // last entry is the bias

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), dim);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sw(static_cast<Eigen::Index>(n));
  const double w_pos = opt.balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n_pos)) : 1.0;
  const double w_neg = opt.balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos)) : 1.0;
  for (size_t i = 0; i < n; ++i) {
    const auto z = zscore_apply(m.norm, rows[i]);
    const auto r = static_cast<Eigen::Index>(i);
    for (size_t j = 0; j < d; ++j) x(r, static_cast<Eigen::Index>(j)) = z[j];
    x(r, dim - 1) = 1.0;
    const bool pos = labels[i] == WindowClass::Vergence;
    y(r) = pos ? 1.0 : 0.0;
    sw(r) = pos ? w_pos : w_neg;
  }
  const double wsum = sw.sum();

  Eigen::VectorXd reg = Eigen::VectorXd::Constant(dim, opt.l2);
  reg(dim - 1) = 0.0;

  auto loss = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = x * beta;
    double l = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) l += sw(i) * (softplus(z(i)) - y(i) * z(i));
    return l / wsum + 0.5 * beta.cwiseProduct(reg).dot(beta);
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dim);
  double f = loss(beta);
  int it = 0;
  double gnorm = 0.0;
  for (; it < opt.max_iter; ++it) {
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd resid(z.size()), curv(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z(i));
      resid(i) = sw(i) * (p - y(i));
      curv(i) = sw(i) * p * (1.0 - p);
    }
    const Eigen::VectorXd grad = x.transpose() * resid / wsum + reg.cwiseProduct(beta);
    gnorm = grad.norm();
    if (gnorm < opt.tol) break;
    Eigen::MatrixXd hess = x.transpose() * curv.asDiagonal() * x / wsum;
    hess.diagonal() += reg;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    // Backtracking keeps Newton stable on nearly separable data.
    double t = 1.0;
    Eigen::VectorXd cand = beta - step;
    double fc = loss(cand);
    const double slope = grad.dot(step);
    while (fc > f - 1e-4 * t * slope && t > 1e-10) {
      t *= 0.5;
      cand = beta - t * step;
      fc = loss(cand);
    }
    if (fc >= f && t <= 1e-10) break;  // no further progress possible in floating point
    beta = cand;
    f = fc;
  }

  m.weights.assign(beta.data(), beta.data() + d);
  m.bias = beta(dim - 1);
  m.iterations = it;
  m.gradient_norm = gnorm;
  return m;
}

WindowDecision classify_window(const ArtifactModel& m, const ArtifactFeatures& f) {
  if (!m.fitted()) throw std::logic_error("artifact model is not fitted");
  if (m.weights.size() != f.size()) throw std::invalid_argument("artifact feature dimension mismatch");
  const auto z = zscore_apply(m.norm, std::span<const double>(f.data(), f.size()));
  double s = m.bias;
  for (size_t j = 0; j < z.size(); ++j) s += m.weights[j] * z[j];
  const double p = sigmoid(s);
  return {p > 0.5 ? WindowClass::Vergence : WindowClass::Noise, p};
}

} // namespace eogv
