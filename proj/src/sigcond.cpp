#include "eogv/sigcond.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eogv {

namespace {

using cd = std::complex<double>;

// Steady-state TDF-II state of each section for a unit constant input.
std::vector<std::array<double, 2>> steady_state(const Sos& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double u = 1.0;
  for (size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    const double g = s.dc_gain();
    zi[k] = {(g - s.b0) * u, (s.b2 - s.a2 * g) * u};
    u *= g;
  }
  return zi;
}

void run_sections(const Sos& sos, std::vector<double>& x,
                  std::vector<std::array<double, 2>> state) {
  for (size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    double s1 = state[k][0];
    double s2 = state[k][1];
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

Recording map_channels(const Recording& rec, const auto& fn) {
  Recording out;
  out.sample_rate = rec.sample_rate;
  out.start_time = rec.start_time;
  for (size_t c = 0; c < 2; ++c) out.channels[c] = fn(std::span<const double>(rec.channels[c]));
  return out;
}

void require_nonempty(const Recording& rec) {
  rec.validate();
  if (rec.empty()) throw std::invalid_argument("cannot filter an empty recording");
}

} // namespace

void FilterSpec::validate(double sample_rate) const {
  const double nyquist = sample_rate / 2.0;
  if (lowpass_order < 1) throw std::invalid_argument("low-pass order must be >= 1");
  if (!(lowpass_cutoff_hz > 0.0 && lowpass_cutoff_hz < nyquist)) {
    throw std::domain_error("low-pass cutoff must lie in (0, sample_rate/2)");
  }
  if (!(notch_hz > 0.0 && notch_hz < nyquist)) {
    throw std::domain_error("notch frequency must lie in (0, sample_rate/2)");
  }
  if (!(notch_q > 0.0)) throw std::domain_error("notch Q must be positive");
  if (savgol_order < 0) throw std::invalid_argument("smoother order must be >= 0");
  if (savgol_window % 2 == 0) {
    throw std::invalid_argument("smoother window must be odd; use " +
                                std::to_string(savgol_window + 1) + " instead of " +
                                std::to_string(savgol_window));
  }
  if (savgol_window <= savgol_order) {
    throw std::invalid_argument("smoother window must exceed the polynomial order");
  }
}

Sos butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
  if (order < 1) throw std::invalid_argument("filter order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0)) {
    throw std::domain_error("cutoff must lie in (0, sample_rate/2)");
  }
  const double fs2 = 2.0 * sample_rate;
  const double warped = fs2 * std::tan(std::numbers::pi * cutoff_hz / sample_rate);

  Sos sos;
  // Analog poles in the left half plane; conjugate pairs k and order-1-k.
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    const cd s = warped * std::polar(1.0, theta);
    const cd z = (fs2 + s) / (fs2 - s);
    Biquad b;
    b.a1 = -2.0 * z.real();
    b.a2 = std::norm(z);
    const double g = (1.0 + b.a1 + b.a2) / 4.0;
    b.b0 = g;
    b.b1 = 2.0 * g;
    b.b2 = g;
    sos.push_back(b);
  }
  if (order % 2 == 1) {
    const double s = -warped;
    const double z = (fs2 + s) / (fs2 - s);
    Biquad b;
    b.a1 = -z;
    const double g = (1.0 - z) / 2.0;
    b.b0 = g;
    b.b1 = g;
    sos.push_back(b);
  }
  return sos;
}

Biquad notch_biquad(double f0_hz, double q, double sample_rate) {
  if (!(f0_hz > 0.0 && f0_hz < sample_rate / 2.0)) {
    throw std::domain_error("notch frequency must lie in (0, sample_rate/2)");
  }
  if (!(q > 0.0)) throw std::domain_error("notch Q must be positive");
  const double w0 = 2.0 * std::numbers::pi * f0_hz / sample_rate;
  const double beta = std::tan(w0 / q / 2.0);
  const double gain = 1.0 / (1.0 + beta);
  const double c = std::cos(w0);
  Biquad b;
  b.b0 = gain;
  b.b1 = -2.0 * gain * c;
  b.b2 = gain;
  b.a1 = -2.0 * gain * c;
  b.a2 = 2.0 * gain - 1.0;
  return b;
}

std::complex<double> frequency_response(const Sos& sos, double f_hz, double sample_rate) {
  const cd zinv = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / sample_rate);
  cd h{1.0, 0.0};
  for (const Biquad& s : sos) {
    const cd num = s.b0 + zinv * (s.b1 + zinv * s.b2);
    const cd den = 1.0 + zinv * (s.a1 + zinv * s.a2);
    h *= num / den;
  }
  return h;
}

std::vector<double> sos_filter(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_sections(sos, y, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
  return y;
}

std::vector<double> filtfilt(const Sos& sos, std::span<const double> x, size_t padlen) {
  const size_t n = x.size();
  if (n <= padlen) {
    throw std::invalid_argument("input of " + std::to_string(n) + " samples is too short; need at least " +
                                std::to_string(padlen + 1));
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = steady_state(sos);
  auto scaled = [&](double v) {
    auto z = zi;
    for (auto& s : z) { s[0] *= v; s[1] *= v; }
    return z;
  };

  run_sections(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_sections(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
          ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

SavgolFilter::SavgolFilter(int window, int order) : window_(window), order_(order) {
  if (window % 2 == 0) {
    throw std::invalid_argument("smoother window must be odd; use " + std::to_string(window + 1) +
                                " instead of " + std::to_string(window));
  }
  if (order < 0 || window <= order) {
    throw std::invalid_argument("smoother window must exceed the polynomial order");
  }
  const int half = window / 2;
  const double scale = half > 0 ? 1.0 / half : 1.0;
  Eigen::MatrixXd vander(window, order + 1);
  for (int i = 0; i < window; ++i) {
    const double t = (i - half) * scale;
    double p = 1.0;
    for (int j = 0; j <= order; ++j) {
      vander(i, j) = p;
      p *= t;
    }
  }
  // Hat matrix of the least-squares fit: Q Q^T for the thin Q of the basis.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(window, order + 1);
  const Eigen::MatrixXd hat = q * q.transpose();
  projection_.resize(static_cast<size_t>(window) * window);
  for (int i = 0; i < window; ++i)
    for (int j = 0; j < window; ++j) projection_[static_cast<size_t>(i) * window + j] = hat(i, j);
}

std::span<const double> SavgolFilter::kernel() const {
  const size_t w = static_cast<size_t>(window_);
  return std::span<const double>(projection_).subspan((w / 2) * w, w);
}

std::vector<double> SavgolFilter::apply(std::span<const double> x) const {
  const size_t n = x.size();
  const size_t w = static_cast<size_t>(window_);
  const size_t half = w / 2;
  if (n < w) {
    throw std::invalid_argument("signal of " + std::to_string(n) + " samples is shorter than the smoother window " +
                                std::to_string(w));
  }
  std::vector<double> y(n);
  auto dot_row = [&](size_t row, size_t offset) {
    const double* r = projection_.data() + row * w;
    double acc = 0.0;
    for (size_t j = 0; j < w; ++j) acc += r[j] * x[offset + j];
    return acc;
  };
  for (size_t i = 0; i < half; ++i) y[i] = dot_row(i, 0);
  for (size_t i = half; i + half < n; ++i) y[i] = dot_row(half, i - half);
  for (size_t i = n - half; i < n; ++i) y[i] = dot_row(i - (n - w), n - w);
  return y;
}

std::vector<double> savgol(std::span<const double> x, int window, int order) {
  return SavgolFilter(window, order).apply(x);
}

Conditioner::Conditioner(double sample_rate, const FilterSpec& spec)
    : sample_rate_(sample_rate), spec_(spec) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  spec.validate(sample_rate);
  lowpass_ = butterworth_lowpass(spec.lowpass_order, spec.lowpass_cutoff_hz, sample_rate);
  notch_ = {notch_biquad(spec.notch_hz, spec.notch_q, sample_rate)};
}

size_t Conditioner::min_length() const { return 3 * static_cast<size_t>(spec_.lowpass_order); }

std::vector<double> Conditioner::lowpass(std::span<const double> x) const {
  if (x.size() < min_length()) {
    throw std::invalid_argument("low-pass needs at least " + std::to_string(min_length()) +
                                " samples, got " + std::to_string(x.size()));
  }
  const size_t padlen = std::min(3 * static_cast<size_t>(spec_.lowpass_order), x.size() - 1);
  return filtfilt(lowpass_, x, padlen);
}

std::vector<double> Conditioner::notch(std::span<const double> x) const {
  if (x.size() < 2) throw std::invalid_argument("notch needs at least 2 samples");
  const size_t padlen = std::min<size_t>(6, x.size() - 1);
  return filtfilt(notch_, x, padlen);
}

std::vector<double> Conditioner::apply(std::span<const double> x) const {
  const auto y = lowpass(x);
  return notch(y);
}

Recording lowpass_zero_phase(const Recording& rec, const FilterSpec& spec) {
  require_nonempty(rec);
  const Conditioner cond(rec.sample_rate, spec);
  return map_channels(rec, [&](std::span<const double> x) { return cond.lowpass(x); });
}

Recording notch(const Recording& rec, const FilterSpec& spec) {
  require_nonempty(rec);
  const Conditioner cond(rec.sample_rate, spec);
  return map_channels(rec, [&](std::span<const double> x) { return cond.notch(x); });
}

Recording condition(const Recording& rec, const FilterSpec& spec) {
  require_nonempty(rec);
  const Conditioner cond(rec.sample_rate, spec);
  return map_channels(rec, [&](std::span<const double> x) { return cond.apply(x); });
}

} // namespace eogv
