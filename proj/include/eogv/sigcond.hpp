#pragma once

#include "eogv/recording.hpp"

#include <complex>
#include <span>
#include <vector>

namespace eogv {

struct FilterSpec {
  int lowpass_order{3};
  double lowpass_cutoff_hz{10.0};
  double notch_hz{60.0};
  double notch_q{30.0};
  // Symmetric smoother needs an odd length; 251 samples is 0.5 s at 500 Hz.
  int savgol_window{251};
  int savgol_order{3};

  void validate(double sample_rate) const;
};

// One second-order section, a0 == 1. First-order sections leave b2 = a2 = 0.
struct Biquad {
  double b0{1.0}, b1{0.0}, b2{0.0};
  double a1{0.0}, a2{0.0};

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

using Sos = std::vector<Biquad>;

// Digital Butterworth low-pass via the bilinear transform with prewarping.
// Each section is normalised to unit DC gain.
Sos butterworth_lowpass(int order, double cutoff_hz, double sample_rate);

// Second-order IIR notch with quality factor q (bandwidth f0 / q).
Biquad notch_biquad(double f0_hz, double q, double sample_rate);

std::complex<double> frequency_response(const Sos& sos, double f_hz, double sample_rate);

// Causal cascade, zero initial state.
std::vector<double> sos_filter(const Sos& sos, std::span<const double> x);

// Forward-backward filtering with odd reflection of `padlen` samples at both
// ends and steady-state initial conditions. Requires x.size() > padlen.
std::vector<double> filtfilt(const Sos& sos, std::span<const double> x, size_t padlen);

// Least-squares polynomial smoother. Interior samples use the centred
// kernel; the first and last window/2 samples are evaluated from the
// polynomial fitted to the first/last full window, so polynomials of degree
// <= order are reproduced everywhere.
class SavgolFilter {
public:
  SavgolFilter(int window, int order);

  int window() const { return window_; }
  int order() const { return order_; }
  // Centred kernel; sum of squares is the white-noise variance gain.
  std::span<const double> kernel() const;

  std::vector<double> apply(std::span<const double> x) const;

private:
  int window_;
  int order_;
  std::vector<double> projection_;  // window x window, row-major
};

std::vector<double> savgol(std::span<const double> x, int window, int order);

// Low-pass then notch, both zero-phase, for a single channel at a fixed rate.
// Designs the sections once so per-window use is cheap.
class Conditioner {
public:
  Conditioner(double sample_rate, const FilterSpec& spec);

  const Sos& lowpass_sections() const { return lowpass_; }
  const Sos& notch_sections() const { return notch_; }

  // Minimum input length accepted by lowpass().
  size_t min_length() const;

  std::vector<double> lowpass(std::span<const double> x) const;
  std::vector<double> notch(std::span<const double> x) const;
  std::vector<double> apply(std::span<const double> x) const;

private:
  double sample_rate_;
  FilterSpec spec_;
  Sos lowpass_;
  Sos notch_;
};

Recording lowpass_zero_phase(const Recording& rec, const FilterSpec& spec);
Recording notch(const Recording& rec, const FilterSpec& spec);
Recording condition(const Recording& rec, const FilterSpec& spec);

} // namespace eogv
