#pragma once

#include "eegclean/recording.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eegclean {

enum class FilterDirection { onepass, twopass };
enum class FirKind { lowpass, highpass };

// Conditioning chain settings. Cutoffs are validated against fs at apply
// time: each must lie in (0, fs/2), and lp_cutoff_hz > hp_cutoff_hz when
// both are set.
struct PreprocessConfig {
  bool demean = false;
  bool detrend = false;
  std::optional<std::string> ref_label;
  std::optional<double> lp_cutoff_hz;
  std::optional<double> hp_cutoff_hz;
  FilterDirection direction = FilterDirection::twopass;
};

// Per channel, per trial mean subtraction.
Recording demean(const Recording& rec);

// Per channel, per trial least-squares line subtraction. A single-sample
// trial cannot define a line and is an error.
Recording detrend_linear(const Recording& rec);

// Subtract the named channel from every channel (the reference itself
// becomes zero).
Recording rereference(const Recording& rec, const std::string& ref_label);

// Hamming-windowed sinc taps, odd length order+1, order even. Lowpass taps
// sum to 1; the highpass is its spectral inversion and sums to 0.
Eigen::VectorXd design_fir_taps(FirKind kind, double fs, double cutoff_hz, int order);

// Order rule: 3*floor(fs/cutoff) rounded up to even, capped by the shortest
// trial (min_trial_len - 1, rounded down to even). Throws when no usable
// order remains (trials shorter than 3 samples).
int fir_order_for(double fs, double cutoff_hz, Eigen::Index min_trial_len);

// Windowed-sinc FIR across all channels and trials. Trials are mirror-padded
// by one filter length, filtered, and trimmed back. Both directions are
// aligned (the symmetric taps' integer group delay is compensated); twopass
// additionally runs forward then backward, squaring the magnitude response.
Recording filter_fir(const Recording& rec, FirKind kind, double cutoff_hz,
                     FilterDirection direction = FilterDirection::twopass);

// One biquad of a second-order-section cascade, direct form II transposed.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Butterworth band-pass of the given analog prototype order, designed by the
// bilinear transform with frequency pre-warping; the band edges land exactly
// on the -3 dB points. Throws on an unstable realization (pole radius >= 1).
std::vector<Biquad> design_butterworth_bandpass(double fs, double f_lo, double f_hi, int order);

// Apply the cascade to one channel. onepass is causal with zero initial
// state; twopass runs forward then time-reversed (zero phase) with odd-mirror
// end extensions to suppress edge transients.
Eigen::VectorXd butterworth_bandpass(const Eigen::VectorXd& x, double fs, double f_lo,
                                     double f_hi, int order,
                                     FilterDirection direction = FilterDirection::twopass);

// Fixed stage order: re-reference, demean, detrend, low-pass, high-pass.
Recording preprocess_pipeline(const Recording& rec, const PreprocessConfig& cfg);

}  // namespace eegclean
