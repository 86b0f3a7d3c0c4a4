#pragma once

#include "eegclean/recording.hpp"

#include <cstdint>
#include <vector>

namespace eegclean {

struct BlinkSpec {
  int count = 5;
  double width_s = 0.3;
  double amplitude_uv = 200.0;
};

// Knobs for the deterministic contaminated-EEG generator. n_channels counts
// the EEG channels; a VEOG/HEOG pair is appended after them.
struct SynthSpec {
  int n_channels = 6;
  double fs = 500.0;
  double duration_s = 20.0;
  int n_sources = 4;
  BlinkSpec blink;
  double noise_std_uv = 2.0;
  std::uint32_t seed = 42;
};

// Everything a test needs to score a cleaning run against ground truth.
// EEG rows satisfy X = mixing * [sources; blink_template] + sensor noise;
// the last mixing column is the frontal-weighted blink leakage.
struct SynthTruth {
  Eigen::MatrixXd sources;         // n_sources x T, unit variance
  Eigen::VectorXd blink_template;  // T, in uV
  Eigen::MatrixXd mixing;          // n_channels x (n_sources + 1)
  std::vector<std::uint8_t> blink_mask;  // T, 1 inside a pulse window
};

struct SynthResult {
  Recording recording;
  SynthTruth truth;
};

// Brain sources are sinusoids (6-14 Hz, seeded frequency/phase) plus
// 1/f-shaped noise; blinks are raised-cosine pulses at seeded non-overlapping
// times, leaked dominantly into the first three (frontal) channels; the EOG
// pair carries the blink source plus sensor noise. Identical spec+seed gives
// bit-identical output. Throws when the requested blinks cannot fit.
SynthResult synth_contaminated_recording(const SynthSpec& spec);

}  // namespace eegclean
