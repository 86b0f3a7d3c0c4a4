#pragma once

#include "eegclean/recording.hpp"

#include <string>
#include <vector>

namespace eegclean {

// Artifact membership function: one weight in [0,1] per sample, mirroring the
// companion Recording's trial structure. Binary in the base methods; the
// weighting extension admits fractional values.
struct Msf {
  std::vector<Eigen::VectorXd> trials;
  double fs = 0.0;
  std::vector<std::string> source_channels;

  Eigen::Index n_trials() const { return static_cast<Eigen::Index>(trials.size()); }
  Eigen::Index total_samples() const;
  Eigen::Index flagged_samples() const;  // count of weights > 0

  // Throws std::invalid_argument when trial lengths differ from rec's or a
  // weight leaves [0,1].
  void validate_against(const Recording& rec) const;
};

struct DetectConfig {
  std::vector<std::string> channels = {"VEOG", "HEOG"};
  double cutoff = 0.5;        // z threshold
  double band_lo_hz = 2.0;
  double band_hi_hz = 15.0;
  int order = 3;              // Butterworth order
  double artifact_pad_s = 0.1;
  double trial_pad_s = 0.0;   // accepted but restricted to 0
};

// Per-channel: band-pass (twopass), rectify, z-score with mean/std pooled
// over all trials; channels combine as sum(z_c)/sqrt(n_channels). Each trial
// is mean-subtracted before filtering, so a constant channel has exactly zero
// pooled variance and contributes z == 0 (with a warning pushed to
// `warnings` when given).
std::vector<Eigen::VectorXd> zvalue_trace(const Recording& eog, const DetectConfig& cfg,
                                          std::vector<std::string>* warnings = nullptr);

// mask = z > cutoff, each run of 1s widened by round(pad_s * fs) samples per
// side, clamped to the trial; overlapping runs merge.
std::vector<Eigen::VectorXd> threshold_and_pad(const std::vector<Eigen::VectorXd>& z,
                                               double cutoff, double pad_s, double fs);

// The full detector: zvalue_trace then threshold_and_pad, yielding a binary
// Msf matching rec's trial structure. Errors if a detection channel is
// missing (names it) or trial_pad_s != 0.
Msf create_msf(const Recording& rec, const DetectConfig& cfg,
               std::vector<std::string>* warnings = nullptr);

enum class MsfWeightMode { binary, linear_ramp };

// binary: identity. linear_ramp: each 0->1 and 1->0 edge of a binary mask is
// replaced by a linear ramp of ramp_s seconds rising into / falling out of
// the flagged run; overlapping ramps combine by pointwise max.
Msf msf_to_weights(const Msf& msf, MsfWeightMode mode, double ramp_s = 0.0);

// CSV round-trip: one row of weights per trial.
void save_msf(const Msf& msf, const std::string& path);
Msf load_msf(const std::string& path, double fs);

}  // namespace eegclean
