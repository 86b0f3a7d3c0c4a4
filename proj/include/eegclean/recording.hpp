#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace eegclean {

// Labeled, trial-segmented multichannel time series. Values are microvolts.
// Immutable by convention once built: every operation returns a new Recording.
struct Recording {
  std::vector<std::string> labels;
  double fs = 0.0;  // Hz
  std::vector<Eigen::MatrixXd> trials;  // each n_channels x n_samples_t
  std::vector<std::string> eog_labels = {"VEOG", "HEOG"};
  std::optional<std::string> ref_label;

  Eigen::Index n_channels() const { return static_cast<Eigen::Index>(labels.size()); }
  Eigen::Index n_trials() const { return static_cast<Eigen::Index>(trials.size()); }
  Eigen::Index total_samples() const;

  // Index of a label, or -1 when absent.
  Eigen::Index channel_index(const std::string& label) const;
  bool has_channel(const std::string& label) const { return channel_index(label) >= 0; }

  // EOG labels actually present in this recording, in label order.
  std::vector<std::string> present_eog_labels() const;

  // Throws std::invalid_argument on a violated invariant (row-count mismatch,
  // duplicate labels, fs <= 0, empty trial, eog label not in labels).
  void validate() const;
};

struct TrialIndex {
  Eigen::Index trial = 0;
  Eigen::Index sample = 0;
};

// Column-wise concatenation of all trials, with the segmentation boundaries
// needed to invert it. offsets has n_trials+1 entries; offsets[0] == 0.
struct Concatenated {
  Eigen::MatrixXd data;  // n_channels x total_samples
  std::vector<Eigen::Index> offsets;
};

Concatenated concatenate_trials(const Recording& rec);

// Global concatenated column of (trial, sample) and its inverse.
Eigen::Index global_column(const Concatenated& cat, TrialIndex idx);
TrialIndex trial_index(const Concatenated& cat, Eigen::Index global);

// Split a matrix back into per-trial blocks using stored boundaries.
std::vector<Eigen::MatrixXd> resegment(const Eigen::MatrixXd& data,
                                       const std::vector<Eigen::Index>& offsets);

// Channel-selection pattern: "all" includes everything, "-Name" excludes,
// a bare name includes it. Result keeps the original channel order.
// Throws std::invalid_argument when an explicit include names an unknown label.
Recording select_channels(const Recording& rec, const std::vector<std::string>& pattern);

}  // namespace eegclean
