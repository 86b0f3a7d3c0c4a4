#include "eegclean/recording.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace eegclean {

Eigen::Index Recording::total_samples() const {
  Eigen::Index total = 0;
  for (const auto& t : trials) total += t.cols();
  return total;
}

Eigen::Index Recording::channel_index(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

std::vector<std::string> Recording::present_eog_labels() const {
  std::vector<std::string> out;
  for (const auto& l : labels) {
    if (std::find(eog_labels.begin(), eog_labels.end(), l) != eog_labels.end()) {
      out.push_back(l);
    }
  }
  return out;
}

void Recording::validate() const {
  if (!(fs > 0.0)) throw std::invalid_argument("recording: fs must be > 0");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument("recording: duplicate channel label '" + l + "'");
    }
  }
  for (size_t t = 0; t < trials.size(); ++t) {
    if (trials[t].rows() != n_channels()) {
      throw std::invalid_argument("recording: trial " + std::to_string(t) + " has " +
                                  std::to_string(trials[t].rows()) + " rows, expected " +
                                  std::to_string(labels.size()));
    }
    if (trials[t].cols() < 1) {
      throw std::invalid_argument("recording: trial " + std::to_string(t) + " is empty");
    }
  }
}

Concatenated concatenate_trials(const Recording& rec) {
  if (rec.trials.empty()) throw std::invalid_argument("concatenate_trials: no trials");
  Concatenated cat;
  cat.offsets.reserve(rec.trials.size() + 1);
  cat.offsets.push_back(0);
  for (const auto& t : rec.trials) cat.offsets.push_back(cat.offsets.back() + t.cols());

  cat.data.resize(rec.trials.front().rows(), cat.offsets.back());
  for (size_t t = 0; t < rec.trials.size(); ++t) {
    cat.data.middleCols(cat.offsets[t], rec.trials[t].cols()) = rec.trials[t];
  }
  return cat;
}

Eigen::Index global_column(const Concatenated& cat, TrialIndex idx) {
  const auto n_trials = static_cast<Eigen::Index>(cat.offsets.size()) - 1;
  if (idx.trial < 0 || idx.trial >= n_trials) {
    throw std::out_of_range("trial index out of range");
  }
  const Eigen::Index len = cat.offsets[idx.trial + 1] - cat.offsets[idx.trial];
  if (idx.sample < 0 || idx.sample >= len) {
    throw std::out_of_range("sample index out of range for trial");
  }
  return cat.offsets[idx.trial] + idx.sample;
}

TrialIndex trial_index(const Concatenated& cat, Eigen::Index global) {
  if (global < 0 || global >= cat.offsets.back()) {
    throw std::out_of_range("global column out of range");
  }
  auto it = std::upper_bound(cat.offsets.begin(), cat.offsets.end(), global);
  const auto trial = static_cast<Eigen::Index>(it - cat.offsets.begin()) - 1;
  return TrialIndex{trial, global - cat.offsets[trial]};
}

std::vector<Eigen::MatrixXd> resegment(const Eigen::MatrixXd& data,
                                       const std::vector<Eigen::Index>& offsets) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != data.cols()) {
    throw std::invalid_argument("resegment: offsets do not cover the data");
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(offsets.size() - 1);
  for (size_t t = 0; t + 1 < offsets.size(); ++t) {
    out.push_back(data.middleCols(offsets[t], offsets[t + 1] - offsets[t]));
  }
  return out;
}

Recording select_channels(const Recording& rec, const std::vector<std::string>& pattern) {
  std::set<std::string> keep;
  for (const auto& raw : pattern) {
    if (raw == "all") {
      keep.insert(rec.labels.begin(), rec.labels.end());
    } else if (!raw.empty() && raw[0] == '-') {
      keep.erase(raw.substr(1));  // excluding an absent label is a no-op
    } else {
      if (!rec.has_channel(raw)) {
        throw std::invalid_argument("select_channels: no channel named '" + raw + "'");
      }
      keep.insert(raw);
    }
  }

  Recording out;
  out.fs = rec.fs;
  out.ref_label = rec.ref_label;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < rec.n_channels(); ++i) {
    if (keep.count(rec.labels[i])) {
      rows.push_back(i);
      out.labels.push_back(rec.labels[i]);
    }
  }
  out.eog_labels.clear();
  for (const auto& l : rec.eog_labels) {
    if (keep.count(l)) out.eog_labels.push_back(l);
  }

  out.trials.reserve(rec.trials.size());
  for (const auto& t : rec.trials) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), t.cols());
    for (size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = t.row(rows[r]);
    out.trials.push_back(std::move(m));
  }
  return out;
}

}  // namespace eegclean
