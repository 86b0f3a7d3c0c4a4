#include "eegclean/msf.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/preprocess.hpp"
#include "eegclean/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace eegclean {

Eigen::Index Msf::total_samples() const {
  Eigen::Index total = 0;
  for (const auto& t : trials) total += t.size();
  return total;
}

Eigen::Index Msf::flagged_samples() const {
  Eigen::Index count = 0;
  for (const auto& t : trials) count += (t.array() > 0.0).count();
  return count;
}

void Msf::validate_against(const Recording& rec) const {
  if (static_cast<Eigen::Index>(trials.size()) != rec.n_trials()) {
    throw std::invalid_argument("msf: " + std::to_string(trials.size()) + " trials vs recording's " +
                                std::to_string(rec.trials.size()));
  }
  for (size_t t = 0; t < trials.size(); ++t) {
    if (trials[t].size() != rec.trials[t].cols()) {
      throw std::invalid_argument("msf: trial " + std::to_string(t) + " has " +
                                  std::to_string(trials[t].size()) + " weights, recording has " +
                                  std::to_string(rec.trials[t].cols()) + " samples");
    }
    if ((trials[t].array() < 0.0).any() || (trials[t].array() > 1.0).any()) {
      throw std::invalid_argument("msf: weights outside [0,1] in trial " + std::to_string(t));
    }
  }
}

std::vector<Eigen::VectorXd> zvalue_trace(const Recording& eog, const DetectConfig& cfg,
                                          std::vector<std::string>* warnings) {
  if (cfg.channels.empty()) throw std::invalid_argument("zvalue: no detection channels given");
  const double root_n = std::sqrt(static_cast<double>(cfg.channels.size()));

  std::vector<Eigen::VectorXd> combined;
  combined.reserve(eog.trials.size());
  for (const auto& t : eog.trials) combined.push_back(Eigen::VectorXd::Zero(t.cols()));

  for (const auto& name : cfg.channels) {
    const Eigen::Index c = eog.channel_index(name);
    if (c < 0) throw std::invalid_argument("zvalue: no channel named '" + name + "'");

    // Band-passed, rectified amplitude per trial. The trial mean is removed
    // first; the band-pass blocks DC anyway, and this keeps a constant
    // channel at exactly zero output rather than a start-up transient.
    std::vector<Eigen::VectorXd> rectified;
    double sum = 0.0;
    double sum_sq = 0.0;
    Eigen::Index count = 0;
    for (const auto& trial : eog.trials) {
      Eigen::VectorXd x = trial.row(c);
      x.array() -= x.mean();
      Eigen::VectorXd bp = butterworth_bandpass(x, eog.fs, cfg.band_lo_hz, cfg.band_hi_hz,
                                                cfg.order, FilterDirection::twopass);
      bp = bp.cwiseAbs();
      sum += bp.sum();
      sum_sq += bp.squaredNorm();
      count += bp.size();
      rectified.push_back(std::move(bp));
    }

    const double mean = sum / static_cast<double>(count);
    const double var = count > 1
        ? std::max(0.0, (sum_sq - static_cast<double>(count) * mean * mean) /
                            static_cast<double>(count - 1))
        : 0.0;
    const double stddev = std::sqrt(var);
    if (!(stddev > 0.0)) {
      if (warnings) {
        warnings->push_back("zvalue: channel '" + name +
                            "' has zero pooled variance; it contributes z = 0");
      }
      continue;
    }
    for (size_t t = 0; t < rectified.size(); ++t) {
      combined[t] += (rectified[t].array() - mean).matrix() / stddev;
    }
  }

  for (auto& z : combined) z /= root_n;
  return combined;
}

std::vector<Eigen::VectorXd> threshold_and_pad(const std::vector<Eigen::VectorXd>& z,
                                               double cutoff, double pad_s, double fs) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("threshold: cutoff must be > 0");
  if (pad_s < 0.0) throw std::invalid_argument("threshold: pad must be >= 0");
  const auto pad = static_cast<Eigen::Index>(std::llround(pad_s * fs));

  std::vector<Eigen::VectorXd> masks;
  masks.reserve(z.size());
  for (const auto& trace : z) {
    const Eigen::Index n = trace.size();
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(n);
    Eigen::Index i = 0;
    while (i < n) {
      if (trace[i] > cutoff) {
        Eigen::Index j = i;
        while (j < n && trace[j] > cutoff) ++j;
        const Eigen::Index a = std::max<Eigen::Index>(0, i - pad);
        const Eigen::Index b = std::min(n, j + pad);
        mask.segment(a, b - a).setOnes();  // overlapping runs merge
        i = j;
      } else {
        ++i;
      }
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

Msf create_msf(const Recording& rec, const DetectConfig& cfg,
               std::vector<std::string>* warnings) {
  if (cfg.trial_pad_s != 0.0) {
    throw std::invalid_argument("detect: trial padding is restricted to 0");
  }
  std::vector<std::string> missing;
  for (const auto& name : cfg.channels) {
    if (!rec.has_channel(name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "detect: recording lacks detection channels:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }

  Msf msf;
  msf.fs = rec.fs;
  msf.source_channels = cfg.channels;
  msf.trials = threshold_and_pad(zvalue_trace(rec, cfg, warnings), cfg.cutoff,
                                 cfg.artifact_pad_s, rec.fs);
  return msf;
}

Msf msf_to_weights(const Msf& msf, MsfWeightMode mode, double ramp_s) {
  for (const auto& t : msf.trials) {
    if (((t.array() != 0.0) && (t.array() != 1.0)).any()) {
      throw std::invalid_argument("msf_to_weights: input must be binary");
    }
  }
  if (mode == MsfWeightMode::binary) return msf;
  if (!(ramp_s >= 0.0)) throw std::invalid_argument("msf_to_weights: ramp must be >= 0");

  const auto ramp = static_cast<Eigen::Index>(std::llround(ramp_s * msf.fs));
  Msf out = msf;
  for (size_t t = 0; t < msf.trials.size(); ++t) {
    const Eigen::VectorXd& mask = msf.trials[t];
    Eigen::VectorXd& w = out.trials[t];
    const Eigen::Index n = mask.size();
    Eigen::Index i = 0;
    while (i < n) {
      if (mask[i] == 1.0) {
        Eigen::Index j = i;
        while (j < n && mask[j] == 1.0) ++j;
        // Rising ramp over [i - ramp, i), falling over [j, j + ramp);
        // overlaps with neighbouring runs resolve by pointwise max.
        for (Eigen::Index r = 1; r <= ramp; ++r) {
          const double v = static_cast<double>(r) / static_cast<double>(ramp + 1);
          const Eigen::Index rise = i - (ramp + 1 - r);
          if (rise >= 0) w[rise] = std::max(w[rise], v);
          const Eigen::Index fall = j + r - 1;
          if (fall < n) w[fall] = std::max(w[fall], 1.0 - v);
        }
        i = j;
      } else {
        ++i;
      }
    }
  }
  return out;
}

void save_msf(const Msf& msf, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("msf: cannot write '" + path + "'");
  for (const auto& t : msf.trials) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (i) f << ',';
      f << format_double(t[i]);
    }
    f << '\n';
  }
  if (!f) throw io_error("msf: write to '" + path + "' failed");
}

Msf load_msf(const std::string& path, double fs) {
  std::ifstream f(path);
  if (!f) throw io_error("msf: cannot open '" + path + "'");
  Msf msf;
  msf.fs = fs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    Eigen::VectorXd row(static_cast<Eigen::Index>(cells.size()));
    for (size_t i = 0; i < cells.size(); ++i) {
      try {
        row[static_cast<Eigen::Index>(i)] = parse_double_strict(cells[i]);
      } catch (const std::exception& e) {
        throw io_error("msf: line " + std::to_string(lineno) + " in '" + path + "': " + e.what());
      }
      const double v = row[static_cast<Eigen::Index>(i)];
      if (v < 0.0 || v > 1.0) {
        throw io_error("msf: weight " + format_double(v) + " outside [0,1] in '" + path + "'");
      }
    }
    msf.trials.push_back(std::move(row));
  }
  if (msf.trials.empty()) throw io_error("msf: '" + path + "' contains no rows");
  return msf;
}

}  // namespace eegclean
