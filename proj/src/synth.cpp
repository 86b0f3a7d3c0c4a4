#include "eegclean/synth.hpp"

#include "eegclean/util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eegclean {

namespace {

const char* kLabelBank[] = {"Fp1", "Fp2", "F3", "F4", "Fz", "C3", "C4", "Cz", "P3", "P4",
                            "Pz",  "O1",  "O2", "F7", "F8", "T7", "T8", "P7", "P8", "Oz"};

constexpr double kBrainAmpUv = 8.0;

void validate(const SynthSpec& spec) {
  if (spec.n_channels < 1 || spec.n_sources < 1) {
    throw std::invalid_argument("synth: channel and source counts must be positive");
  }
  if (!(spec.fs > 0.0) || !(spec.duration_s > 0.0)) {
    throw std::invalid_argument("synth: fs and duration must be positive");
  }
  if (spec.blink.count < 0 || !(spec.blink.width_s > 0.0) || spec.blink.amplitude_uv < 0.0) {
    throw std::invalid_argument("synth: bad blink spec");
  }
  if (!(spec.blink.width_s < spec.duration_s)) {
    throw std::invalid_argument("synth: blink width must be shorter than the recording");
  }
  if (spec.noise_std_uv < 0.0) throw std::invalid_argument("synth: noise std must be >= 0");
}

// Seeded non-overlapping pulse onsets, ascending.
std::vector<double> blink_times(const SynthSpec& spec, std::mt19937& rng) {
  const double gap = 1.25 * spec.blink.width_s;
  const double usable = spec.duration_s - spec.blink.width_s;
  if (spec.blink.count * gap > usable) {
    throw std::invalid_argument("synth: " + std::to_string(spec.blink.count) + " blinks of " +
                                format_double(spec.blink.width_s) + " s cannot fit in " +
                                format_double(spec.duration_s) + " s without overlap");
  }
  std::vector<double> times;
  int attempts = 0;
  while (static_cast<int>(times.size()) < spec.blink.count) {
    if (++attempts > 100000) {
      throw std::invalid_argument("synth: failed to place non-overlapping blinks");
    }
    const double t = uniform_in(rng, 0.0, usable);
    bool ok = true;
    for (double other : times) {
      if (std::abs(t - other) < gap) {
        ok = false;
        break;
      }
    }
    if (ok) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

SynthResult synth_contaminated_recording(const SynthSpec& spec) {
  validate(spec);
  std::mt19937 rng(spec.seed);
  const auto t_total = static_cast<Eigen::Index>(std::llround(spec.duration_s * spec.fs));
  const Eigen::Index n = spec.n_channels;
  const Eigen::Index k = spec.n_sources;

  // Brain sources: one oscillator each plus pink-ish noise, standardized.
  // Frequencies are stratified over 5-16 Hz so no two sources sit close
  // enough to correlate over a short recording.
  Eigen::MatrixXd sources(k, t_total);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double slot = 11.0 / static_cast<double>(k);
    const double freq = 5.0 + slot * (static_cast<double>(i) + 0.1 + 0.8 * uniform01(rng));
    const double phase = uniform_in(rng, 0.0, 2.0 * M_PI);
    double pink = 0.0;
    for (Eigen::Index s = 0; s < t_total; ++s) {
      pink = 0.98 * pink + gaussian(rng);
      const double osc = std::sin(2.0 * M_PI * freq * static_cast<double>(s) / spec.fs + phase);
      sources(i, s) = osc + 0.12 * pink;
    }
    Eigen::VectorXd row = sources.row(i);
    row.array() -= row.mean();
    const double sd = std::sqrt(row.squaredNorm() / static_cast<double>(t_total - 1));
    sources.row(i) = row / sd;
  }

  // Blink source: raised-cosine pulses, zero between them.
  const std::vector<double> times = blink_times(spec, rng);
  Eigen::VectorXd blink = Eigen::VectorXd::Zero(t_total);
  std::vector<std::uint8_t> mask(static_cast<size_t>(t_total), 0);
  const auto width = static_cast<Eigen::Index>(std::llround(spec.blink.width_s * spec.fs));
  for (double t0 : times) {
    const auto start = static_cast<Eigen::Index>(std::llround(t0 * spec.fs));
    for (Eigen::Index j = 0; j < width && start + j < t_total; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(width - 1);
      blink[start + j] = spec.blink.amplitude_uv * 0.5 * (1.0 - std::cos(2.0 * M_PI * x));
      mask[static_cast<size_t>(start + j)] = 1;
    }
  }

  // Mixing: seeded brain weights redrawn until reasonably conditioned, plus
  // frontal-dominant blink leakage in the last column.
  Eigen::MatrixXd mixing(n, k + 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index i = 0; i < k; ++i) {
        mixing(c, i) = kBrainAmpUv * uniform_in(rng, -1.0, 1.0);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mixing.leftCols(k));
    if (svd.singularValues().minCoeff() > 0.3 * svd.singularValues().maxCoeff()) break;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    mixing(c, k) = c < 3 ? 1.0 - 0.1 * static_cast<double>(c)
                         : 0.12 * std::exp(-static_cast<double>(c - 3) / 2.0);
  }

  Eigen::MatrixXd data(n + 2, t_total);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXd row = mixing.row(c).head(k) * sources;
    row += mixing(c, k) * blink;
    for (Eigen::Index s = 0; s < t_total; ++s) row[s] += spec.noise_std_uv * gaussian(rng);
    data.row(c) = row;
  }
  // EOG pair: the blink source itself (vertical strongest) plus sensor noise.
  for (Eigen::Index s = 0; s < t_total; ++s) {
    data(n, s) = blink[s] + spec.noise_std_uv * gaussian(rng);
    data(n + 1, s) = 0.45 * blink[s] + spec.noise_std_uv * gaussian(rng);
  }

  SynthResult out;
  out.recording.fs = spec.fs;
  for (Eigen::Index c = 0; c < n; ++c) {
    out.recording.labels.push_back(
        c < static_cast<Eigen::Index>(std::size(kLabelBank))
            ? kLabelBank[c]
            : "Ch" + std::to_string(c + 1));
  }
  out.recording.labels.emplace_back("VEOG");
  out.recording.labels.emplace_back("HEOG");
  out.recording.trials.push_back(std::move(data));
  out.recording.validate();

  out.truth.sources = std::move(sources);
  out.truth.blink_template = std::move(blink);
  out.truth.mixing = std::move(mixing);
  out.truth.blink_mask = std::move(mask);
  return out;
}

}  // namespace eegclean
