#include "eegclean/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>

namespace eegclean {

namespace {

Recording map_rows(const Recording& rec, const std::function<void(Eigen::VectorXd&)>& fn) {
  Recording out = rec;
  for (auto& trial : out.trials) {
    for (Eigen::Index c = 0; c < trial.rows(); ++c) {
      Eigen::VectorXd row = trial.row(c);
      fn(row);
      trial.row(c) = row;
    }
  }
  return out;
}

// Even ("reflect") extension used for FIR trials: ... x2 x1 | x0 x1 ... .
Eigen::VectorXd mirror_pad(const Eigen::VectorXd& x, Eigen::Index pad) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd out(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) out[i] = x[pad - i];
  out.segment(pad, n) = x;
  for (Eigen::Index i = 0; i < pad; ++i) out[pad + n + i] = x[n - 2 - i];
  return out;
}

Eigen::VectorXd fir_single_pass(const Eigen::VectorXd& x, const Eigen::VectorXd& taps) {
  const Eigen::Index order = taps.size() - 1;
  const Eigen::Index delay = order / 2;
  const Eigen::Index pad = std::min(order, x.size() - 1);
  const Eigen::VectorXd q = mirror_pad(x, pad);
  Eigen::VectorXd y(x.size());
  // Symmetric taps: compensating the integer group delay keeps alignment.
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    y[n] = taps.dot(q.segment(pad + n - delay, taps.size()));
  }
  return y;
}

}  // namespace

Recording demean(const Recording& rec) {
  return map_rows(rec, [](Eigen::VectorXd& row) { row.array() -= row.mean(); });
}

Recording detrend_linear(const Recording& rec) {
  for (const auto& t : rec.trials) {
    if (t.cols() < 2) {
      throw std::invalid_argument("detrend: a single-sample trial has no defined trend");
    }
  }
  return map_rows(rec, [](Eigen::VectorXd& row) {
    const Eigen::Index n = row.size();
    const double t_mean = 0.5 * static_cast<double>(n - 1);
    const double y_mean = row.mean();
    double stt = 0.0;
    double sty = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dt = static_cast<double>(i) - t_mean;
      stt += dt * dt;
      sty += dt * (row[i] - y_mean);
    }
    const double slope = sty / stt;
    for (Eigen::Index i = 0; i < n; ++i) {
      row[i] -= y_mean + slope * (static_cast<double>(i) - t_mean);
    }
  });
}

Recording rereference(const Recording& rec, const std::string& ref_label) {
  const Eigen::Index ref = rec.channel_index(ref_label);
  if (ref < 0) {
    throw std::invalid_argument("rereference: no channel named '" + ref_label + "'");
  }
  Recording out = rec;
  out.ref_label = ref_label;
  for (auto& trial : out.trials) {
    const Eigen::RowVectorXd r = trial.row(ref);
    trial.rowwise() -= r;
  }
  return out;
}

int fir_order_for(double fs, double cutoff_hz, Eigen::Index min_trial_len) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
    throw std::invalid_argument("fir: cutoff must lie in (0, fs/2)");
  }
  long desired = 3 * static_cast<long>(fs / cutoff_hz);
  if (desired % 2 == 1) ++desired;
  long cap = static_cast<long>(min_trial_len) - 1;
  cap -= cap % 2;
  const long order = std::min(desired, cap);
  if (order < 2) {
    throw std::invalid_argument("fir: trial of " + std::to_string(min_trial_len) +
                                " samples is too short to filter; at least 3 are required");
  }
  return static_cast<int>(order);
}

Eigen::VectorXd design_fir_taps(FirKind kind, double fs, double cutoff_hz, int order) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("fir: order must be even and >= 2");
  }
  const Eigen::Index len = order + 1;
  const Eigen::Index mid = order / 2;
  Eigen::VectorXd taps(len);
  const double fc = cutoff_hz / fs;  // cycles per sample
  for (Eigen::Index i = 0; i < len; ++i) {
    const double m = static_cast<double>(i - mid);
    const double sinc = (i == mid) ? 2.0 * fc : std::sin(2.0 * M_PI * fc * m) / (M_PI * m);
    const double window = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / order);
    taps[i] = sinc * window;
  }
  taps /= taps.sum();  // exact unity DC gain
  if (kind == FirKind::highpass) {
    taps = -taps;  // spectral inversion; tap sum becomes exactly 0
    taps[mid] += 1.0;
  }
  return taps;
}

Recording filter_fir(const Recording& rec, FirKind kind, double cutoff_hz,
                     FilterDirection direction) {
  Eigen::Index min_len = std::numeric_limits<Eigen::Index>::max();
  for (const auto& t : rec.trials) min_len = std::min(min_len, t.cols());
  if (rec.trials.empty()) throw std::invalid_argument("fir: recording has no trials");

  const int order = fir_order_for(rec.fs, cutoff_hz, min_len);
  const Eigen::VectorXd taps = design_fir_taps(kind, rec.fs, cutoff_hz, order);

  return map_rows(rec, [&](Eigen::VectorXd& row) {
    row = fir_single_pass(row, taps);
    if (direction == FilterDirection::twopass) {
      row.reverseInPlace();
      row = fir_single_pass(row, taps);
      row.reverseInPlace();
    }
  });
}

std::vector<Biquad> design_butterworth_bandpass(double fs, double f_lo, double f_hi,
                                                int order) {
  if (!(0.0 < f_lo && f_lo < f_hi && f_hi < fs / 2.0)) {
    throw std::invalid_argument("butterworth: need 0 < f_lo < f_hi < fs/2");
  }
  if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");

  using cd = std::complex<double>;
  const double k = 2.0 * fs;

  // Pre-warped band edges; the bilinear transform then places the digital
  // -3 dB points exactly at f_lo and f_hi.
  const double w_lo = k * std::tan(M_PI * f_lo / fs);
  const double w_hi = k * std::tan(M_PI * f_hi / fs);
  const double w0 = std::sqrt(w_lo * w_hi);
  const double bw = w_hi - w_lo;

  // Analog low-pass prototype poles on the left unit semicircle.
  std::vector<cd> analog_poles;
  for (int m = 0; m < order; ++m) {
    const double theta = M_PI * (2.0 * m + 1.0) / (2.0 * order) + M_PI / 2.0;
    analog_poles.emplace_back(std::cos(theta), std::sin(theta));
  }

  // Low-pass -> band-pass: each prototype pole p yields the two roots of
  // s^2 - (p*bw)*s + w0^2 = 0. Zeros land at s = 0 (order) and infinity.
  std::vector<cd> poles;
  for (const cd& p : analog_poles) {
    const cd b = p * bw;
    const cd disc = std::sqrt(b * b - 4.0 * w0 * w0);
    poles.push_back((b + disc) / 2.0);
    poles.push_back((b - disc) / 2.0);
  }

  // Bilinear transform s -> z.
  std::vector<cd> zpoles;
  for (const cd& s : poles) {
    const cd z = (k + s) / (k - s);
    if (std::abs(z) >= 1.0) {
      throw std::runtime_error("butterworth: unstable realization (pole radius >= 1)");
    }
    zpoles.push_back(z);
  }

  // Pair poles into second-order sections: conjugate pairs first, leftover
  // real poles paired among themselves.
  std::vector<std::pair<cd, cd>> pairs;
  std::vector<cd> reals;
  std::vector<bool> used(zpoles.size(), false);
  for (size_t i = 0; i < zpoles.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(zpoles[i].imag()) < 1e-12) {
      reals.push_back(zpoles[i]);
      used[i] = true;
      continue;
    }
    // Find the conjugate partner.
    size_t match = i;
    double best = std::numeric_limits<double>::max();
    for (size_t j = i + 1; j < zpoles.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(zpoles[j] - std::conj(zpoles[i]));
      if (d < best) {
        best = d;
        match = j;
      }
    }
    pairs.emplace_back(zpoles[i], zpoles[match]);
    used[i] = used[match] = true;
  }
  std::sort(reals.begin(), reals.end(),
            [](const cd& a, const cd& b) { return a.real() < b.real(); });
  for (size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(reals[i], reals[i + 1]);

  // Each section carries one zero at z=+1 and one at z=-1: numerator 1 - z^-2.
  std::vector<Biquad> sos;
  for (const auto& [p1, p2] : pairs) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    sos.push_back(s);
  }

  // Normalize to unit magnitude at the digital center frequency.
  const double omega0 = 2.0 * std::atan(w0 / k);
  const cd z0 = std::polar(1.0, omega0);
  const cd z0_1 = 1.0 / z0;
  const cd z0_2 = z0_1 * z0_1;
  cd h(1.0, 0.0);
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * z0_1 + s.b2 * z0_2) / (1.0 + s.a1 * z0_1 + s.a2 * z0_2);
  }
  const double gain = 1.0 / std::abs(h);
  sos.front().b0 *= gain;
  sos.front().b1 *= gain;
  sos.front().b2 *= gain;
  return sos;
}

namespace {

void run_cascade(Eigen::VectorXd& x, const std::vector<Biquad>& sos) {
  for (const auto& s : sos) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const double in = x[n];
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      x[n] = out;
    }
  }
}

}  // namespace

Eigen::VectorXd butterworth_bandpass(const Eigen::VectorXd& x, double fs, double f_lo,
                                     double f_hi, int order, FilterDirection direction) {
  const std::vector<Biquad> sos = design_butterworth_bandpass(fs, f_lo, f_hi, order);
  if (x.size() == 0) return x;

  if (direction == FilterDirection::onepass) {
    Eigen::VectorXd y = x;
    run_cascade(y, sos);
    return y;
  }

  // Odd-mirror extension, long enough for the slow f_lo transient to settle.
  const Eigen::Index pad =
      std::min<Eigen::Index>(x.size() - 1, static_cast<Eigen::Index>(std::ceil(3.0 * fs / f_lo)));
  Eigen::VectorXd ext(x.size() + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  ext.segment(pad, x.size()) = x;
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext[pad + x.size() + i] = 2.0 * x[x.size() - 1] - x[x.size() - 2 - i];
  }

  run_cascade(ext, sos);
  ext.reverseInPlace();
  run_cascade(ext, sos);
  ext.reverseInPlace();
  return ext.segment(pad, x.size());
}

Recording preprocess_pipeline(const Recording& rec, const PreprocessConfig& cfg) {
  const auto check_cutoff = [&](double c, const char* name) {
    if (!(c > 0.0) || !(c < rec.fs / 2.0)) {
      throw std::invalid_argument(std::string("preprocess: ") + name +
                                  " cutoff must lie in (0, fs/2)");
    }
  };
  if (cfg.lp_cutoff_hz) check_cutoff(*cfg.lp_cutoff_hz, "low-pass");
  if (cfg.hp_cutoff_hz) check_cutoff(*cfg.hp_cutoff_hz, "high-pass");
  if (cfg.lp_cutoff_hz && cfg.hp_cutoff_hz && !(*cfg.lp_cutoff_hz > *cfg.hp_cutoff_hz)) {
    throw std::invalid_argument("preprocess: low-pass cutoff must exceed high-pass cutoff");
  }

  Recording out = rec;
  if (cfg.ref_label) out = rereference(out, *cfg.ref_label);
  if (cfg.demean) out = demean(out);
  if (cfg.detrend) out = detrend_linear(out);
  if (cfg.lp_cutoff_hz) out = filter_fir(out, FirKind::lowpass, *cfg.lp_cutoff_hz, cfg.direction);
  if (cfg.hp_cutoff_hz) out = filter_fir(out, FirKind::highpass, *cfg.hp_cutoff_hz, cfg.direction);
  return out;
}

}  // namespace eegclean
