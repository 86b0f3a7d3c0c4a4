#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eegclean/preprocess.hpp"
#include "oracles.hpp"

#include <random>

using namespace eegclean;

namespace {

Recording one_trial(const Eigen::MatrixXd& m, double fs = 100.0) {
  Recording rec;
  rec.fs = fs;
  rec.eog_labels.clear();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rec.labels.push_back("c" + std::to_string(i));
  rec.trials.push_back(m);
  return rec;
}

Eigen::VectorXd tone(double f, double fs, Eigen::Index n, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = std::sin(2.0 * M_PI * f * static_cast<double>(i) / fs + phase);
  }
  return x;
}

double steady_rms(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  return oracle::rms(x.segment(n / 5, 3 * n / 5));
}

}  // namespace

TEST_CASE("demean") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 5, 5, 5;
  const Recording out = demean(one_trial(m));
  CHECK(out.trials[0].row(0).isApprox(Eigen::RowVector3d(-1, 0, 1), 1e-15));
  CHECK(out.trials[0].row(1).isZero(0.0));

  std::mt19937 rng(1);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd r(4, 500);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = dist(rng) + 3.0;
  const Recording rout = demean(one_trial(r));
  for (Eigen::Index c = 0; c < 4; ++c) {
    CHECK(std::abs(rout.trials[0].row(c).mean()) < 1e-12 * r.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("detrend_linear") {
  const Eigen::Index n = 400;

  SUBCASE("pure ramp vanishes") {
    const double a = 2.5;
    Eigen::MatrixXd m(1, n);
    for (Eigen::Index i = 0; i < n; ++i) m(0, i) = a * static_cast<double>(i) + 7.0;
    const Recording out = detrend_linear(one_trial(m));
    CHECK(out.trials[0].cwiseAbs().maxCoeff() < 1e-9 * a * static_cast<double>(n));
  }

  SUBCASE("constant vanishes") {
    const Recording out = detrend_linear(one_trial(Eigen::MatrixXd::Constant(1, n, 42.0)));
    CHECK(out.trials[0].cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("residual of 2t + 5 + sine has zero best-fit slope") {
    Eigen::MatrixXd m(1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(0, i) = 2.0 * static_cast<double>(i) + 5.0 +
                std::sin(2.0 * M_PI * static_cast<double>(i) / 80.0);
    }
    const Recording out = detrend_linear(one_trial(m));
    // Least-squares oracle on the residual.
    const double t_mean = 0.5 * static_cast<double>(n - 1);
    double stt = 0.0;
    double sty = 0.0;
    const double y_mean = out.trials[0].row(0).mean();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dt = static_cast<double>(i) - t_mean;
      stt += dt * dt;
      sty += dt * (out.trials[0](0, i) - y_mean);
    }
    CHECK(std::abs(sty / stt) < 1e-9);
  }

  SUBCASE("single-sample trial errors") {
    CHECK_THROWS_AS(detrend_linear(one_trial(Eigen::MatrixXd::Ones(1, 1))),
                    std::invalid_argument);
  }
}

TEST_CASE("rereference") {
  Eigen::MatrixXd m(3, 4);
  m << 1, 2, 3, 4, 1, 2, 3, 4, 9, 9, 9, 9;
  Recording rec = one_trial(m);

  const Recording out = rereference(rec, "c0");
  CHECK(out.trials[0].row(0).isZero(0.0));  // the reference itself
  CHECK(out.trials[0].row(1).isZero(0.0));  // identical channel
  CHECK(out.ref_label == "c0");

  // Re-referencing again to the now-zero channel changes nothing.
  const Recording twice = rereference(out, "c0");
  CHECK(twice.trials[0] == out.trials[0]);

  CHECK_THROWS_WITH_AS(rereference(rec, "nope"), doctest::Contains("nope"),
                       std::invalid_argument);
}

TEST_CASE("fir design invariants") {
  const Eigen::VectorXd lp = design_fir_taps(FirKind::lowpass, 2500.0, 250.0, 30);
  CHECK(lp.sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::VectorXd hp = design_fir_taps(FirKind::highpass, 2500.0, 1.0, 2000);
  CHECK(std::abs(hp.sum()) < 1e-12);

  // Symmetric taps.
  for (Eigen::Index i = 0; i < lp.size() / 2; ++i) {
    CHECK(lp[i] == doctest::Approx(lp[lp.size() - 1 - i]).epsilon(1e-14));
  }

  CHECK(fir_order_for(2500.0, 250.0, 100000) == 30);
  CHECK(fir_order_for(100.0, 30.0, 100000) == 10);  // 3*floor(100/30)=9 -> 10
  CHECK(fir_order_for(2500.0, 250.0, 21) == 20);    // capped by trial length
  CHECK_THROWS_AS(fir_order_for(100.0, 30.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(fir_order_for(100.0, 60.0, 100), std::invalid_argument);
}

TEST_CASE("fir filtering") {
  const double fs = 2500.0;
  const Eigen::Index n = 5000;

  SUBCASE("lowpass leaves DC untouched") {
    const Recording out = filter_fir(one_trial(Eigen::MatrixXd::Constant(1, n, 3.25), fs),
                                     FirKind::lowpass, 250.0, FilterDirection::twopass);
    CHECK((out.trials[0].array() - 3.25).abs().maxCoeff() < 1e-6);
  }

  SUBCASE("highpass kills DC") {
    const Recording out = filter_fir(one_trial(Eigen::MatrixXd::Constant(1, n, 3.25), fs),
                                     FirKind::highpass, 1.0, FilterDirection::twopass);
    CHECK(out.trials[0].cwiseAbs().maxCoeff() < 1e-6 * 3.25);
  }

  SUBCASE("400 Hz tone attenuated by >= 40 dB through the 250 Hz lowpass, twopass") {
    Eigen::MatrixXd m(1, 25000);
    m.row(0) = tone(400.0, fs, 25000).transpose();
    const Recording out =
        filter_fir(one_trial(m, fs), FirKind::lowpass, 250.0, FilterDirection::twopass);
    const double gain = steady_rms(out.trials[0].row(0)) / steady_rms(m.row(0));
    CHECK(20.0 * std::log10(gain) < -40.0);
  }

  SUBCASE("twopass is zero-phase on a mid-band tone") {
    Eigen::MatrixXd m(1, 10000);
    m.row(0) = tone(50.0, fs, 10000, 0.4).transpose();
    const Recording out =
        filter_fir(one_trial(m, fs), FirKind::lowpass, 250.0, FilterDirection::twopass);
    CHECK(oracle::xcorr_peak_lag(m.row(0), out.trials[0].row(0), 20) == 0);
  }

  SUBCASE("twopass impulse response is symmetric about the impulse") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, 801);
    m(0, 400) = 1.0;
    const Recording out =
        filter_fir(one_trial(m, fs), FirKind::lowpass, 250.0, FilterDirection::twopass);
    for (Eigen::Index k = 1; k <= 100; ++k) {
      CHECK(out.trials[0](0, 400 + k) ==
            doctest::Approx(out.trials[0](0, 400 - k)).epsilon(1e-10));
    }
  }

  SUBCASE("linearity") {
    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd x(1, 2000);
    Eigen::MatrixXd y(1, 2000);
    for (Eigen::Index i = 0; i < 2000; ++i) {
      x(0, i) = dist(rng);
      y(0, i) = dist(rng);
    }
    const double a = 2.5;
    const double b = -1.25;
    const Recording fx = filter_fir(one_trial(x, fs), FirKind::lowpass, 250.0);
    const Recording fy = filter_fir(one_trial(y, fs), FirKind::lowpass, 250.0);
    const Recording fxy = filter_fir(one_trial(a * x + b * y, fs), FirKind::lowpass, 250.0);
    const Eigen::MatrixXd combined = a * fx.trials[0] + b * fy.trials[0];
    const double rel =
        (fxy.trials[0] - combined).cwiseAbs().maxCoeff() / combined.cwiseAbs().maxCoeff();
    CHECK(rel < 1e-9);
  }

  SUBCASE("too-short trial reports the minimum") {
    CHECK_THROWS_WITH_AS(
        filter_fir(one_trial(Eigen::MatrixXd::Ones(1, 2), fs), FirKind::lowpass, 250.0),
        doctest::Contains("at least"), std::invalid_argument);
  }
}

TEST_CASE("butterworth band-pass") {
  const double fs = 2500.0;
  const Eigen::Index n = 25000;

  SUBCASE("zero in, zero out") {
    const Eigen::VectorXd y = butterworth_bandpass(Eigen::VectorXd::Zero(500), fs, 2.0, 15.0, 3);
    CHECK(y.isZero(0.0));
  }

  SUBCASE("magnitudes match the analytic order-3 response") {
    for (double f : {2.0, 8.0, 15.0, 50.0}) {
      const Eigen::VectorXd x = tone(f, fs, n);
      const Eigen::VectorXd y =
          butterworth_bandpass(x, fs, 2.0, 15.0, 3, FilterDirection::onepass);
      const double measured = steady_rms(y) / steady_rms(x);
      const double analytic = oracle::butterworth_bp_gain(fs, 2.0, 15.0, 3, f);
      CHECK(measured == doctest::Approx(analytic).epsilon(0.02));
    }
    // Band interior and stop band, as absolute statements.
    const double g8 = steady_rms(butterworth_bandpass(tone(8.0, fs, n), fs, 2.0, 15.0, 3,
                                                      FilterDirection::onepass)) /
                      steady_rms(tone(8.0, fs, n));
    CHECK(g8 >= 0.7);
    CHECK(g8 <= 1.0);
    const double g50 = steady_rms(butterworth_bandpass(tone(50.0, fs, n), fs, 2.0, 15.0, 3,
                                                       FilterDirection::onepass)) /
                       steady_rms(tone(50.0, fs, n));
    CHECK(20.0 * std::log10(g50) < -20.0);
  }

  SUBCASE("band edges sit at 1/sqrt(2) within 2%") {
    for (double f : {2.0, 15.0}) {
      const Eigen::VectorXd x = tone(f, fs, n);
      const Eigen::VectorXd y =
          butterworth_bandpass(x, fs, 2.0, 15.0, 3, FilterDirection::onepass);
      CHECK(steady_rms(y) / steady_rms(x) == doctest::Approx(M_SQRT1_2).epsilon(0.02));
    }
  }

  SUBCASE("twopass squares the magnitude and has zero phase") {
    const Eigen::VectorXd x = tone(8.0, fs, n);
    const Eigen::VectorXd y1 = butterworth_bandpass(x, fs, 2.0, 15.0, 3, FilterDirection::onepass);
    const Eigen::VectorXd y2 = butterworth_bandpass(x, fs, 2.0, 15.0, 3, FilterDirection::twopass);
    const double g1 = steady_rms(y1) / steady_rms(x);
    const double g2 = steady_rms(y2) / steady_rms(x);
    CHECK(g2 == doctest::Approx(g1 * g1).epsilon(0.02));
    CHECK(oracle::xcorr_peak_lag(x, y2, 30) == 0);
  }

  SUBCASE("linearity") {
    std::mt19937 rng(9);
    std::normal_distribution<double> dist;
    Eigen::VectorXd x(3000);
    Eigen::VectorXd y(3000);
    for (Eigen::Index i = 0; i < 3000; ++i) {
      x[i] = dist(rng);
      y[i] = dist(rng);
    }
    const Eigen::VectorXd fx = butterworth_bandpass(x, fs, 2.0, 15.0, 3);
    const Eigen::VectorXd fy = butterworth_bandpass(y, fs, 2.0, 15.0, 3);
    const Eigen::VectorXd fxy = butterworth_bandpass(3.0 * x - 0.5 * y, fs, 2.0, 15.0, 3);
    const Eigen::VectorXd combined = 3.0 * fx - 0.5 * fy;
    CHECK((fxy - combined).cwiseAbs().maxCoeff() / combined.cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("invalid bands and orders") {
    CHECK_THROWS_AS(design_butterworth_bandpass(fs, 15.0, 2.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth_bandpass(fs, 2.0, 1300.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth_bandpass(fs, 2.0, 15.0, 0), std::invalid_argument);
  }
}

TEST_CASE("preprocess pipeline") {
  SUBCASE("all-off config is the identity") {
    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd m(3, 200);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    const Recording rec = one_trial(m);
    const Recording out = preprocess_pipeline(rec, PreprocessConfig{});
    CHECK(out.trials[0] == rec.trials[0]);
  }

  SUBCASE("recording-chain defaults kill DC") {
    // DC offset + drift + a 10 Hz tone whose crests sit on both trial ends,
    // so the mirror extension continues the signal exactly and the filters
    // see it as if it were unbounded.
    const double fs = 2500.0;
    const Eigen::Index n = 5001;  // (n-1) * 10 / fs = 20 full half-periods
    Eigen::MatrixXd m(2, n);
    for (Eigen::Index c = 0; c < 2; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        m(c, i) = 100.0 + 0.01 * static_cast<double>(i) +
                  20.0 * std::cos(2.0 * M_PI * 10.0 * static_cast<double>(i) / fs);
      }
    }
    PreprocessConfig cfg;
    cfg.demean = true;
    cfg.detrend = true;
    cfg.lp_cutoff_hz = 250.0;
    cfg.hp_cutoff_hz = 1.0;
    const Recording out = preprocess_pipeline(one_trial(m, fs), cfg);
    for (Eigen::Index c = 0; c < 2; ++c) {
      CHECK(std::abs(out.trials[0].row(c).mean()) < 1e-6);
    }

    // Purity: a second run is byte-identical.
    const Recording again = preprocess_pipeline(one_trial(m, fs), cfg);
    CHECK(again.trials[0] == out.trials[0]);

    // With broadband noise the trial ends leak a little DC through the
    // mirror extension; report the residual rather than bound it.
    std::mt19937 rng(13);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd noisy = m;
    for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += dist(rng);
    const Recording nout = preprocess_pipeline(one_trial(noisy, fs), cfg);
    MESSAGE("residual channel mean with broadband noise: ",
            std::abs(nout.trials[0].row(0).mean()), " uV");
  }

  SUBCASE("config validation") {
    const Recording rec = one_trial(Eigen::MatrixXd::Zero(1, 100), 100.0);
    PreprocessConfig bad;
    bad.lp_cutoff_hz = 60.0;
    CHECK_THROWS_AS(preprocess_pipeline(rec, bad), std::invalid_argument);
    PreprocessConfig inverted;
    inverted.lp_cutoff_hz = 2.0;
    inverted.hp_cutoff_hz = 20.0;
    CHECK_THROWS_AS(preprocess_pipeline(rec, inverted), std::invalid_argument);
  }
}
