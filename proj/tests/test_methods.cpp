#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eegclean/methods.hpp"
#include "eegclean/msf.hpp"
#include "eegclean/synth.hpp"
#include "oracles.hpp"

#include <random>

using namespace eegclean;

namespace {

Msf msf_from_mask(const SynthResult& s) {
  Msf msf;
  msf.fs = s.recording.fs;
  Eigen::VectorXd w(static_cast<Eigen::Index>(s.truth.blink_mask.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w[i] = static_cast<double>(s.truth.blink_mask[static_cast<size_t>(i)]);
  }
  msf.trials.push_back(w);
  return msf;
}

Msf constant_msf(const Recording& rec, double value) {
  Msf msf;
  msf.fs = rec.fs;
  for (const auto& t : rec.trials) {
    msf.trials.push_back(Eigen::VectorXd::Constant(t.cols(), value));
  }
  return msf;
}

double max_rel_diff(const Recording& a, const Recording& b) {
  double scale = 0.0;
  double diff = 0.0;
  for (size_t t = 0; t < a.trials.size(); ++t) {
    scale = std::max(scale, b.trials[t].cwiseAbs().maxCoeff());
    diff = std::max(diff, (a.trials[t] - b.trials[t]).cwiseAbs().maxCoeff());
  }
  return diff / scale;
}

// Sub-threshold ocular drift along the blink's spatial vector, as real eyes
// produce between blinks; gives the artifact-free decomposition an ocular
// direction to find.
void add_ocular_drift(SynthResult& s, const SynthSpec& spec, double amp_uv, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  const Eigen::Index t_total = s.recording.trials[0].cols();
  Eigen::VectorXd drift(t_total);
  double state = 0.0;
  for (Eigen::Index i = 0; i < t_total; ++i) {
    state = 0.995 * state + g(rng);
    drift[i] = state;
  }
  drift.array() -= drift.mean();
  drift *= amp_uv / std::sqrt(drift.squaredNorm() / static_cast<double>(t_total - 1));
  const Eigen::Index n = spec.n_channels;
  for (Eigen::Index c = 0; c < n; ++c) {
    s.recording.trials[0].row(c) += s.truth.mixing(c, spec.n_sources) * drift.transpose();
  }
  s.recording.trials[0].row(n) += drift.transpose();
  s.recording.trials[0].row(n + 1) += 0.45 * drift.transpose();
}

}  // namespace

TEST_CASE("artifact-free input passes through every method unchanged") {
  SynthSpec spec;
  spec.blink.amplitude_uv = 0.0;
  spec.seed = 42;
  const SynthResult s = synth_contaminated_recording(spec);
  const Msf zeros = constant_msf(s.recording, 0.0);

  const CleanResult r1 = method1_full_removal(s.recording);
  const CleanResult r2 = method2_partial_removal(s.recording, zeros);
  const CleanResult r3 = method3_artifact_free_unmixing(s.recording, zeros);

  CHECK(r1.report_before.selected.empty());
  for (const CleanResult* r : {&r1, &r2, &r3}) {
    CHECK(r->cleaned.trials[0] == s.recording.trials[0]);
    CHECK(r->cleaned.labels == s.recording.labels);
  }
  // With nothing rejected the re-decomposition reproduces the before sums.
  CHECK((r1.report_after.abs_sums - r1.report_before.abs_sums).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("method 1 removes the planted blink") {
  SynthSpec spec;
  spec.seed = 7;
  const SynthResult s = synth_contaminated_recording(spec);
  const Eigen::VectorXd veog =
      s.recording.trials[0].row(s.recording.channel_index("VEOG")).transpose();

  // Premise: the blink leaks strongly into the frontal channel.
  const double before =
      std::abs(oracle::pearson(s.recording.trials[0].row(0).transpose(), veog));
  REQUIRE(before > 0.8);

  const CleanResult r = method1_full_removal(s.recording);
  CHECK(!r.report_before.selected.empty());
  CHECK(r.report_after.abs_sums.sum() < r.report_before.abs_sums.sum());

  const double after = std::abs(oracle::pearson(r.cleaned.trials[0].row(0).transpose(), veog));
  CHECK(after < 0.1);

  SUBCASE("structure is preserved") {
    CHECK(r.cleaned.labels == s.recording.labels);
    CHECK(r.cleaned.fs == s.recording.fs);
    CHECK(r.cleaned.trials[0].rows() == s.recording.trials[0].rows());
    CHECK(r.cleaned.trials[0].cols() == s.recording.trials[0].cols());
  }

  SUBCASE("EOG channels pass through untouched") {
    const Eigen::Index v = s.recording.channel_index("VEOG");
    CHECK(r.cleaned.trials[0].row(v) == s.recording.trials[0].row(v));
  }

  SUBCASE("decomposition consistency: cleaned = input - rejected contribution") {
    const Components comps = apply_unmixing(r.model, s.recording);
    Eigen::MatrixXd removed = Eigen::MatrixXd::Zero(r.model.channel_labels.size(),
                                                    s.recording.trials[0].cols());
    for (int j : r.report_before.selected) {
      removed += r.model.mixing.col(j) * comps.trials[0].row(j);
    }
    double worst = 0.0;
    for (size_t c = 0; c < r.model.channel_labels.size(); ++c) {
      const Eigen::Index row = s.recording.channel_index(r.model.channel_labels[c]);
      const Eigen::RowVectorXd expected =
          s.recording.trials[0].row(row) - removed.row(static_cast<Eigen::Index>(c));
      worst = std::max(worst,
                       (r.cleaned.trials[0].row(row) - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst / s.recording.trials[0].cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("determinism: a second run is bit-identical") {
    const CleanResult again = method1_full_removal(s.recording);
    CHECK(again.cleaned.trials[0] == r.cleaned.trials[0]);
    CHECK(again.report_before.abs_sums == r.report_before.abs_sums);
    CHECK(again.model.unmixing == r.model.unmixing);
  }

  SUBCASE("idempotence tendency is reported") {
    const CleanResult rerun = method1_full_removal(r.cleaned);
    MESSAGE("method 1 rerun on its own output selects ",
            rerun.report_before.selected.size(), " components (first run ",
            r.report_before.selected.size(), ")");
  }
}

TEST_CASE("method 2 gates the rejection with the MSF") {
  SynthSpec spec;
  spec.seed = 7;
  const SynthResult s = synth_contaminated_recording(spec);
  const CleanResult full = method1_full_removal(s.recording);

  SUBCASE("all-zero MSF returns the input") {
    const CleanResult r = method2_partial_removal(s.recording, constant_msf(s.recording, 0.0));
    CHECK(max_rel_diff(r.cleaned, s.recording) < 1e-6);
  }

  SUBCASE("all-one MSF matches method 1") {
    const CleanResult r = method2_partial_removal(s.recording, constant_msf(s.recording, 1.0));
    CHECK(max_rel_diff(r.cleaned, full.cleaned) < 1e-10);
  }

  SUBCASE("detected MSF: identity off-gate, blink peaks crushed on-gate") {
    const Msf msf = create_msf(s.recording, DetectConfig{});
    const CleanResult r = method2_partial_removal(s.recording, msf);
    REQUIRE(!r.report_before.selected.empty());
    REQUIRE(r.msf.has_value());

    const double scale = s.recording.trials[0].cwiseAbs().maxCoeff();
    double off_gate = 0.0;
    double peak_before = 0.0;
    double peak_after = 0.0;
    for (Eigen::Index i = 0; i < s.recording.trials[0].cols(); ++i) {
      if (msf.trials[0][i] == 0.0) {
        off_gate = std::max(off_gate, (r.cleaned.trials[0].col(i) -
                                       s.recording.trials[0].col(i)).cwiseAbs().maxCoeff());
      }
      if (s.truth.blink_mask[static_cast<size_t>(i)]) {
        peak_before = std::max(peak_before, std::abs(s.recording.trials[0](0, i)));
        peak_after = std::max(peak_after, std::abs(r.cleaned.trials[0](0, i)));
      }
    }
    CHECK(off_gate / scale < 1e-6);
    CHECK(peak_after < 0.2 * peak_before);
  }

  SUBCASE("MSF shape mismatch errors") {
    Msf bad = constant_msf(s.recording, 0.0);
    bad.trials[0] = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(method2_partial_removal(s.recording, bad), std::invalid_argument);
  }
}

TEST_CASE("ica_from_artifact_free_data") {
  SynthSpec spec;
  spec.seed = 13;
  const SynthResult s = synth_contaminated_recording(spec);
  const Msf msf = msf_from_mask(s);

  SUBCASE("the model mean comes from the surviving columns only") {
    const IcaModel model = ica_from_artifact_free_data(s.recording, msf);
    // Oracle: mean of unflagged columns of the EEG rows.
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(spec.n_channels);
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < s.recording.trials[0].cols(); ++i) {
      if (!s.truth.blink_mask[static_cast<size_t>(i)]) {
        expected += s.recording.trials[0].col(i).head(spec.n_channels);
        ++kept;
      }
    }
    expected /= static_cast<double>(kept);
    CHECK((model.mean - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(kept == s.recording.trials[0].cols() - msf.flagged_samples());
  }

  SUBCASE("an all-zero MSF reproduces the plain fit") {
    const IcaModel trained = ica_from_artifact_free_data(s.recording, constant_msf(s.recording, 0.0));
    const Recording eeg = select_channels(s.recording, {"all", "-VEOG", "-HEOG"});
    const IcaModel plain = fastica(concatenate_trials(eeg).data, {}, eeg.labels);
    CHECK(trained.unmixing == plain.unmixing);
    CHECK(trained.mean == plain.mean);
  }

  SUBCASE("an all-one MSF has nothing to train on") {
    CHECK_THROWS_WITH_AS(ica_from_artifact_free_data(s.recording, constant_msf(s.recording, 1.0)),
                         doctest::Contains("every sample"), std::invalid_argument);
  }

  SUBCASE("too few clean samples is an error") {
    Msf nearly_full = constant_msf(s.recording, 1.0);
    nearly_full.trials[0].head(20).setZero();  // 20 clean samples for 6 channels
    CHECK_THROWS_WITH_AS(ica_from_artifact_free_data(s.recording, nearly_full),
                         doctest::Contains("10 per component"), std::invalid_argument);
  }
}

TEST_CASE("method 3 cleans with the artifact-free unmixing") {
  SynthSpec spec;
  spec.blink.amplitude_uv = 120.0;
  spec.seed = 13;
  SynthResult s = synth_contaminated_recording(spec);
  add_ocular_drift(s, spec, 5.0, 13 * 977 + 1);
  const Msf msf = msf_from_mask(s);

  SUBCASE("all-zero MSF returns the input") {
    const CleanResult r =
        method3_artifact_free_unmixing(s.recording, constant_msf(s.recording, 0.0));
    CHECK(max_rel_diff(r.cleaned, s.recording) < 1e-6);
  }

  SUBCASE("gated cleaning reduces the correlation evidence") {
    const CleanResult r = method3_artifact_free_unmixing(s.recording, msf);
    REQUIRE(!r.report_before.selected.empty());
    CHECK(r.report_after.abs_sums.sum() < r.report_before.abs_sums.sum());

    const double scale = s.recording.trials[0].cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < s.recording.trials[0].cols(); ++i) {
      if (msf.trials[0][i] == 0.0) {
        CHECK((r.cleaned.trials[0].col(i) - s.recording.trials[0].col(i)).cwiseAbs().maxCoeff() <
              1e-6 * scale);
      }
    }
    CHECK(r.method == CleanMethod::artifact_free_unmixing);
    CHECK(r.msf.has_value());
  }
}

TEST_CASE("artifact-free training beats contaminated training on heavy contamination") {
  SynthSpec spec;
  spec.n_channels = 4;
  spec.n_sources = 4;
  spec.blink.count = 20;
  spec.blink.width_s = 0.35;
  spec.blink.amplitude_uv = 150.0;
  spec.seed = 2;
  const SynthResult s = synth_contaminated_recording(spec);
  const Msf msf = msf_from_mask(s);
  const double duty = static_cast<double>(msf.flagged_samples()) /
                      static_cast<double>(msf.total_samples());
  REQUIRE(duty >= 0.3);

  const Recording eeg = select_channels(s.recording, {"all", "-VEOG", "-HEOG"});
  const IcaModel contaminated = fastica(concatenate_trials(eeg).data, {}, eeg.labels);
  const IcaModel clean = ica_from_artifact_free_data(s.recording, msf);

  const Eigen::MatrixXd a_brain = s.truth.mixing.leftCols(spec.n_sources);
  const double amari_contaminated = oracle::amari_index(contaminated.unmixing * a_brain);
  const double amari_clean = oracle::amari_index(clean.unmixing * a_brain);
  MESSAGE("amari: contaminated=", amari_contaminated, " clean=", amari_clean);
  CHECK(amari_clean < amari_contaminated);
}

TEST_CASE("missing EOG channels fail with a precise message") {
  Recording rec;
  rec.fs = 100.0;
  rec.labels = {"a", "b", "c"};
  std::mt19937 rng(1);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(3, 300);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  rec.trials.push_back(m);
  rec.eog_labels.clear();  // loader found no EOG labels

  CHECK_THROWS_WITH_AS(method1_full_removal(rec), doctest::Contains("VEOG"),
                       std::invalid_argument);
}
