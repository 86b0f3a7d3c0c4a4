#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eegclean/csv_io.hpp"
#include "eegclean/methods.hpp"
#include "eegclean/report.hpp"
#include "eegclean/synth.hpp"
#include "eegclean/util.hpp"
#include "oracles.hpp"

using namespace eegclean;

TEST_CASE("synthetic recordings are deterministic and labeled") {
  SynthSpec spec;
  const SynthResult a = synth_contaminated_recording(spec);
  const SynthResult b = synth_contaminated_recording(spec);
  CHECK(a.recording.trials[0] == b.recording.trials[0]);
  CHECK(a.truth.sources == b.truth.sources);
  CHECK(a.truth.mixing == b.truth.mixing);

  SynthSpec other = spec;
  other.seed = spec.seed + 1;
  const SynthResult c = synth_contaminated_recording(other);
  CHECK(a.recording.trials[0] != c.recording.trials[0]);

  CHECK(a.recording.labels.front() == "Fp1");
  CHECK(a.recording.labels[spec.n_channels] == "VEOG");
  CHECK(a.recording.eog_labels == std::vector<std::string>{"VEOG", "HEOG"});
  CHECK_NOTHROW(a.recording.validate());
}

TEST_CASE("the blink truth matches the spec") {
  SynthSpec spec;
  spec.blink.count = 7;
  const SynthResult s = synth_contaminated_recording(spec);

  // Count distinct runs in the mask.
  int runs = 0;
  bool in_run = false;
  for (std::uint8_t m : s.truth.blink_mask) {
    if (m && !in_run) ++runs;
    in_run = m != 0;
  }
  CHECK(runs == 7);

  const Eigen::VectorXd veog =
      s.recording.trials[0].row(s.recording.channel_index("VEOG")).transpose();
  CHECK(oracle::pearson(veog, s.truth.blink_template) > 0.9);
}

TEST_CASE("channels equal mixing * sources + sensor noise") {
  SynthSpec spec;
  const SynthResult s = synth_contaminated_recording(spec);
  const Eigen::Index t = s.recording.trials[0].cols();

  Eigen::MatrixXd stacked(spec.n_sources + 1, t);
  stacked.topRows(spec.n_sources) = s.truth.sources;
  stacked.row(spec.n_sources) = s.truth.blink_template.transpose();
  const Eigen::MatrixXd expected = s.truth.mixing * stacked;

  for (Eigen::Index c = 0; c < spec.n_channels; ++c) {
    const Eigen::VectorXd residual =
        s.recording.trials[0].row(c).transpose() - expected.row(c).transpose();
    const double sd = std::sqrt(residual.squaredNorm() / static_cast<double>(t - 1));
    CHECK(sd == doctest::Approx(spec.noise_std_uv).epsilon(0.25));
  }
}

TEST_CASE("infeasible blink layouts are rejected") {
  SynthSpec spec;
  spec.duration_s = 2.0;
  spec.blink.count = 10;
  spec.blink.width_s = 0.5;
  CHECK_THROWS_AS(synth_contaminated_recording(spec), std::invalid_argument);

  SynthSpec wide;
  wide.blink.width_s = wide.duration_s + 1.0;
  CHECK_THROWS_AS(synth_contaminated_recording(wide), std::invalid_argument);
}

TEST_CASE("emit_correlation_report") {
  SynthSpec spec;
  spec.seed = 7;
  const SynthResult s = synth_contaminated_recording(spec);
  const CleanResult r = method1_full_removal(s.recording);
  const auto dir = oracle::tmp_dir("report");
  emit_correlation_report(r, dir.string());

  SUBCASE("csv rows mirror the report exactly") {
    const Recording table = load_csv((dir / "correlation_report.csv").string(), 1.0);
    REQUIRE(table.labels ==
            std::vector<std::string>{"component", "abs_sum_before", "abs_sum_after", "selected"});
    const Eigen::Index k = r.report_before.abs_sums.size();
    REQUIRE(table.trials[0].cols() == k);
    for (Eigen::Index j = 0; j < k; ++j) {
      CHECK(table.trials[0](0, j) == static_cast<double>(j));
      CHECK(table.trials[0](1, j) == r.report_before.abs_sums[j]);
      if (j < r.report_after.abs_sums.size()) {
        CHECK(table.trials[0](2, j) == r.report_after.abs_sums[j]);
      } else {
        CHECK(table.trials[0](2, j) == 0.0);
      }
      const bool selected = std::find(r.report_before.selected.begin(),
                                      r.report_before.selected.end(),
                                      static_cast<int>(j)) != r.report_before.selected.end();
      CHECK(table.trials[0](3, j) == (selected ? 1.0 : 0.0));
    }
  }

  SUBCASE("bar chart svg is self-contained xml") {
    CHECK(oracle::svg_is_self_contained(oracle::read_file(dir / "correlation.svg")));
  }

  SUBCASE("a no-op clean reports equal before and after sums") {
    SynthSpec quiet = spec;
    quiet.blink.amplitude_uv = 0.0;
    quiet.seed = 42;
    const SynthResult q = synth_contaminated_recording(quiet);
    const CleanResult rq = method1_full_removal(q.recording);
    REQUIRE(rq.report_before.selected.empty());
    const auto qdir = oracle::tmp_dir("report_noop");
    emit_correlation_report(rq, qdir.string(), false);
    const Recording table = load_csv((qdir / "correlation_report.csv").string(), 1.0);
    for (Eigen::Index j = 0; j < table.trials[0].cols(); ++j) {
      CHECK(table.trials[0](1, j) == doctest::Approx(table.trials[0](2, j)).epsilon(1e-12));
    }
    CHECK_FALSE(std::filesystem::exists(qdir / "correlation.svg"));
  }
}

TEST_CASE("emit_signal_plot") {
  SynthSpec spec;
  spec.seed = 7;
  const SynthResult s = synth_contaminated_recording(spec);
  const Msf msf = create_msf(s.recording, DetectConfig{});
  const CleanResult r = method2_partial_removal(s.recording, msf);
  const auto dir = oracle::tmp_dir("sigplot");

  SUBCASE("two-channel figure with msf shading is valid svg") {
    emit_signal_plot(s.recording, r.cleaned, {"Fp1", "Fz"}, {0.0, 5.0}, dir.string(), &msf);
    const std::string text = oracle::read_file(dir / "signals.svg");
    CHECK(oracle::svg_is_self_contained(text));
    CHECK(text.find("Fp1") != std::string::npos);
    CHECK(text.find("uV") != std::string::npos);
    CHECK(text.find("cleaned") != std::string::npos);
  }

  SUBCASE("window validation") {
    CHECK_THROWS_AS(emit_signal_plot(s.recording, r.cleaned, {"Fp1"}, {3.0, 3.0}, dir.string()),
                    std::invalid_argument);
    CHECK_THROWS_AS(emit_signal_plot(s.recording, r.cleaned, {"Fp1"}, {0.0, 99.0}, dir.string()),
                    std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        emit_signal_plot(s.recording, r.cleaned, {"Fp9"}, {0.0, 2.0}, dir.string()),
        doctest::Contains("Fp9"), std::invalid_argument);
  }
}
