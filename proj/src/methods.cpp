#include "eegclean/methods.hpp"

#include <algorithm>
#include <stdexcept>

namespace eegclean {

namespace {

struct ChannelSplit {
  Recording eog;
  std::vector<std::string> ica_labels;  // decomposition input channels
};

ChannelSplit split_channels(const Recording& rec, const CleanOptions& opts) {
  rec.validate();
  const std::vector<std::string> eog = rec.present_eog_labels();
  if (eog.empty()) {
    std::string expected;
    for (const auto& l : rec.eog_labels) expected += (expected.empty() ? "" : ", ") + l;
    if (expected.empty()) expected = "VEOG, HEOG";
    throw std::invalid_argument(
        "method: no EOG channels present in the recording (expected: " + expected + ")");
  }

  ChannelSplit out;
  out.eog = select_channels(rec, eog);
  for (const auto& l : rec.labels) {
    const bool is_eog = std::find(eog.begin(), eog.end(), l) != eog.end();
    if (!is_eog || opts.include_eog_in_ica) out.ica_labels.push_back(l);
  }
  const size_t n_non_eog = rec.labels.size() - eog.size();
  if (n_non_eog < 2) {
    throw std::invalid_argument("method: need at least 2 non-EOG channels, have " +
                                std::to_string(n_non_eog));
  }
  return out;
}

IcaModel fit_ica(const Recording& rec, const std::vector<std::string>& ica_labels,
                 const CleanOptions& opts) {
  const Recording input = select_channels(rec, ica_labels);
  return fastica(concatenate_trials(input).data, opts.ica, input.labels);
}

// EOG rows always come back from the source recording, even when they took
// part in the decomposition.
void restore_eog(Recording& cleaned, const Recording& original) {
  for (const auto& l : original.present_eog_labels()) {
    const Eigen::Index idx = original.channel_index(l);
    for (size_t t = 0; t < cleaned.trials.size(); ++t) {
      cleaned.trials[t].row(idx) = original.trials[t].row(idx);
    }
  }
}

CorrelationReport report_against_eog(const Recording& eog, const Components& comps,
                                     const CleanOptions& opts,
                                     std::vector<std::string>* warnings) {
  return make_correlation_report(eog.labels, corrcoeff_matrix(eog, comps, warnings),
                                 opts.mad_multiplier);
}

void note_nonconvergence(const IcaModel& model, std::vector<std::string>& warnings) {
  if (!model.convergence.converged) {
    warnings.push_back("ica: not converged after " +
                       std::to_string(model.convergence.iterations) + " iterations (max delta " +
                       std::to_string(model.convergence.final_deltas.maxCoeff()) + ")");
  } else if (!model.convergence.reliable) {
    const auto near_gaussian =
        (model.convergence.nongaussianity.array() < 0.01).count();
    warnings.push_back("ica: " + std::to_string(near_gaussian) +
                       " component(s) are near-Gaussian; their rotation is indeterminate");
  }
}

CleanResult finish(const Recording& rec, Recording cleaned, CleanMethod method,
                   CorrelationReport before, IcaModel model, std::optional<Msf> msf,
                   const CleanOptions& opts, std::vector<std::string> warnings) {
  CleanResult result;
  result.method = method;
  result.report_before = std::move(before);
  result.model = std::move(model);
  result.msf = std::move(msf);

  restore_eog(cleaned, rec);

  // The after-side evidence mirrors how the before side was computed: a fresh
  // decomposition of the cleaned data with the same seed, correlated against
  // the (untouched) EOG channels.
  const std::vector<std::string> eog = rec.present_eog_labels();
  const Recording eog_rec = select_channels(rec, eog);
  std::vector<std::string> after_labels;
  for (const auto& l : result.model.channel_labels) after_labels.push_back(l);
  const IcaModel model_after = fit_ica(cleaned, after_labels, opts);
  const Components comps_after = apply_unmixing(model_after, cleaned);
  result.report_after = report_against_eog(eog_rec, comps_after, opts, &warnings);

  result.cleaned = std::move(cleaned);
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace

std::string to_string(CleanMethod method) {
  switch (method) {
    case CleanMethod::full_removal: return "full_removal";
    case CleanMethod::partial_removal: return "partial_removal";
    case CleanMethod::artifact_free_unmixing: return "artifact_free_unmixing";
  }
  return "unknown";
}

CleanResult method1_full_removal(const Recording& rec, const CleanOptions& opts) {
  const ChannelSplit split = split_channels(rec, opts);
  std::vector<std::string> warnings;

  IcaModel model = fit_ica(rec, split.ica_labels, opts);
  note_nonconvergence(model, warnings);
  const Components comps = apply_unmixing(model, rec);
  CorrelationReport before = report_against_eog(split.eog, comps, opts, &warnings);

  Recording cleaned =
      before.selected.empty() ? rec : reconstruct(comps, rec, before.selected);
  return finish(rec, std::move(cleaned), CleanMethod::full_removal, std::move(before),
                std::move(model), std::nullopt, opts, std::move(warnings));
}

CleanResult method2_partial_removal(const Recording& rec, const Msf& msf,
                                    const CleanOptions& opts) {
  msf.validate_against(rec);
  const ChannelSplit split = split_channels(rec, opts);
  std::vector<std::string> warnings;

  IcaModel model = fit_ica(rec, split.ica_labels, opts);
  note_nonconvergence(model, warnings);
  const Components comps = apply_unmixing(model, rec);
  CorrelationReport before = report_against_eog(split.eog, comps, opts, &warnings);

  Recording cleaned = before.selected.empty()
                          ? rec
                          : reconstruct_partial(comps, rec, before.selected, msf);
  return finish(rec, std::move(cleaned), CleanMethod::partial_removal, std::move(before),
                std::move(model), msf, opts, std::move(warnings));
}

IcaModel ica_from_artifact_free_data(const Recording& rec, const Msf& msf,
                                     const CleanOptions& opts) {
  msf.validate_against(rec);
  const ChannelSplit split = split_channels(rec, opts);
  const Recording input = select_channels(rec, split.ica_labels);
  const Concatenated cat = concatenate_trials(input);

  Eigen::VectorXd weights(cat.data.cols());
  Eigen::Index at = 0;
  for (const auto& t : msf.trials) {
    weights.segment(at, t.size()) = t;
    at += t.size();
  }

  const Eigen::Index clean_count = (weights.array() < 1.0 - 1e-12).count();
  if (clean_count == 0) {
    throw std::invalid_argument(
        "method3: the MSF flags every sample; no artifact-free data to train on");
  }
  Eigen::MatrixXd clean(cat.data.rows(), clean_count);
  Eigen::Index col = 0;
  for (Eigen::Index s = 0; s < cat.data.cols(); ++s) {
    if (weights[s] < 1.0 - 1e-12) clean.col(col++) = cat.data.col(s);
  }

  if (clean_count < 2) {
    throw std::invalid_argument("method3: only " + std::to_string(clean_count) +
                                " artifact-free samples remain");
  }
  const Eigen::Index k = whiten(clean).whitener.rows();
  if (clean_count < 10 * k) {
    throw std::invalid_argument("method3: " + std::to_string(clean_count) +
                                " artifact-free samples remain but at least " +
                                std::to_string(10 * k) + " (10 per component) are required");
  }
  return fastica(clean, opts.ica, input.labels);
}

CleanResult method3_artifact_free_unmixing(const Recording& rec, const Msf& msf,
                                           const CleanOptions& opts) {
  const ChannelSplit split = split_channels(rec, opts);
  std::vector<std::string> warnings;

  IcaModel model = ica_from_artifact_free_data(rec, msf, opts);
  note_nonconvergence(model, warnings);
  const Components comps = apply_unmixing(model, rec);
  CorrelationReport before = report_against_eog(split.eog, comps, opts, &warnings);

  Recording cleaned = before.selected.empty()
                          ? rec
                          : reconstruct_partial(comps, rec, before.selected, msf);
  return finish(rec, std::move(cleaned), CleanMethod::artifact_free_unmixing, std::move(before),
                std::move(model), msf, opts, std::move(warnings));
}

}  // namespace eegclean
