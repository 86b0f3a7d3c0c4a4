#pragma once

#include "eegclean/ica.hpp"
#include "eegclean/msf.hpp"
#include "eegclean/recording.hpp"
#include "eegclean/selection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eegclean {

enum class CleanMethod {
  full_removal = 1,
  partial_removal = 2,
  artifact_free_unmixing = 3,
};

std::string to_string(CleanMethod method);

struct CleanOptions {
  IcaOptions ica;
  double mad_multiplier = 3.0;
  // When set, the designated EOG channels join the decomposition input. They
  // are still restored from the original recording in the cleaned output.
  bool include_eog_in_ica = false;
};

struct CleanResult {
  Recording cleaned;
  CleanMethod method = CleanMethod::full_removal;
  CorrelationReport report_before;  // ICs of the input vs EOG
  CorrelationReport report_after;   // ICs of a fresh decomposition of the output vs EOG
  IcaModel model;
  std::optional<Msf> msf;
  std::vector<std::string> warnings;
};

// Decompose, correlate against EOG, reject the outlier components entirely,
// rebuild. An empty selection returns the input unchanged.
CleanResult method1_full_removal(const Recording& rec, const CleanOptions& opts = {});

// As method 1 through component selection, but rejected components are only
// zeroed (or attenuated, for fractional weights) where the MSF flags samples.
CleanResult method2_partial_removal(const Recording& rec, const Msf& msf,
                                    const CleanOptions& opts = {});

// FastICA fitted on the concatenated data with every column where the MSF
// weight equals 1 dropped; the mean comes from the surviving columns. Errors
// when nothing survives or fewer than 10*k clean samples remain.
IcaModel ica_from_artifact_free_data(const Recording& rec, const Msf& msf,
                                     const CleanOptions& opts = {});

// Method 2 with the unmixing matrix trained on artifact-free samples only,
// then applied to the complete data.
CleanResult method3_artifact_free_unmixing(const Recording& rec, const Msf& msf,
                                           const CleanOptions& opts = {});

}  // namespace eegclean
