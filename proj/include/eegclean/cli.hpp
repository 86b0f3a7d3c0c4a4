#pragma once

#include "eegclean/methods.hpp"
#include "eegclean/msf.hpp"
#include "eegclean/preprocess.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace eegclean {

// Everything one batch run needs, resolvable from flags and/or a flat
// key=value config file. Flags override file values.
struct RunConfig {
  std::vector<std::string> inputs;
  std::string format = "auto";  // auto (by extension) | brainvision | csv
  double fs = 0.0;              // required for csv inputs
  std::vector<std::string> channel_pattern;
  PreprocessConfig preprocess;
  DetectConfig detect;
  int method = 1;
  CleanOptions opts;
  std::string msf_path;  // externally produced MSF for methods 2/3
  MsfWeightMode msf_mode = MsfWeightMode::binary;
  double ramp_s = 0.0;
  std::string output_dir;
  bool emit_cleaned_csv = true;
  bool emit_correlation_csv = true;
  bool emit_correlation_svg = false;
  bool emit_signal_svg = false;
  std::vector<std::string> plot_channels;
  double plot_t0 = 0.0;
  double plot_t1 = 0.0;  // t1 <= t0 means an automatic window
};

// Apply a config file onto cfg. Keys mirror the documented names (dataset,
// channel, refchannel, demean, detrend, lpfreq, hpfreq, filtdir, method,
// cutoff, bandlo, bandhi, order, artpadding, trlpadding, seed, ...);
// '#' starts a comment; unknown keys are config errors.
void apply_config_file(RunConfig& cfg, const std::string& path);

// The batch front end behind the `eegclean` binary. Subcommands: clean,
// detect, synth, report. Returns the exit code: 0 success, 1 configuration
// error, 2 I/O error, 3 pipeline error; every failure prints exactly one
// diagnostic line to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eegclean
