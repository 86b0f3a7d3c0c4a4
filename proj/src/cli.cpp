#include "eegclean/cli.hpp"

#include "eegclean/brainvision.hpp"
#include "eegclean/csv_io.hpp"
#include "eegclean/errors.hpp"
#include "eegclean/report.hpp"
#include "eegclean/synth.hpp"
#include "eegclean/util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace eegclean {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& item : split(value, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

bool parse_yes_no(const std::string& value, const std::string& key) {
  const std::string v = to_lower(trim(value));
  if (v == "yes" || v == "true" || v == "1" || v == "on") return true;
  if (v == "no" || v == "false" || v == "0" || v == "off") return false;
  throw config_error("config: key '" + key + "' expects yes/no, got '" + value + "'");
}

double parse_num(const std::string& value, const std::string& key) {
  try {
    return parse_double_strict(value);
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

FilterDirection parse_direction(const std::string& value) {
  const std::string v = to_lower(trim(value));
  if (v == "onepass") return FilterDirection::onepass;
  if (v == "twopass") return FilterDirection::twopass;
  throw config_error("config: filter direction must be onepass or twopass, got '" + value + "'");
}

void apply_emit_list(RunConfig& cfg, const std::string& value) {
  cfg.emit_cleaned_csv = cfg.emit_correlation_csv = false;
  cfg.emit_correlation_svg = cfg.emit_signal_svg = false;
  for (const auto& item : parse_list(value)) {
    if (item == "cleaned_csv") cfg.emit_cleaned_csv = true;
    else if (item == "correlation_csv") cfg.emit_correlation_csv = true;
    else if (item == "correlation_svg") cfg.emit_correlation_svg = true;
    else if (item == "signal_svg") cfg.emit_signal_svg = true;
    else throw config_error("config: unknown emit target '" + item + "'");
  }
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("config: cannot open '" + path + "'");
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw config_error("config: line " + std::to_string(lineno) + " of '" + path +
                         "' is not key = value");
    }
    const std::string key = to_lower(trim(t.substr(0, eq)));
    const std::string value = trim(t.substr(eq + 1));

    if (key == "dataset") cfg.inputs = parse_list(value);
    else if (key == "format") cfg.format = to_lower(value);
    else if (key == "fs") cfg.fs = parse_num(value, key);
    else if (key == "channel") cfg.channel_pattern = parse_list(value);
    else if (key == "refchannel") cfg.preprocess.ref_label = value;
    else if (key == "demean") cfg.preprocess.demean = parse_yes_no(value, key);
    else if (key == "detrend") cfg.preprocess.detrend = parse_yes_no(value, key);
    else if (key == "lpfreq") cfg.preprocess.lp_cutoff_hz = parse_num(value, key);
    else if (key == "hpfreq") cfg.preprocess.hp_cutoff_hz = parse_num(value, key);
    else if (key == "filtdir") cfg.preprocess.direction = parse_direction(value);
    else if (key == "method") cfg.method = static_cast<int>(parse_num(value, key));
    else if (key == "detectchannels") cfg.detect.channels = parse_list(value);
    else if (key == "cutoff") cfg.detect.cutoff = parse_num(value, key);
    else if (key == "bandlo") cfg.detect.band_lo_hz = parse_num(value, key);
    else if (key == "bandhi") cfg.detect.band_hi_hz = parse_num(value, key);
    else if (key == "order") cfg.detect.order = static_cast<int>(parse_num(value, key));
    else if (key == "artpadding") cfg.detect.artifact_pad_s = parse_num(value, key);
    else if (key == "trlpadding") cfg.detect.trial_pad_s = parse_num(value, key);
    else if (key == "seed") cfg.opts.ica.seed = static_cast<std::uint32_t>(parse_num(value, key));
    else if (key == "maxiter") cfg.opts.ica.max_iter = static_cast<int>(parse_num(value, key));
    else if (key == "tol") cfg.opts.ica.tol = parse_num(value, key);
    else if (key == "madmult") cfg.opts.mad_multiplier = parse_num(value, key);
    else if (key == "includeeog") cfg.opts.include_eog_in_ica = parse_yes_no(value, key);
    else if (key == "msf") cfg.msf_path = value;
    else if (key == "msfmode") cfg.msf_mode = to_lower(value) == "ramp" ? MsfWeightMode::linear_ramp
                                                                        : MsfWeightMode::binary;
    else if (key == "rampsec") cfg.ramp_s = parse_num(value, key);
    else if (key == "outdir") cfg.output_dir = value;
    else if (key == "emit") apply_emit_list(cfg, value);
    else if (key == "plotchannels") cfg.plot_channels = parse_list(value);
    else if (key == "plotwindow") {
      const auto parts = split(value, ':');
      if (parts.size() != 2) throw config_error("config: plotwindow expects t0:t1 seconds");
      cfg.plot_t0 = parse_num(parts[0], key);
      cfg.plot_t1 = parse_num(parts[1], key);
    } else {
      throw config_error("config: unknown key '" + key + "' at line " + std::to_string(lineno) +
                         " of '" + path + "'");
    }
  }
}

namespace {

std::string default_outdir() {
  const char* env = std::getenv("EEGCLEAN_OUT");
  return (env != nullptr && *env != '\0') ? env : "out";
}

Recording load_input(const RunConfig& cfg, const std::string& path) {
  std::string format = cfg.format;
  if (format == "auto") {
    const std::string ext = to_lower(fs::path(path).extension().string());
    format = (ext == ".vhdr") ? "brainvision" : "csv";
  }
  if (format == "brainvision") return load_brainvision(path);
  if (format == "csv") {
    if (!(cfg.fs > 0.0)) {
      throw config_error("csv input '" + path + "' requires a sampling rate (--fs or fs=...)");
    }
    return load_csv(path, cfg.fs);
  }
  throw config_error("unknown input format '" + format + "' (brainvision or csv)");
}

Recording load_and_condition(const RunConfig& cfg, const std::string& path) {
  Recording rec = load_input(cfg, path);
  if (!cfg.channel_pattern.empty()) rec = select_channels(rec, cfg.channel_pattern);
  return preprocess_pipeline(rec, cfg.preprocess);
}

std::vector<std::string> default_plot_channels(const CleanResult& result) {
  std::vector<std::string> channels;
  for (const char* want : {"Fp1", "Fz"}) {
    if (std::find(result.model.channel_labels.begin(), result.model.channel_labels.end(),
                  want) != result.model.channel_labels.end()) {
      channels.push_back(want);
    }
  }
  for (const auto& l : result.model.channel_labels) {
    if (channels.size() >= 2) break;
    if (std::find(channels.begin(), channels.end(), l) == channels.end()) channels.push_back(l);
  }
  return channels;
}

void print_warnings(std::ostream& out, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) out << "eegclean: warning: " << w << "\n";
}

int cmd_clean(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.empty()) throw config_error("clean: no input given (--input or dataset=)");
  if (cfg.method < 1 || cfg.method > 3) {
    throw config_error("clean: method must be 1, 2 or 3, got " + std::to_string(cfg.method));
  }

  for (const auto& input : cfg.inputs) {
    const fs::path dir = cfg.inputs.size() == 1
                             ? fs::path(cfg.output_dir)
                             : fs::path(cfg.output_dir) / fs::path(input).stem();
    fs::create_directories(dir);

    std::vector<std::string> warnings;
    const Recording rec = load_and_condition(cfg, input);
    out << "eegclean: loaded '" << input << "' (" << rec.n_channels() << " ch, "
        << rec.n_trials() << " trial" << (rec.n_trials() == 1 ? "" : "s") << ", fs "
        << format_double(rec.fs) << " Hz)\n";

    CleanResult result;
    if (cfg.method == 1) {
      result = method1_full_removal(rec, cfg.opts);
    } else {
      Msf msf;
      if (!cfg.msf_path.empty()) {
        msf = load_msf(cfg.msf_path, rec.fs);
        msf.validate_against(rec);
      } else {
        msf = create_msf(rec, cfg.detect, &warnings);
      }
      if (cfg.msf_mode == MsfWeightMode::linear_ramp) {
        msf = msf_to_weights(msf, MsfWeightMode::linear_ramp, cfg.ramp_s);
      }
      result = cfg.method == 2 ? method2_partial_removal(rec, msf, cfg.opts)
                               : method3_artifact_free_unmixing(rec, msf, cfg.opts);
    }

    std::string selected;
    for (int j : result.report_before.selected) selected += " " + std::to_string(j);
    out << "eegclean: method " << cfg.method << " rejected component"
        << (result.report_before.selected.size() == 1 ? "" : "s") << ":"
        << (selected.empty() ? " none" : selected) << "\n";

    std::vector<std::string> written;
    if (cfg.emit_cleaned_csv) {
      save_csv(result.cleaned, (dir / "cleaned.csv").string());
      written.push_back("cleaned.csv");
    }
    if (cfg.emit_correlation_csv || cfg.emit_correlation_svg) {
      emit_correlation_report(result, dir.string(), cfg.emit_correlation_svg);
      written.push_back("correlation_report.csv");
      if (cfg.emit_correlation_svg) written.push_back("correlation.svg");
    }
    if (result.msf) {
      save_msf(*result.msf, (dir / "msf.csv").string());
      written.push_back("msf.csv");
    }
    if (cfg.emit_signal_svg) {
      const std::vector<std::string> channels =
          cfg.plot_channels.empty() ? default_plot_channels(result) : cfg.plot_channels;
      const double span =
          static_cast<double>(result.cleaned.total_samples()) / result.cleaned.fs;
      const std::pair<double, double> window =
          cfg.plot_t1 > cfg.plot_t0 ? std::pair{cfg.plot_t0, cfg.plot_t1}
                                    : std::pair{0.0, std::min(5.0, span)};
      emit_signal_plot(rec, result.cleaned, channels, window, dir.string(),
                       result.msf ? &*result.msf : nullptr);
      written.push_back("signals.svg");
    }

    print_warnings(out, warnings);
    print_warnings(out, result.warnings);
    out << "eegclean: wrote";
    for (const auto& w : written) out << " " << (dir / w).string();
    out << "\n";
  }
  return 0;
}

int cmd_detect(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.empty()) throw config_error("detect: no input given (--input or dataset=)");
  for (const auto& input : cfg.inputs) {
    const fs::path dir = cfg.inputs.size() == 1
                             ? fs::path(cfg.output_dir)
                             : fs::path(cfg.output_dir) / fs::path(input).stem();
    fs::create_directories(dir);

    std::vector<std::string> warnings;
    const Recording rec = load_and_condition(cfg, input);
    Msf msf = create_msf(rec, cfg.detect, &warnings);
    if (cfg.msf_mode == MsfWeightMode::linear_ramp) {
      msf = msf_to_weights(msf, MsfWeightMode::linear_ramp, cfg.ramp_s);
    }
    save_msf(msf, (dir / "msf.csv").string());

    print_warnings(out, warnings);
    const double fraction = static_cast<double>(msf.flagged_samples()) /
                            static_cast<double>(std::max<Eigen::Index>(1, msf.total_samples()));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
    out << "eegclean: flagged " << buf << " of " << msf.total_samples() << " samples; wrote "
        << (dir / "msf.csv").string() << "\n";
  }
  return 0;
}

int cmd_synth(const SynthSpec& spec, const std::string& outdir, std::ostream& out) {
  const SynthResult synth = synth_contaminated_recording(spec);
  fs::create_directories(outdir);
  const fs::path dir(outdir);

  save_csv(synth.recording, (dir / "recording.csv").string());

  auto save_matrix = [&](const Eigen::MatrixXd& m, const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw io_error("synth: cannot write '" + (dir / name).string() + "'");
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) f << ',';
        f << format_double(m(r, c));
      }
      f << '\n';
    }
  };
  save_matrix(synth.truth.mixing, "truth_mixing.csv");
  save_matrix(synth.truth.blink_template.transpose(), "truth_blink_template.csv");
  Eigen::MatrixXd mask(1, static_cast<Eigen::Index>(synth.truth.blink_mask.size()));
  for (size_t i = 0; i < synth.truth.blink_mask.size(); ++i) {
    mask(0, static_cast<Eigen::Index>(i)) = synth.truth.blink_mask[i];
  }
  save_matrix(mask, "truth_blink_mask.csv");

  out << "eegclean: synthesized " << synth.recording.n_channels() << " ch x "
      << synth.recording.total_samples() << " samples (fs " << format_double(spec.fs)
      << " Hz, " << spec.blink.count << " blinks, seed " << spec.seed << ") into " << outdir
      << "\n";
  return 0;
}

struct ReportArgs {
  std::string original;
  std::string cleaned;
  std::string msf_path;
  double fs = 0.0;
  std::vector<std::string> channels;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string outdir;
};

int cmd_report(const ReportArgs& args, std::ostream& out) {
  if (!(args.fs > 0.0)) throw config_error("report: --fs is required for csv inputs");
  const Recording before = load_csv(args.original, args.fs);
  const Recording after = load_csv(args.cleaned, args.fs);
  Msf msf;
  const bool have_msf = !args.msf_path.empty();
  if (have_msf) {
    msf = load_msf(args.msf_path, args.fs);
    msf.validate_against(before);
  }
  const double span = static_cast<double>(before.total_samples()) / before.fs;
  const std::pair<double, double> window =
      args.t1 > args.t0 ? std::pair{args.t0, args.t1} : std::pair{0.0, std::min(5.0, span)};
  std::vector<std::string> channels = args.channels;
  if (channels.empty() && !before.labels.empty()) channels.push_back(before.labels.front());
  emit_signal_plot(before, after, channels, window, args.outdir, have_msf ? &msf : nullptr);
  out << "eegclean: wrote " << (fs::path(args.outdir) / "signals.svg").string() << "\n";
  return 0;
}

// Flags shared by clean and detect.
void add_pipeline_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("-i,--input", cfg.inputs, "input file(s): .vhdr or .csv");
  cmd->add_option("--format", cfg.format, "input format: auto|brainvision|csv");
  cmd->add_option("--fs", cfg.fs, "sampling rate in Hz (csv inputs)");
  cmd->add_option("--channel", cfg.channel_pattern,
                  "channel pattern, e.g. --channel all --channel -Audio");
  cmd->add_option("--refchannel", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    cfg.preprocess.ref_label = v.front();
    return true;
  }), "re-reference to this channel");
  cmd->add_flag("--demean", cfg.preprocess.demean, "subtract per-trial channel means");
  cmd->add_flag("--detrend", cfg.preprocess.detrend, "remove per-trial linear trends");
  cmd->add_option("--lpfreq", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    cfg.preprocess.lp_cutoff_hz = parse_num(v.front(), "lpfreq");
    return true;
  }), "low-pass cutoff in Hz");
  cmd->add_option("--hpfreq", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    cfg.preprocess.hp_cutoff_hz = parse_num(v.front(), "hpfreq");
    return true;
  }), "high-pass cutoff in Hz");
  cmd->add_option("--filtdir", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    cfg.preprocess.direction = parse_direction(v.front());
    return true;
  }), "FIR filter direction: onepass|twopass");
  cmd->add_option("--detect-channels", cfg.detect.channels, "MSF detection channels");
  cmd->add_option("--cutoff", cfg.detect.cutoff, "z-value threshold");
  cmd->add_option("--band-lo", cfg.detect.band_lo_hz, "detection band low edge (Hz)");
  cmd->add_option("--band-hi", cfg.detect.band_hi_hz, "detection band high edge (Hz)");
  cmd->add_option("--order", cfg.detect.order, "detection Butterworth order");
  cmd->add_option("--art-pad", cfg.detect.artifact_pad_s, "artifact padding (s)");
  cmd->add_option("--trl-pad", cfg.detect.trial_pad_s, "trial padding (s, must be 0)");
  cmd->add_option("--msf-mode", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    const std::string m = to_lower(v.front());
    if (m != "binary" && m != "ramp") return false;
    cfg.msf_mode = m == "ramp" ? MsfWeightMode::linear_ramp : MsfWeightMode::binary;
    return true;
  }), "MSF weighting: binary|ramp");
  cmd->add_option("--ramp-s", cfg.ramp_s, "ramp duration for --msf-mode ramp (s)");
  cmd->add_option("-o,--out", cfg.output_dir, "output directory (default $EEGCLEAN_OUT or out)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ICA-based removal of ocular artifacts from multichannel EEG"};
  app.name("eegclean");
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.output_dir = default_outdir();

  // The config file must apply before flag values so that flags win.
  for (size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (starts_with(args[i], "--config=")) path = args[i].substr(9);
    if (!path.empty()) {
      try {
        apply_config_file(cfg, path);
      } catch (const std::exception& e) {
        err << "eegclean: " << e.what() << "\n";
        return 1;
      }
    }
  }

  std::string config_path_sink;

  CLI::App* clean = app.add_subcommand("clean", "remove ocular artifacts (methods 1-3)");
  clean->add_option("--config", config_path_sink, "key=value config file");
  clean->add_option("-m,--method", cfg.method, "1 full, 2 MSF-gated partial, 3 artifact-free unmixing");
  add_pipeline_options(clean, cfg);
  clean->add_option("--msf", cfg.msf_path, "load the MSF from this csv instead of detecting");
  clean->add_option("--seed", cfg.opts.ica.seed, "FastICA seed");
  clean->add_option("--max-iter", cfg.opts.ica.max_iter, "FastICA iteration cap");
  clean->add_option("--tol", cfg.opts.ica.tol, "FastICA convergence tolerance");
  clean->add_option("--mad-mult", cfg.opts.mad_multiplier, "outlier fence multiplier");
  clean->add_flag("--include-eog", cfg.opts.include_eog_in_ica,
                  "include EOG channels in the decomposition");
  bool fig = false;
  clean->add_flag("--fig", fig, "also emit correlation and signal SVG figures");
  std::string emit_list;
  clean->add_option("--emit", emit_list,
                    "comma list of cleaned_csv,correlation_csv,correlation_svg,signal_svg");
  clean->add_option("--plot-channels", cfg.plot_channels, "channels for the signal figure");
  clean->add_option("--plot-window", CLI::callback_t([&cfg](const std::vector<std::string>& v) {
    const auto parts = split(v.front(), ':');
    if (parts.size() != 2) return false;
    cfg.plot_t0 = parse_num(parts[0], "plot-window");
    cfg.plot_t1 = parse_num(parts[1], "plot-window");
    return true;
  }), "figure window t0:t1 in seconds");

  CLI::App* detect = app.add_subcommand("detect", "emit the artifact membership function only");
  detect->add_option("--config", config_path_sink, "key=value config file");
  add_pipeline_options(detect, cfg);

  SynthSpec spec;
  std::string synth_out = cfg.output_dir;
  CLI::App* synth = app.add_subcommand("synth", "emit a synthetic contaminated dataset");
  synth->add_option("--channels", spec.n_channels, "EEG channel count (EOG pair appended)");
  synth->add_option("--sources", spec.n_sources, "brain source count");
  synth->add_option("--fs", spec.fs, "sampling rate (Hz)");
  synth->add_option("--duration", spec.duration_s, "duration (s)");
  synth->add_option("--blinks", spec.blink.count, "blink count");
  synth->add_option("--blink-width", spec.blink.width_s, "blink width (s)");
  synth->add_option("--blink-amp", spec.blink.amplitude_uv, "blink amplitude (uV)");
  synth->add_option("--noise", spec.noise_std_uv, "sensor noise std (uV)");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("-o,--out", synth_out, "output directory");

  ReportArgs report_args;
  report_args.outdir = cfg.output_dir;
  CLI::App* report = app.add_subcommand("report", "plot original vs cleaned signals");
  report->add_option("--original", report_args.original, "original recording csv")->required();
  report->add_option("--cleaned", report_args.cleaned, "cleaned recording csv")->required();
  report->add_option("--msf", report_args.msf_path, "msf csv for shading");
  report->add_option("--fs", report_args.fs, "sampling rate (Hz)");
  report->add_option("--channels", report_args.channels, "channels to plot");
  report->add_option("--window", CLI::callback_t([&report_args](const std::vector<std::string>& v) {
    const auto parts = split(v.front(), ':');
    if (parts.size() != 2) return false;
    report_args.t0 = parse_num(parts[0], "window");
    report_args.t1 = parse_num(parts[1], "window");
    return true;
  }), "window t0:t1 in seconds");
  report->add_option("-o,--out", report_args.outdir, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "eegclean: " << e.what() << "\n";
    return 1;
  }

  if (fig) cfg.emit_correlation_svg = cfg.emit_signal_svg = true;
  try {
    if (!emit_list.empty()) apply_emit_list(cfg, emit_list);
    if (clean->parsed()) return cmd_clean(cfg, out);
    if (detect->parsed()) return cmd_detect(cfg, out);
    if (synth->parsed()) return cmd_synth(spec, synth_out, out);
    if (report->parsed()) return cmd_report(report_args, out);
  } catch (const config_error& e) {
    err << "eegclean: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    err << "eegclean: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "eegclean: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace eegclean
