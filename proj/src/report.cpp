#include "eegclean/report.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace eegclean {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Svg {
  std::string body;
  double width;
  double height;

  Svg(double w, double h) : width(w), height(h) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    body += "<rect x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" width=\"" + f2(w) + "\" height=\"" +
            f2(h) + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) body += " fill-opacity=\"" + f2(opacity) + "\"";
    body += "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double w = 1.0) {
    body += "<line x1=\"" + f2(x1) + "\" y1=\"" + f2(y1) + "\" x2=\"" + f2(x2) + "\" y2=\"" +
            f2(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + f2(w) + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) body.push_back(' ');
      body += f2(pts[i].first) + "," + f2(pts[i].second);
    }
    body += "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& fill = "#333333", const char* anchor = "start") {
    body += "<text x=\"" + f2(x) + "\" y=\"" + f2(y) + "\" font-family=\"sans-serif\" font-size=\"" +
            std::to_string(size) + "\" fill=\"" + fill + "\" text-anchor=\"" + anchor + "\">" +
            xml_escape(s) + "</text>\n";
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw io_error("svg: cannot write '" + path + "'");
    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(width) << "\" height=\""
      << f2(height) << "\" viewBox=\"0 0 " << f2(width) << " " << f2(height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << f2(width) << "\" height=\"" << f2(height)
      << "\" fill=\"#ffffff\"/>\n"
      << body << "</svg>\n";
    if (!f) throw io_error("svg: write to '" + path + "' failed");
  }
};

// Min/max bin decimation keeps peaks while bounding the point count.
std::vector<std::pair<double, double>> trace_points(const Eigen::VectorXd& y, double x0,
                                                    double x_per_sample, double y_mid,
                                                    double y_scale) {
  const Eigen::Index n = y.size();
  std::vector<std::pair<double, double>> pts;
  const Eigen::Index max_pts = 4000;
  if (n <= max_pts) {
    pts.reserve(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      pts.emplace_back(x0 + x_per_sample * static_cast<double>(i), y_mid - y_scale * y[i]);
    }
    return pts;
  }
  const Eigen::Index bins = max_pts / 2;
  pts.reserve(static_cast<size_t>(bins) * 2);
  for (Eigen::Index b = 0; b < bins; ++b) {
    const Eigen::Index a = b * n / bins;
    const Eigen::Index e = std::max(a + 1, (b + 1) * n / bins);
    Eigen::Index imin = a;
    Eigen::Index imax = a;
    for (Eigen::Index i = a; i < e; ++i) {
      if (y[i] < y[imin]) imin = i;
      if (y[i] > y[imax]) imax = i;
    }
    const Eigen::Index first = std::min(imin, imax);
    const Eigen::Index second = std::max(imin, imax);
    pts.emplace_back(x0 + x_per_sample * static_cast<double>(first), y_mid - y_scale * y[first]);
    if (second != first) {
      pts.emplace_back(x0 + x_per_sample * static_cast<double>(second),
                       y_mid - y_scale * y[second]);
    }
  }
  return pts;
}

}  // namespace

void emit_correlation_report(const CleanResult& result, const std::string& dir, bool with_svg) {
  std::filesystem::create_directories(dir);
  const Eigen::Index k = result.report_before.abs_sums.size();
  const Eigen::Index k_after = result.report_after.abs_sums.size();

  {
    std::ofstream f(std::filesystem::path(dir) / "correlation_report.csv");
    if (!f) throw io_error("report: cannot write correlation_report.csv under '" + dir + "'");
    f << "component,abs_sum_before,abs_sum_after,selected\n";
    for (Eigen::Index j = 0; j < k; ++j) {
      const bool selected =
          std::find(result.report_before.selected.begin(), result.report_before.selected.end(),
                    static_cast<int>(j)) != result.report_before.selected.end();
      f << j << ',' << format_double(result.report_before.abs_sums[j]) << ','
        << format_double(j < k_after ? result.report_after.abs_sums[j] : 0.0) << ','
        << (selected ? 1 : 0) << '\n';
    }
    if (!f) throw io_error("report: write of correlation_report.csv failed");
  }

  if (!with_svg) return;

  const double margin = 48.0;
  const double plot_w = std::max(320.0, 14.0 * static_cast<double>(k) + 40.0);
  const double plot_h = 220.0;
  Svg svg(plot_w + 2 * margin, plot_h + 2 * margin + 20.0);

  double top = std::max(result.report_before.abs_sums.maxCoeff(),
                        k_after > 0 ? result.report_after.abs_sums.maxCoeff() : 0.0);
  if (!(top > 0.0)) top = 1.0;

  const double x0 = margin;
  const double y0 = margin + plot_h;
  svg.line(x0, y0, x0 + plot_w, y0, "#333333");
  svg.line(x0, y0, x0, margin, "#333333");
  svg.text(x0, margin - 10.0,
           "Sum of |corr(IC, EOG)| before and after " + to_string(result.method), 13);
  svg.text(x0 - 6.0, margin + 4.0, format_double(top).substr(0, 5), 10, "#333333", "end");
  svg.text(x0 - 6.0, y0 + 4.0, "0", 10, "#333333", "end");
  svg.text(x0 + plot_w / 2.0, y0 + 30.0, "component", 11, "#333333", "middle");

  const double group = plot_w / static_cast<double>(k);
  const double bar = group * 0.38;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double gx = x0 + group * static_cast<double>(j);
    const double before_h = plot_h * result.report_before.abs_sums[j] / top;
    svg.rect(gx + group * 0.08, y0 - before_h, bar, before_h, "#7f7f7f");
    if (j < k_after) {
      const double after_h = plot_h * result.report_after.abs_sums[j] / top;
      svg.rect(gx + group * 0.52, y0 - after_h, bar, after_h, "#1f77b4");
    }
    const bool selected =
        std::find(result.report_before.selected.begin(), result.report_before.selected.end(),
                  static_cast<int>(j)) != result.report_before.selected.end();
    if (selected) {
      svg.rect(gx + group * 0.05, margin, group * 0.9, plot_h, "#d62728", 0.10);
    }
    if (k <= 40) {
      svg.text(gx + group * 0.5, y0 + 14.0, std::to_string(j), 9, "#333333", "middle");
    }
  }
  svg.rect(x0 + plot_w - 120.0, margin + 6.0, 10.0, 10.0, "#7f7f7f");
  svg.text(x0 + plot_w - 106.0, margin + 15.0, "before", 10);
  svg.rect(x0 + plot_w - 120.0, margin + 22.0, 10.0, 10.0, "#1f77b4");
  svg.text(x0 + plot_w - 106.0, margin + 31.0, "after", 10);
  svg.write((std::filesystem::path(dir) / "correlation.svg").string());
}

void emit_signal_plot(const Recording& before, const Recording& after,
                      const std::vector<std::string>& channels,
                      std::pair<double, double> window, const std::string& dir,
                      const Msf* msf) {
  if (channels.empty()) throw std::invalid_argument("plot: no channels requested");
  if (!(window.second > window.first)) throw std::invalid_argument("plot: empty window");
  if (msf != nullptr) msf->validate_against(before);

  const Concatenated cat_before = concatenate_trials(before);
  const Concatenated cat_after = concatenate_trials(after);
  const double span_s = static_cast<double>(cat_before.data.cols()) / before.fs;
  if (window.first < 0.0 || window.second > span_s) {
    throw std::invalid_argument("plot: window [" + format_double(window.first) + ", " +
                                format_double(window.second) + "] s outside data span of " +
                                format_double(span_s) + " s");
  }

  const auto s0 = static_cast<Eigen::Index>(std::llround(window.first * before.fs));
  const auto s1 = std::min<Eigen::Index>(cat_before.data.cols(),
                                         static_cast<Eigen::Index>(std::llround(window.second * before.fs)));
  const Eigen::Index len = s1 - s0;
  if (len < 2) throw std::invalid_argument("plot: window shorter than 2 samples");

  std::vector<std::string> eog = before.present_eog_labels();
  for (const auto& c : channels) {
    if (!before.has_channel(c) || !after.has_channel(c)) {
      throw std::invalid_argument("plot: no channel named '" + c + "'");
    }
  }

  const double margin = 56.0;
  const double panel_w = 760.0;
  const double panel_h = 130.0;
  const double panel_gap = 26.0;
  const int n_panels = 3;
  Svg svg(panel_w + 2 * margin,
          margin + n_panels * (panel_h + panel_gap) + 30.0);

  struct PanelTrace {
    std::string label;
    Eigen::VectorXd y;
    const char* color;
  };

  auto draw_panel = [&](int index, const std::string& title,
                        const std::vector<PanelTrace>& traces, bool shade_msf) {
    const double py = margin + index * (panel_h + panel_gap);
    const double y_mid = py + panel_h / 2.0;
    svg.text(margin, py - 8.0, title, 12);
    svg.rect(margin, py, panel_w, panel_h, "#fafafa");
    svg.line(margin, y_mid, margin + panel_w, y_mid, "#dddddd");

    if (shade_msf && msf != nullptr) {
      Eigen::VectorXd weights(cat_before.data.cols());
      Eigen::Index at = 0;
      for (const auto& t : msf->trials) {
        weights.segment(at, t.size()) = t;
        at += t.size();
      }
      Eigen::Index i = s0;
      while (i < s1) {
        if (weights[i] > 0.0) {
          Eigen::Index j = i;
          while (j < s1 && weights[j] > 0.0) ++j;
          const double x_a = margin + panel_w * static_cast<double>(i - s0) / static_cast<double>(len);
          const double x_b = margin + panel_w * static_cast<double>(j - s0) / static_cast<double>(len);
          svg.rect(x_a, py, std::max(0.5, x_b - x_a), panel_h, "#d62728", 0.15);
          i = j;
        } else {
          ++i;
        }
      }
    }

    double peak = 0.0;
    for (const auto& t : traces) peak = std::max(peak, t.y.cwiseAbs().maxCoeff());
    if (!(peak > 0.0)) peak = 1.0;
    const double y_scale = (panel_h / 2.0 - 4.0) / peak;
    const double x_per_sample = panel_w / static_cast<double>(len - 1);

    double legend_x = margin + 8.0;
    for (const auto& t : traces) {
      svg.polyline(trace_points(t.y, margin, x_per_sample, y_mid, y_scale), t.color);
      svg.text(legend_x, py + 12.0, t.label, 10, t.color);
      legend_x += 52.0;
    }
    svg.text(margin - 6.0, py + 10.0, "+" + f2(peak) + " uV", 9, "#333333", "end");
    svg.text(margin - 6.0, py + panel_h, "-" + f2(peak) + " uV", 9, "#333333", "end");
  };

  std::vector<PanelTrace> eog_traces;
  for (size_t i = 0; i < eog.size(); ++i) {
    eog_traces.push_back({eog[i],
                          cat_before.data.row(before.channel_index(eog[i])).segment(s0, len),
                          kPalette[i % std::size(kPalette)]});
  }
  if (eog_traces.empty()) {
    // No designated EOG: show the first requested channel as context instead.
    eog_traces.push_back({channels.front(),
                          cat_before.data.row(before.channel_index(channels.front()))
                              .segment(s0, len),
                          kPalette[0]});
  }
  draw_panel(0, msf ? "EOG with MSF shading" : "EOG", eog_traces, true);

  std::vector<PanelTrace> orig_traces;
  std::vector<PanelTrace> clean_traces;
  for (size_t i = 0; i < channels.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    orig_traces.push_back(
        {channels[i], cat_before.data.row(before.channel_index(channels[i])).segment(s0, len),
         color});
    clean_traces.push_back(
        {channels[i], cat_after.data.row(after.channel_index(channels[i])).segment(s0, len),
         color});
  }
  draw_panel(1, "original", orig_traces, false);
  draw_panel(2, "cleaned", clean_traces, false);

  // Shared time axis under the last panel.
  const double axis_y = margin + n_panels * (panel_h + panel_gap) + 2.0;
  svg.line(margin, axis_y, margin + panel_w, axis_y, "#333333");
  for (int tick = 0; tick <= 4; ++tick) {
    const double frac = static_cast<double>(tick) / 4.0;
    const double x = margin + panel_w * frac;
    svg.line(x, axis_y, x, axis_y + 4.0, "#333333");
    svg.text(x, axis_y + 16.0, f2(window.first + frac * (window.second - window.first)) + " s",
             9, "#333333", "middle");
  }

  std::filesystem::create_directories(dir);
  svg.write((std::filesystem::path(dir) / "signals.svg").string());
}

}  // namespace eegclean
