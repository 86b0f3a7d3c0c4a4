#include "eegclean/selection.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/util.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace eegclean {

namespace {

Eigen::MatrixXd pearson_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             std::vector<std::string>* warnings, const char* a_name,
                             const char* b_name) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("corrcoeff: concatenated lengths differ (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) +
                                ")");
  }
  if (a.cols() < 2) throw std::invalid_argument("corrcoeff: need at least 2 samples");

  const Eigen::MatrixXd ac = a.colwise() - a.rowwise().mean();
  const Eigen::MatrixXd bc = b.colwise() - b.rowwise().mean();
  const Eigen::VectorXd a_norm = ac.rowwise().norm();
  const Eigen::VectorXd b_norm = bc.rowwise().norm();

  auto warn_degenerate = [&](const char* side, Eigen::Index row) {
    if (warnings) {
      warnings->push_back(std::string("corrcoeff: ") + side + " row " + std::to_string(row) +
                          " has zero variance; its coefficients are set to 0");
    }
  };

  Eigen::MatrixXd r(a.rows(), b.rows());
  std::vector<bool> a_warned(static_cast<size_t>(a.rows()), false);
  std::vector<bool> b_warned(static_cast<size_t>(b.rows()), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      if (a_norm[i] == 0.0 || b_norm[j] == 0.0) {
        if (a_norm[i] == 0.0 && !a_warned[static_cast<size_t>(i)]) {
          warn_degenerate(a_name, i);
          a_warned[static_cast<size_t>(i)] = true;
        }
        if (b_norm[j] == 0.0 && !b_warned[static_cast<size_t>(j)]) {
          warn_degenerate(b_name, j);
          b_warned[static_cast<size_t>(j)] = true;
        }
        r(i, j) = 0.0;
        continue;
      }
      r(i, j) = ac.row(i).dot(bc.row(j)) / (a_norm[i] * b_norm[j]);
    }
  }
  return r;
}

Eigen::MatrixXd concat(const std::vector<Eigen::MatrixXd>& trials) {
  Eigen::Index total = 0;
  for (const auto& t : trials) total += t.cols();
  if (trials.empty() || total == 0) throw std::invalid_argument("corrcoeff: no samples");
  Eigen::MatrixXd out(trials.front().rows(), total);
  Eigen::Index at = 0;
  for (const auto& t : trials) {
    out.middleCols(at, t.cols()) = t;
    at += t.cols();
  }
  return out;
}

double median_of(std::vector<double> v) {
  const size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Eigen::MatrixXd corrcoeff_matrix(const Recording& eog, const Components& signals,
                                 std::vector<std::string>* warnings) {
  return pearson_rows(concat(eog.trials), concat(signals.trials), warnings, "eog", "component");
}

Eigen::MatrixXd corrcoeff_matrix(const Recording& eog, const Recording& signals,
                                 std::vector<std::string>* warnings) {
  return pearson_rows(concat(eog.trials), concat(signals.trials), warnings, "eog", "signal");
}

Eigen::VectorXd sum_abs_rows(const Eigen::MatrixXd& matrix) {
  return matrix.cwiseAbs().colwise().sum().transpose();
}

OutlierSelection select_outlier_components(const Eigen::VectorXd& abs_sums,
                                           double mad_multiplier) {
  const Eigen::Index k = abs_sums.size();
  if (k < 1) throw std::invalid_argument("select: need at least one component");

  std::vector<double> values(abs_sums.data(), abs_sums.data() + k);
  const double med = median_of(values);
  std::vector<double> dev(values.size());
  for (size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
  const double mad = 1.4826 * median_of(dev);
  const double fence = med + mad_multiplier * mad;

  OutlierSelection sel;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (abs_sums[j] > fence) sel.selected.push_back(static_cast<int>(j));
  }
  sel.sorted_order.resize(static_cast<size_t>(k));
  std::iota(sel.sorted_order.begin(), sel.sorted_order.end(), 0);
  std::stable_sort(sel.sorted_order.begin(), sel.sorted_order.end(),
                   [&](int a, int b) { return abs_sums[a] > abs_sums[b]; });
  return sel;
}

CorrelationReport make_correlation_report(std::vector<std::string> eog_labels,
                                          Eigen::MatrixXd matrix, double mad_multiplier) {
  CorrelationReport report;
  report.eog_labels = std::move(eog_labels);
  report.matrix = std::move(matrix);
  report.abs_sums = sum_abs_rows(report.matrix);
  auto sel = select_outlier_components(report.abs_sums, mad_multiplier);
  report.selected = std::move(sel.selected);
  report.sorted_order = std::move(sel.sorted_order);
  report.cutoff_rule =
      "median + " + format_double(mad_multiplier) + " * 1.4826 * MAD (upper tail)";
  return report;
}

void save_correlation_report(const CorrelationReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("report: cannot write '" + path + "'");
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
    f << "corr," << (i < static_cast<Eigen::Index>(report.eog_labels.size())
                         ? report.eog_labels[static_cast<size_t>(i)]
                         : ("row" + std::to_string(i)));
    for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) {
      f << ',' << format_double(report.matrix(i, j));
    }
    f << '\n';
  }
  f << "abs_sum";
  for (Eigen::Index j = 0; j < report.abs_sums.size(); ++j) {
    f << ',' << format_double(report.abs_sums[j]);
  }
  f << "\nsorted_order";
  for (int j : report.sorted_order) f << ',' << j;
  f << "\nselected";
  for (int j : report.selected) f << ',' << j;
  f << "\ncutoff_rule," << report.cutoff_rule << "\n";
  if (!f) throw io_error("report: write to '" + path + "' failed");
}

}  // namespace eegclean
