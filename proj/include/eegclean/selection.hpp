#pragma once

#include "eegclean/ica.hpp"
#include "eegclean/recording.hpp"

#include <string>
#include <vector>

namespace eegclean {

// EOG x component correlation evidence behind a rejection decision.
struct CorrelationReport {
  std::vector<std::string> eog_labels;  // one per matrix row
  Eigen::MatrixXd matrix;               // n_eog x k Pearson coefficients
  Eigen::VectorXd abs_sums;             // per component, sum of |coef| down the rows
  std::vector<int> sorted_order;        // components by descending abs_sum
  std::vector<int> selected;            // ascending component indices
  std::string cutoff_rule;
};

// Pearson coefficients between every EOG row and every signal row, computed
// over trial-concatenated data. A zero-variance row on either side yields
// coefficient 0 (with a warning) instead of NaN.
Eigen::MatrixXd corrcoeff_matrix(const Recording& eog, const Components& signals,
                                 std::vector<std::string>* warnings = nullptr);
Eigen::MatrixXd corrcoeff_matrix(const Recording& eog, const Recording& signals,
                                 std::vector<std::string>* warnings = nullptr);

// Column-wise sum of absolute values.
Eigen::VectorXd sum_abs_rows(const Eigen::MatrixXd& matrix);

struct OutlierSelection {
  std::vector<int> selected;      // ascending
  std::vector<int> sorted_order;  // descending value, ties by ascending index
};

// Upper-tail outliers: value > median + multiplier * 1.4826 * MAD. All-equal
// input has MAD 0 and selects nothing.
OutlierSelection select_outlier_components(const Eigen::VectorXd& abs_sums,
                                           double mad_multiplier = 3.0);

// Assemble matrix -> sums -> selection into one report.
CorrelationReport make_correlation_report(std::vector<std::string> eog_labels,
                                          Eigen::MatrixXd matrix, double mad_multiplier = 3.0);

// CSV serialization of the full report (matrix, sums, order, selection).
void save_correlation_report(const CorrelationReport& report, const std::string& path);

}  // namespace eegclean
