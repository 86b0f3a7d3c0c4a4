#pragma once

#include "eegclean/methods.hpp"
#include "eegclean/msf.hpp"
#include "eegclean/recording.hpp"

#include <string>
#include <utility>
#include <vector>

namespace eegclean {

// Writes dir/correlation_report.csv with one row per component of the
// before-decomposition: component,abs_sum_before,abs_sum_after,selected.
// The cleaned data can re-decompose into fewer components; missing after
// values are written as 0. Also writes dir/correlation.svg (paired bars,
// selected components highlighted) when with_svg is set.
void emit_correlation_report(const CleanResult& result, const std::string& dir,
                             bool with_svg = true);

// Writes dir/signals.svg: stacked panels of the EOG channels (with optional
// MSF shading), the requested original channels, and the same channels after
// cleaning, over window = (t0, t1) seconds of the concatenated timeline.
// Errors on an empty window, a window outside the data, or unknown channels.
void emit_signal_plot(const Recording& before, const Recording& after,
                      const std::vector<std::string>& channels,
                      std::pair<double, double> window, const std::string& dir,
                      const Msf* msf = nullptr);

}  // namespace eegclean
