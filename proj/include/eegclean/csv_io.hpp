#pragma once

#include "eegclean/recording.hpp"

#include <string>
#include <vector>

namespace eegclean {

enum class CsvOrientation {
  channels_in_rows,     // one row per channel
  channels_in_columns,  // one column per channel, optional header row of labels
};

// Load a rectangular numeric table as a single-trial Recording.
// In column orientation a non-numeric first row is taken as the label header;
// explicit labels override it. Empty labels and no header fall back to
// "ch1".."chN". Throws io_error on ragged rows or non-numeric cells.
Recording load_csv(const std::string& path, double fs,
                   std::vector<std::string> labels = {},
                   CsvOrientation orient = CsvOrientation::channels_in_columns);

// Write a Recording (trials concatenated) so load_csv reads it back exactly.
// Values are printed with round-trip precision.
void save_csv(const Recording& rec, const std::string& path,
              CsvOrientation orient = CsvOrientation::channels_in_columns,
              bool with_header = true);

}  // namespace eegclean
