#include "eegclean/csv_io.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/util.hpp"

#include <algorithm>
#include <fstream>

namespace eegclean {

namespace {

bool row_is_numeric(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    try {
      parse_double_strict(c);
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

}  // namespace

Recording load_csv(const std::string& path, double fs, std::vector<std::string> labels,
                   CsvOrientation orient) {
  if (!(fs > 0.0)) throw std::invalid_argument("csv: fs must be > 0");
  std::ifstream f(path);
  if (!f) throw io_error("csv: cannot open '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split(line, ','));
  }
  if (rows.empty()) throw io_error("csv: '" + path + "' contains no data");

  // Header detection only makes sense when channels are columns.
  std::vector<std::string> header;
  if (orient == CsvOrientation::channels_in_columns && !row_is_numeric(rows.front())) {
    for (auto& c : rows.front()) header.push_back(trim(c));
    rows.erase(rows.begin());
    if (rows.empty()) throw io_error("csv: '" + path + "' has a header but no data rows");
  }

  const size_t width = rows.front().size();
  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw io_error("csv: ragged row " + std::to_string(r + 1) + " in '" + path + "' (" +
                     std::to_string(rows[r].size()) + " cells, expected " +
                     std::to_string(width) + ")");
    }
    for (size_t c = 0; c < width; ++c) {
      try {
        table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            parse_double_strict(rows[r][c]);
      } catch (const std::exception& e) {
        throw io_error("csv: row " + std::to_string(r + 1) + " col " + std::to_string(c + 1) +
                       " in '" + path + "': " + e.what());
      }
    }
  }

  Recording rec;
  rec.fs = fs;
  if (orient == CsvOrientation::channels_in_columns) {
    rec.trials.push_back(table.transpose());
  } else {
    rec.trials.push_back(std::move(table));
  }

  const auto n = rec.trials.front().rows();
  if (!labels.empty()) {
    if (static_cast<Eigen::Index>(labels.size()) != n) {
      throw io_error("csv: " + std::to_string(labels.size()) + " labels given for " +
                     std::to_string(n) + " channels");
    }
    rec.labels = std::move(labels);
  } else if (!header.empty()) {
    if (static_cast<Eigen::Index>(header.size()) != n) {
      throw io_error("csv: header has " + std::to_string(header.size()) + " labels for " +
                     std::to_string(n) + " channels");
    }
    rec.labels = std::move(header);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) rec.labels.push_back("ch" + std::to_string(i + 1));
  }

  // EOG designation only where the labels actually exist.
  std::vector<std::string> eog;
  for (const auto& l : rec.eog_labels) {
    if (rec.has_channel(l)) eog.push_back(l);
  }
  rec.eog_labels = std::move(eog);
  rec.validate();
  return rec;
}

void save_csv(const Recording& rec, const std::string& path, CsvOrientation orient,
              bool with_header) {
  std::ofstream f(path);
  if (!f) throw io_error("csv: cannot write '" + path + "'");

  const Concatenated cat = concatenate_trials(rec);
  const auto& m = cat.data;

  if (orient == CsvOrientation::channels_in_columns) {
    if (with_header) {
      for (Eigen::Index c = 0; c < m.rows(); ++c) {
        if (c) f << ',';
        f << rec.labels[static_cast<size_t>(c)];
      }
      f << '\n';
    }
    for (Eigen::Index s = 0; s < m.cols(); ++s) {
      for (Eigen::Index c = 0; c < m.rows(); ++c) {
        if (c) f << ',';
        f << format_double(m(c, s));
      }
      f << '\n';
    }
  } else {
    for (Eigen::Index c = 0; c < m.rows(); ++c) {
      for (Eigen::Index s = 0; s < m.cols(); ++s) {
        if (s) f << ',';
        f << format_double(m(c, s));
      }
      f << '\n';
    }
  }
  if (!f) throw io_error("csv: write to '" + path + "' failed");
}

}  // namespace eegclean
