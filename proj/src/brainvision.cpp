#include "eegclean/brainvision.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/util.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace eegclean {

namespace {

// INI-like section -> ordered key/value pairs. BrainVision headers use ';'
// comments and are case-sensitive in practice.
using Sections = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

Sections parse_ini(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("brainvision: cannot open '" + path + "'");
  Sections sections;
  std::string section;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = t.substr(1, t.size() - 2);
      sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos || section.empty()) continue;
    sections[section].emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return sections;
}

std::string find_key(const Sections& s, const std::string& section, const std::string& key,
                     const std::string& header_path) {
  auto it = s.find(section);
  if (it == s.end()) {
    throw io_error("brainvision: '" + header_path + "' has no [" + section + "] section");
  }
  for (const auto& [k, v] : it->second) {
    if (k == key) return v;
  }
  throw io_error("brainvision: '" + header_path + "' missing key '" + key + "' in [" + section +
                 "]");
}

std::string find_key_or(const Sections& s, const std::string& section, const std::string& key,
                        const std::string& fallback) {
  auto it = s.find(section);
  if (it == s.end()) return fallback;
  for (const auto& [k, v] : it->second) {
    if (k == key) return v;
  }
  return fallback;
}

double unit_to_uv(const std::string& unit) {
  const std::string u = to_lower(trim(unit));
  if (u.empty() || u == "uv" || u == "\xc2\xb5v" || u == "\xce\xbcv") return 1.0;
  if (u == "mv") return 1e3;
  if (u == "v") return 1e6;
  throw io_error("brainvision: unsupported channel unit '" + unit + "'");
}

struct ChannelInfo {
  std::string name;
  double scale = 1.0;  // resolution * unit factor, counts -> uV
};

std::vector<Eigen::Index> read_segment_starts(const std::string& marker_path,
                                              Eigen::Index n_samples) {
  const Sections s = parse_ini(marker_path);
  std::vector<Eigen::Index> starts;
  auto it = s.find("Marker Infos");
  if (it == s.end()) return starts;
  for (const auto& [key, value] : it->second) {
    if (!starts_with(key, "Mk")) continue;
    const auto fields = split(value, ',');
    if (fields.size() < 3) continue;
    if (trim(fields[0]) != "New Segment") continue;
    long pos = 0;
    try {
      pos = std::stol(trim(fields[2]));
    } catch (const std::exception&) {
      throw io_error("brainvision: bad marker position in '" + marker_path + "': " + value);
    }
    // Marker positions are 1-based samples.
    if (pos >= 1 && pos <= n_samples) starts.push_back(pos - 1);
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  return starts;
}

}  // namespace

Recording load_brainvision(const std::string& header_path) {
  const Sections hdr = parse_ini(header_path);
  const std::filesystem::path base = std::filesystem::path(header_path).parent_path();

  const std::string data_format = find_key_or(hdr, "Common Infos", "DataFormat", "BINARY");
  if (to_lower(data_format) != "binary") {
    throw io_error("brainvision: unsupported DataFormat '" + data_format + "' (BINARY only)");
  }
  const std::string data_file = find_key(hdr, "Common Infos", "DataFile", header_path);
  const std::string orientation =
      to_lower(find_key_or(hdr, "Common Infos", "DataOrientation", "MULTIPLEXED"));
  if (orientation != "multiplexed" && orientation != "vectorized") {
    throw io_error("brainvision: unsupported DataOrientation '" + orientation + "'");
  }

  int n_channels = 0;
  double sampling_interval_us = 0.0;
  try {
    n_channels = std::stoi(find_key(hdr, "Common Infos", "NumberOfChannels", header_path));
    sampling_interval_us =
        parse_double_strict(find_key(hdr, "Common Infos", "SamplingInterval", header_path));
  } catch (const io_error&) {
    throw;
  } catch (const std::exception&) {
    throw io_error("brainvision: corrupt NumberOfChannels/SamplingInterval in '" + header_path +
                   "'");
  }
  if (n_channels <= 0 || !(sampling_interval_us > 0.0)) {
    throw io_error("brainvision: invalid channel count or sampling interval in '" + header_path +
                   "'");
  }

  const std::string binary_format = find_key(hdr, "Binary Infos", "BinaryFormat", header_path);
  int word_size = 0;
  if (to_lower(binary_format) == "int_16") {
    word_size = 2;
  } else if (to_lower(binary_format) == "ieee_float_32") {
    word_size = 4;
  } else {
    throw io_error("brainvision: unsupported BinaryFormat '" + binary_format +
                   "' (INT_16 or IEEE_FLOAT_32)");
  }

  // Channel infos: ChN = <Name>,<Reference>,<Resolution>,<Unit>
  std::vector<ChannelInfo> channels(static_cast<size_t>(n_channels));
  std::vector<bool> seen(static_cast<size_t>(n_channels), false);
  auto ch_section = hdr.find("Channel Infos");
  if (ch_section == hdr.end()) {
    throw io_error("brainvision: '" + header_path + "' has no [Channel Infos] section");
  }
  for (const auto& [key, value] : ch_section->second) {
    if (!starts_with(key, "Ch")) continue;
    int idx = 0;
    try {
      idx = std::stoi(key.substr(2));
    } catch (const std::exception&) {
      continue;
    }
    if (idx < 1 || idx > n_channels) {
      throw io_error("brainvision: channel key '" + key + "' out of range in '" + header_path +
                     "'");
    }
    const auto fields = split(value, ',');
    ChannelInfo info;
    info.name = fields.empty() ? "" : trim(fields[0]);
    if (info.name.empty()) {
      throw io_error("brainvision: empty channel name for '" + key + "' in '" + header_path +
                     "'");
    }
    double resolution = 1.0;
    if (fields.size() >= 3 && !trim(fields[2]).empty()) {
      try {
        resolution = parse_double_strict(fields[2]);
      } catch (const std::exception&) {
        throw io_error("brainvision: bad resolution for '" + key + "' in '" + header_path + "'");
      }
    }
    info.scale = resolution * unit_to_uv(fields.size() >= 4 ? fields[3] : "");
    channels[static_cast<size_t>(idx - 1)] = info;
    seen[static_cast<size_t>(idx - 1)] = true;
  }
  for (int i = 0; i < n_channels; ++i) {
    if (!seen[static_cast<size_t>(i)]) {
      throw io_error("brainvision: missing Ch" + std::to_string(i + 1) + " in '" + header_path +
                     "'");
    }
  }

  // Binary payload.
  const std::filesystem::path eeg_path = base / data_file;
  std::ifstream bin(eeg_path, std::ios::binary);
  if (!bin) throw io_error("brainvision: cannot open data file '" + eeg_path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)),
                          std::istreambuf_iterator<char>());
  const size_t frame = static_cast<size_t>(n_channels) * static_cast<size_t>(word_size);
  if (bytes.empty() || bytes.size() % frame != 0) {
    throw io_error("brainvision: data file '" + eeg_path.string() + "' has " +
                   std::to_string(bytes.size()) + " bytes, not a multiple of " +
                   std::to_string(frame) + " (channels x word size)");
  }
  const auto n_samples = static_cast<Eigen::Index>(bytes.size() / frame);

  auto raw_at = [&](Eigen::Index flat) -> double {
    const char* p = bytes.data() + static_cast<size_t>(flat) * word_size;
    if (word_size == 2) {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<double>(v);
    }
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  };

  Eigen::MatrixXd data(n_channels, n_samples);
  for (Eigen::Index c = 0; c < n_channels; ++c) {
    const double scale = channels[static_cast<size_t>(c)].scale;
    for (Eigen::Index s = 0; s < n_samples; ++s) {
      const Eigen::Index flat =
          orientation == "multiplexed" ? s * n_channels + c : c * n_samples + s;
      data(c, s) = raw_at(flat) * scale;
    }
  }

  Recording rec;
  rec.fs = 1e6 / sampling_interval_us;
  for (const auto& ch : channels) rec.labels.push_back(ch.name);

  // Trial segmentation from the marker file, when one is declared.
  const std::string marker_file = find_key_or(hdr, "Common Infos", "MarkerFile", "");
  std::vector<Eigen::Index> starts;
  if (!marker_file.empty()) {
    starts = read_segment_starts((base / marker_file).string(), n_samples);
  }
  if (starts.empty() || starts.front() != 0) starts.insert(starts.begin(), 0);
  for (size_t i = 0; i < starts.size(); ++i) {
    const Eigen::Index begin = starts[i];
    const Eigen::Index end = (i + 1 < starts.size()) ? starts[i + 1] : n_samples;
    if (end > begin) rec.trials.push_back(data.middleCols(begin, end - begin));
  }

  std::vector<std::string> eog;
  for (const auto& l : rec.eog_labels) {
    if (rec.has_channel(l)) eog.push_back(l);
  }
  rec.eog_labels = std::move(eog);
  rec.validate();
  return rec;
}

}  // namespace eegclean
