#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace eegclean {

std::string trim(const std::string& s);
std::string to_lower(std::string s);
bool starts_with(const std::string& s, const std::string& prefix);

// Split on a delimiter; fields are not trimmed.
std::vector<std::string> split(const std::string& s, char delim);

// Shortest decimal form that round-trips a double exactly ("%.17g").
std::string format_double(double v);

// Locale-independent strict parse; throws std::runtime_error on leftovers.
double parse_double_strict(const std::string& s);

// Deterministic scalar draws on top of std::mt19937. The standard pins the
// engine bit-exactly but not the distributions, so these are hand-rolled to
// keep seeded outputs identical across standard libraries.
inline double uniform01(std::mt19937& rng) {
  return (static_cast<double>(rng()) + 0.5) * (1.0 / 4294967296.0);
}

inline double uniform_in(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller; consumes two engine draws per value.
double gaussian(std::mt19937& rng);

}  // namespace eegclean
