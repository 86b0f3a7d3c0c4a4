#pragma once

#include <stdexcept>
#include <string>

namespace eegclean {

// File-level problems: missing files, unparseable headers, short payloads.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing configuration (CLI flags, config files).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace eegclean
