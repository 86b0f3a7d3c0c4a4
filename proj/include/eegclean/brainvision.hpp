#pragma once

#include "eegclean/recording.hpp"

#include <string>

namespace eegclean {

// Load a BrainVision dataset from its .vhdr header. Supports BINARY data in
// INT_16 / IEEE_FLOAT_32 formats, MULTIPLEXED or VECTORIZED orientation.
// Samples are scaled into microvolts by per-channel resolution (and unit,
// when one of uV/mV/V is declared). fs = 1e6 / SamplingInterval(us).
//
// Trials come from "New Segment" markers in the referenced .vmrk; without a
// marker file the whole recording is a single trial.
//
// Throws io_error on missing files, missing/corrupt header keys, a payload
// size inconsistent with the channel count, or an unsupported format code.
Recording load_brainvision(const std::string& header_path);

}  // namespace eegclean
