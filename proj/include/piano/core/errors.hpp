#pragma once

#include <stdexcept>
#include <string>

namespace piano {

// Invalid user-supplied configuration (bad counts, ranges, ids).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed on-disk artifact (bad magic, truncation, shape mismatch).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Out-of-range indexing into a series/grid.
struct BoundsError : std::runtime_error {
  explicit BoundsError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf detected during time integration or training.
struct BlowUpError : std::runtime_error {
  explicit BlowUpError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required upstream artifact (dataset, checkpoint) is missing.
struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace piano
