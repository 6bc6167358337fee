#pragma once

#include <stdexcept>
#include <string>

namespace tinysiamese {

// File-format and input-data problems (bad magic, truncation, mixed
// dimensions, malformed text rows). The CLI maps these to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tinysiamese
