#pragma once

#include <stdexcept>
#include <string>

namespace pegdyn {

// Shape erosion by the clearance left no sample points.
struct EmptyFootprintError : std::runtime_error {
    explicit EmptyFootprintError(const std::string& msg) : std::runtime_error(msg) {}
};

// Contact normal force decreased while descending; the contact field is broken.
struct NonMonotoneFieldError : std::runtime_error {
    explicit NonMonotoneFieldError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file content. line is 1-based, 0 when unknown.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, long line = 0)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_number(line) {}
    long line_number;
};

struct VersionError : std::runtime_error {
    explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loss became non-finite.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pegdyn
