#pragma once

#include <stdexcept>

namespace pmf {

// Invalid parameter values or inconsistent configuration. The CLI maps
// these to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files (config or CSV). The CLI maps these to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failures. Exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pmf
