#pragma once

#include <stdexcept>
#include <string>

namespace mpskit {

// Error taxonomy mirrors the CLI exit codes:
//   1 usage, 2 data, 3 backend.

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent inputs: datasets, labels, record sets, masks.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model loading / inference failures.
struct BackendError : std::runtime_error {
    explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mpskit
