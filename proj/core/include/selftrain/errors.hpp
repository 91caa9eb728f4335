#pragma once

#include <stdexcept>
#include <string>

namespace selftrain {

// Error taxonomy mirrored by the CLI exit codes:
//   usage=2, validation=3, io=4, endpoint=5.

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EndpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace selftrain
