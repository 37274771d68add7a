#pragma once

#include <stdexcept>
#include <string>

namespace kpo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct ToleranceFailure : Error { using Error::Error; };
struct InvalidBinWidth : Error { using Error::Error; };
struct FitDiverged : Error { using Error::Error; };
struct NonPositiveTau : Error { using Error::Error; };
struct EmptySelection : Error { using Error::Error; };
struct ChannelCollision : Error { using Error::Error; };
struct InvalidBin : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct SweepFailed : Error { using Error::Error; };

// Config parse failure with a line anchor for diagnostics.
struct ConfigError : Error {
    ConfigError(const std::string& msg, int line_no)
        : Error(msg), line(line_no) {}
    int line = 0;
};

}  // namespace kpo
