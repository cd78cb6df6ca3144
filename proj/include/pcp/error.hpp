#pragma once

#include <stdexcept>
#include <string>

namespace pcp {

enum class ErrorKind {
    DegenerateVector,
    DimensionMismatch,
    IndexError,
    ScheduleRange,
    TooManyClusters,
    InvalidK,
    EmptyCluster,
    NoHistory,
    InvalidTemperature,
    NumericError,
    CacheInvalid,
    DegenerateLabels,
    IngestError,
    ConfigError,
    IoError,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so the
// CLI can map it onto an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DegenerateVector: return "DegenerateVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::ScheduleRange: return "ScheduleRange";
    case ErrorKind::TooManyClusters: return "TooManyClusters";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::NoHistory: return "NoHistory";
    case ErrorKind::InvalidTemperature: return "InvalidTemperature";
    case ErrorKind::NumericError: return "NumericError";
    case ErrorKind::CacheInvalid: return "CacheInvalid";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::IngestError: return "IngestError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace pcp
