#pragma once

#include <stdexcept>
#include <string>

namespace dsplat {

// Error codes used across the pipeline. The CLI maps these to one-line
// machine-parsable diagnostics ("error code=<Code> msg=...").
enum class ErrorCode {
    BehindCamera,
    InvalidRig,
    UnknownKind,
    IsovalueOutOfRange,
    EmptyCloud,
    DimensionMismatch,
    TooSmall,
    EmptyBand,
    EmptyInterior,
    MismatchedCounts,
    NoViews,
    StaleForward,
    IoError,
    MalformedFile,
    WorkerFailure,
    Timeout,
    ManifestMismatch,
    MissingBaseline,
    InvalidArgument,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::BehindCamera: return "BehindCamera";
        case ErrorCode::InvalidRig: return "InvalidRig";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::IsovalueOutOfRange: return "IsovalueOutOfRange";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::EmptyBand: return "EmptyBand";
        case ErrorCode::EmptyInterior: return "EmptyInterior";
        case ErrorCode::MismatchedCounts: return "MismatchedCounts";
        case ErrorCode::NoViews: return "NoViews";
        case ErrorCode::StaleForward: return "StaleForward";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::WorkerFailure: return "WorkerFailure";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::ManifestMismatch: return "ManifestMismatch";
        case ErrorCode::MissingBaseline: return "MissingBaseline";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code),
          message_(msg) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace dsplat
