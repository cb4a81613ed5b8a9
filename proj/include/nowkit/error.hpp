#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nowkit {

enum class Errc {
    ParseError,
    ValidationError,
    UnknownLabel,
    MixedSeriesCodes,
    IoError,
    EmptyTrace,
    NonPositiveBase,
    InsufficientData,
    NotApplicable,
    ZeroVariance,
    EmptyOverlap,
    AllMissing,
    ShapeMismatch,
    LengthMismatch,
    EmptyInput,
    VariableOrderMismatch,
    AllTrialsFailed,
    InsufficientHistory,
    NotTier1,
    NoEligibleRecords,
    UnknownSeries,
    ConfigError,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::UnknownLabel: return "UnknownLabel";
        case Errc::MixedSeriesCodes: return "MixedSeriesCodes";
        case Errc::IoError: return "IoError";
        case Errc::EmptyTrace: return "EmptyTrace";
        case Errc::NonPositiveBase: return "NonPositiveBase";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::NotApplicable: return "NotApplicable";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::EmptyOverlap: return "EmptyOverlap";
        case Errc::AllMissing: return "AllMissing";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::VariableOrderMismatch: return "VariableOrderMismatch";
        case Errc::AllTrialsFailed: return "AllTrialsFailed";
        case Errc::InsufficientHistory: return "InsufficientHistory";
        case Errc::NotTier1: return "NotTier1";
        case Errc::NoEligibleRecords: return "NoEligibleRecords";
        case Errc::UnknownSeries: return "UnknownSeries";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Single exception type for the toolkit; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Parse failure located at a 1-based line of the input (0 when not line-oriented).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error(Errc::ParseError, "line " + std::to_string(line) + ": " + reason),
          line_(line), reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

}  // namespace nowkit
