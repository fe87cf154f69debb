#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iparego {

enum class Errc {
    OutOfBounds,
    BudgetExhausted,
    InvalidDimensions,
    EmptyDataset,
    InvalidEta,
    DimensionMismatch,
    DegenerateData,
    SingularCovariance,
    NegativeStddev,
    TooFewPoints,
    DegenerateConfiguration,
    DimensionTooHigh,
    VertexNotFound,
    InvalidChoice,
    InvalidConfig,
    UnsupportedObjectiveCount,
    UnknownProblem,
    EmptyInput,
    InvalidPhase,
    Io
};

constexpr std::string_view to_string(Errc e)
{
    switch (e) {
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::InvalidDimensions: return "InvalidDimensions";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::InvalidEta: return "InvalidEta";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::NegativeStddev: return "NegativeStddev";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::DimensionTooHigh: return "DimensionTooHigh";
    case Errc::VertexNotFound: return "VertexNotFound";
    case Errc::InvalidChoice: return "InvalidChoice";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::UnsupportedObjectiveCount: return "UnsupportedObjectiveCount";
    case Errc::UnknownProblem: return "UnknownProblem";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidPhase: return "InvalidPhase";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code), _message(what) {}

    Errc code() const noexcept { return _code; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return _message; }

private:
    Errc _code;
    std::string _message;
};

} // namespace iparego
