#include "koopman/error.hpp"

namespace koopman {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingHeader: return "MissingHeader";
        case ErrorCode::RaggedRows: return "RaggedRows";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnknownChannel: return "UnknownChannel";
        case ErrorCode::MissingChannels: return "MissingChannels";
        case ErrorCode::ChannelMismatch: return "ChannelMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::TooFewSnapshots: return "TooFewSnapshots";
        case ErrorCode::OddSampleCount: return "OddSampleCount";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::FrequencyOutOfRange: return "FrequencyOutOfRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotAPair: return "NotAPair";
        case ErrorCode::PairSplit: return "PairSplit";
        case ErrorCode::DegenerateEigenvalues: return "DegenerateEigenvalues";
        case ErrorCode::SolveFailure: return "SolveFailure";
        case ErrorCode::RankCollapse: return "RankCollapse";
        case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::IllConditionedGram: return "IllConditionedGram";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
    }
    return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::OutOfRange:
        case ErrorCode::FrequencyOutOfRange:
        case ErrorCode::InvalidArgument:
        case ErrorCode::NotAPair:
        case ErrorCode::PairSplit:
            return ErrorCategory::Usage;
        case ErrorCode::DegenerateEigenvalues:
        case ErrorCode::SolveFailure:
        case ErrorCode::RankCollapse:
        case ErrorCode::ZeroEigenvalue:
        case ErrorCode::NoConvergence:
        case ErrorCode::IllConditionedGram:
        case ErrorCode::StepUnderflow:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Data;
    }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace koopman
