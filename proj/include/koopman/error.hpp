#pragma once

#include <stdexcept>
#include <string>

namespace koopman {

enum class ErrorCode {
    // input data
    MissingHeader,
    RaggedRows,
    NonFinite,
    EmptyFile,
    ParseError,
    IoError,
    UnknownChannel,
    MissingChannels,
    ChannelMismatch,
    EmptyInput,
    TooFewSnapshots,
    OddSampleCount,
    // caller arguments
    OutOfRange,
    FrequencyOutOfRange,
    InvalidArgument,
    NotAPair,
    PairSplit,
    // numerics
    DegenerateEigenvalues,
    SolveFailure,
    RankCollapse,
    ZeroEigenvalue,
    NoConvergence,
    IllConditionedGram,
    StepUnderflow,
};

enum class ErrorCategory { Usage, Data, Numerical };

const char* to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return koopman::category(code_); }

private:
    ErrorCode code_;
};

}  // namespace koopman
