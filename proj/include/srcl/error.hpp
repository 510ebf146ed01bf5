#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srcl {

enum class ErrorCode {
    DimensionMismatch,
    EmptyDictionary,
    NonFiniteData,
    InvalidArgument,
    NonPositiveSigma,
    NegativeHistogramEntry,
    SingularSystem,
    NegativeGamma,
    NegativeLambda,
    DegenerateWeights,
    MissingDistances,
    MissingPartition,
    InvalidImage,
    ImageSmallerThanPatch,
    TooFewPatches,
    LengthMismatch,
    Empty,
    ConstantVector,
    ParseError,
    GradeMissing,
    BadDimension,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace srcl
