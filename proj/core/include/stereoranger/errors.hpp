#pragma once

#include <stdexcept>
#include <string>

namespace stereoranger {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define STEREORANGER_DEFINE_ERROR(Name)                                       \
    class Name final : public Error {                                         \
    public:                                                                    \
        using Error::Error;                                                    \
    }

// geometry
STEREORANGER_DEFINE_ERROR(PointBehindCamera);
STEREORANGER_DEFINE_ERROR(NonConvergent);
STEREORANGER_DEFINE_ERROR(InvalidArgument);

// calibration
STEREORANGER_DEFINE_ERROR(OutOfBounds);
STEREORANGER_DEFINE_ERROR(FlatRegion);
STEREORANGER_DEFINE_ERROR(DegenerateConfiguration);
STEREORANGER_DEFINE_ERROR(InsufficientViews);
STEREORANGER_DEFINE_ERROR(IllConditioned);
STEREORANGER_DEFINE_ERROR(EmptyInput);

// rectification
STEREORANGER_DEFINE_ERROR(ZeroBaseline);
STEREORANGER_DEFINE_ERROR(DimensionMismatch);

// detection
STEREORANGER_DEFINE_ERROR(BackendLoadFailure);
STEREORANGER_DEFINE_ERROR(InferenceFailure);

// ranging
STEREORANGER_DEFINE_ERROR(InvalidFov);
STEREORANGER_DEFINE_ERROR(DisparityTooSmall);

// synthsim
STEREORANGER_DEFINE_ERROR(TargetBehindCamera);

// pipeline / IO
STEREORANGER_DEFINE_ERROR(CalibrationMissing);
STEREORANGER_DEFINE_ERROR(SourceExhausted);
STEREORANGER_DEFINE_ERROR(NonPositiveActual);
STEREORANGER_DEFINE_ERROR(ConfigError);

/// Malformed structured file; carries the node name and line where parsing failed.
class FormatError final : public Error {
public:
    FormatError(const std::string& node, long line, const std::string& what_arg)
        : Error("format error at node '" + node + "', line " + std::to_string(line) + ": " + what_arg),
          node_(node),
          line_(line) {}

    const std::string& node() const noexcept { return node_; }
    long line() const noexcept { return line_; }

private:
    std::string node_;
    long line_;
};

#undef STEREORANGER_DEFINE_ERROR

}  // namespace stereoranger
