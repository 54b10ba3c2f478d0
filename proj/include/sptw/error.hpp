// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sptw {

enum class ErrorCode {
    InvalidParams,
    MalformedFile,
    NonFiniteSample,
    IoFailure,
    ZeroWindow,
    EmptyBuffer,
    BufferTooShort,
    InfeasibleSINR,
    LengthMismatch,
    OutOfRange,
    CoincidentNodes,
    EmptyInput,
    DelayOverflow,
    TimelineTooShort,
    TemplateTooLong,
    DegenerateTemplate,
    CellTooSmall,
    FormatVersionMismatch,
    CorruptRecord,
    ShapeMismatch,
    NonFiniteActivation,
    ShapeCompositionError,
    NonFiniteTensor,
    BatchSizeMismatch,
    IllegalTransition,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for all domain failures; `code()` tells them apart.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sptw
