// SPDX-License-Identifier: Apache-2.0

#include "sptw/error.hpp"

namespace sptw {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ZeroWindow: return "ZeroWindow";
    case ErrorCode::EmptyBuffer: return "EmptyBuffer";
    case ErrorCode::BufferTooShort: return "BufferTooShort";
    case ErrorCode::InfeasibleSINR: return "InfeasibleSINR";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::CoincidentNodes: return "CoincidentNodes";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DelayOverflow: return "DelayOverflow";
    case ErrorCode::TimelineTooShort: return "TimelineTooShort";
    case ErrorCode::TemplateTooLong: return "TemplateTooLong";
    case ErrorCode::DegenerateTemplate: return "DegenerateTemplate";
    case ErrorCode::CellTooSmall: return "CellTooSmall";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::ShapeCompositionError: return "ShapeCompositionError";
    case ErrorCode::NonFiniteTensor: return "NonFiniteTensor";
    case ErrorCode::BatchSizeMismatch: return "BatchSizeMismatch";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    }
    return "Unknown";
}

} // namespace sptw
