#include "balldet/error.hpp"

namespace balldet {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Format: return "format error";
        case ErrorCode::Dimension: return "dimension error";
        case ErrorCode::Bounds: return "bounds error";
        case ErrorCode::Parse: return "parse error";
        case ErrorCode::UnsupportedModel: return "unsupported model";
        case ErrorCode::Validation: return "validation error";
        case ErrorCode::Training: return "training error";
        case ErrorCode::Parameter: return "parameter error";
        case ErrorCode::Io: return "I/O error";
        case ErrorCode::Input: return "input error";
    }
    return "unknown error";
}

}  // namespace balldet
