#pragma once

#include <stdexcept>
#include <string>

namespace balldet {

enum class ErrorCode {
    Format,
    Dimension,
    Bounds,
    Parse,
    UnsupportedModel,
    Validation,
    Training,
    Parameter,
    Io,
    Input,
};

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

const char* to_string(ErrorCode code) noexcept;

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace balldet
