#pragma once

#include <stdexcept>
#include <string>

namespace mvt {

enum class ErrorCode {
    invalid_argument,
    precondition,
    capacity,
    precision,
    io,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::precision: return "precision";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

} // namespace mvt
