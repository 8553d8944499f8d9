#pragma once

#include <stdexcept>
#include <string>

namespace rdt {

// Machine-parsable error categories. The CLI prints them as
// "ERROR:<code>:<message>" on stderr.
enum class ErrorCode { io, parse, shape, config, args, align, eval, state };

inline const char* error_code_str(ErrorCode c) {
    switch (c) {
        case ErrorCode::io: return "io";
        case ErrorCode::parse: return "parse";
        case ErrorCode::shape: return "shape";
        case ErrorCode::config: return "config";
        case ErrorCode::args: return "args";
        case ErrorCode::align: return "align";
        case ErrorCode::eval: return "eval";
        case ErrorCode::state: return "state";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_str() const { return error_code_str(code_); }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

}  // namespace rdt
