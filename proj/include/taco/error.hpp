#pragma once

#include <stdexcept>
#include <string>

namespace taco {

// Error classes map to process exit codes in the CLI: usage/config -> 2,
// everything else -> 1.
enum class ErrorCode {
    Usage,
    Config,
    Input,
    Io,
    Corrupt,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Usage: return "usage";
        case ErrorCode::Config: return "config";
        case ErrorCode::Input: return "input";
        case ErrorCode::Io: return "io";
        case ErrorCode::Corrupt: return "corrupt";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

}  // namespace taco
