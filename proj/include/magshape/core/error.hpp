#pragma once

#include <stdexcept>
#include <string>

namespace magshape {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorKind {
    Usage = 2,    // bad arguments / config
    Data = 3,     // malformed input, dimension mismatch, missing file
    Numeric = 4,  // singular system, non-finite state
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_numeric(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }

}  // namespace magshape
