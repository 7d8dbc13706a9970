#pragma once

#include <stdexcept>
#include <string>

namespace dhym {

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    config,     // exit 2
    numeric,    // exit 3
    invariant,  // exit 4 (strict mode only)
    io,         // exit 3
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::numeric: return 3;
        case ErrorKind::io: return 3;
        case ErrorKind::invariant: return 4;
    }
    return 1;
}

}  // namespace dhym
