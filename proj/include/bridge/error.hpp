#pragma once

#include <stdexcept>
#include <string>

namespace bridge {

// Failure classes, mapped one-to-one onto CLI exit codes (see README).
enum class ErrorKind {
    usage = 1,
    config = 2,
    data = 3,
    io = 4,
    remote = 5,
    internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::config: return "config";
        case ErrorKind::data: return "data";
        case ErrorKind::io: return "io";
        case ErrorKind::remote: return "remote";
        case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

}  // namespace bridge
