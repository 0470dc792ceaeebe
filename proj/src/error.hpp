#pragma once

#include <stdexcept>
#include <string>

namespace osradv {

// Error taxonomy mirrored by the C API status codes and CLI exit codes.
enum class ErrorKind {
    invalid_argument,  // bad shapes, bad configs, malformed requests
    io,                // missing/corrupt files, unwritable outputs
    numeric            // overflow, divergence, undefined gradients
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, msg);
}

[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(ErrorKind::io, msg);
}

[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw Error(ErrorKind::numeric, msg);
}

}  // namespace osradv
