#pragma once

#include <stdexcept>
#include <string>

namespace grag {

enum class ErrorKind {
    Parse,
    Referential,
    NotFound,
    InvalidArgument,
    DimensionMismatch,
    Numeric,
    Transport,
    Protocol,
    Version,
    Truncated,
    FingerprintMismatch,
    Semantic,
    Io,
};

const char* to_string(ErrorKind kind);

// Every failure the library raises carries a kind so callers (and the CLI exit
// code mapping) can tell data problems from numeric ones.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Re-raises `e` with `context: ` prepended, keeping its kind.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

} // namespace grag
