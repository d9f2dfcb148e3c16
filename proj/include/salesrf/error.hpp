#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salesrf {

/// Coarse error category, printed by the CLI as a machine-parsable prefix.
enum class ErrorKind {
    Io,
    Parse,
    Schema,
    Data,
    Config,
    Model,
    Version,
    Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace salesrf
