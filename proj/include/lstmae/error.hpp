#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lstmae {

enum class ErrorKind {
    shape,
    empty_input,
    insufficient_data,
    malformed_file,
    version,
    degenerate_scale,
    degenerate_labels,
    empty_series,
    empty_split,
    validation,
    parse,
    config,
    io,
    invariant,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this one exception type; callers
// branch on kind() rather than on the message text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace lstmae
