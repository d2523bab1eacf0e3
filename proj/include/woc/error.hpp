#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace woc {

enum class ErrorKind {
    ConfigInvalid,
    IoFailure,
    SamplingExhausted,
    EmptyLabels,
    ComponentMismatch,
    EmptyInput,
    InvalidK,
    EmptyCurve,
    BackendUnavailable,
    Timeout,
    RateLimited,
    MalformedReply,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the whole library; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace woc
