#include "woc/error.hpp"

namespace woc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::SamplingExhausted: return "SamplingExhausted";
        case ErrorKind::EmptyLabels: return "EmptyLabels";
        case ErrorKind::ComponentMismatch: return "ComponentMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::InvalidK: return "InvalidK";
        case ErrorKind::EmptyCurve: return "EmptyCurve";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::MalformedReply: return "MalformedReply";
    }
    return "Unknown";
}

}  // namespace woc
