#include "salesrf/error.hpp"

namespace salesrf {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Data: return "data";
        case ErrorKind::Config: return "config";
        case ErrorKind::Model: return "model";
        case ErrorKind::Version: return "version";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

}  // namespace salesrf
