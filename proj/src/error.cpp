#include "grag/error.hpp"

namespace grag {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Referential: return "referential error";
        case ErrorKind::NotFound: return "not found";
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::Numeric: return "numeric error";
        case ErrorKind::Transport: return "transport error";
        case ErrorKind::Protocol: return "protocol error";
        case ErrorKind::Version: return "version error";
        case ErrorKind::Truncated: return "truncated input";
        case ErrorKind::FingerprintMismatch: return "fingerprint mismatch";
        case ErrorKind::Semantic: return "semantic error";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

void rethrow_with_context(const Error& e, const std::string& context) {
    throw Error(e.kind(), context + ": " + e.what());
}

} // namespace grag
