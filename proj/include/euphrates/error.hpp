#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace euphrates {

/// Error classes surfaced by the CLI as a single machine-parsable token.
enum class ErrorKind {
    Format,       // malformed file contents
    Dimension,    // shape or size mismatch
    Range,        // value outside its domain
    MissingData,  // a required record or file is absent
    Config,       // invalid configuration
    Io,           // filesystem failure
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Format: return "format_error";
        case ErrorKind::Dimension: return "dimension_error";
        case ErrorKind::Range: return "range_error";
        case ErrorKind::MissingData: return "missing_data";
        case ErrorKind::Config: return "config_error";
        case ErrorKind::Io: return "io_error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace euphrates
