#pragma once

#include <stdexcept>
#include <string>

namespace fairgen {

// Error categories; the CLI maps these to distinct exit codes.
enum class Errc {
    invalid_argument,     // bad value, invariant violation
    scheme_mismatch,      // distributions over different attribute schemes
    degenerate_reference, // extreme target with s(focal)=1 and alpha<1
    transport,            // provider/backend unreachable or HTTP failure
    schema_violation,     // structured response failed schema checks
    contract_violation,   // confidence/groups contract broken
    missing_artifact,     // pipeline stage run out of order
    io,                   // file read/write/decode failure
    config,               // bad configuration (missing key, env var, ...)
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::scheme_mismatch: return "scheme_mismatch";
    case Errc::degenerate_reference: return "degenerate_reference";
    case Errc::transport: return "transport";
    case Errc::schema_violation: return "schema_violation";
    case Errc::contract_violation: return "contract_violation";
    case Errc::missing_artifact: return "missing_artifact";
    case Errc::io: return "io";
    case Errc::config: return "config";
    }
    return "unknown";
}

} // namespace fairgen
