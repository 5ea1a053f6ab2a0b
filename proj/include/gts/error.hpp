#pragma once

#include <stdexcept>
#include <string>

namespace gts {

// Error taxonomy. Every failure raised by the library derives from gts::error
// and belongs to one of three families, which the CLI maps to exit codes:
//   domain_error    -> 2  (bad parameters, bad arguments, precondition violated)
//   numerical_error -> 3  (grid misconfiguration, non-convergence, singular fits)
//   io_error        -> 4  (files, parsing of external data)

enum class error_family { domain, numerical, io };

class error : public std::runtime_error {
public:
    error(error_family family, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), family_(family), code_(std::move(code)) {}

    error_family family() const noexcept { return family_; }

    /// Short machine-readable tag, e.g. "OutOfDomain" or "BracketFailure".
    const std::string& code() const noexcept { return code_; }

private:
    error_family family_;
    std::string code_;
};

struct domain_error : error {
    domain_error(std::string code, const std::string& what)
        : error(error_family::domain, std::move(code), what) {}
};

struct numerical_error : error {
    numerical_error(std::string code, const std::string& what)
        : error(error_family::numerical, std::move(code), what) {}
};

struct io_error : error {
    io_error(std::string code, const std::string& what)
        : error(error_family::io, std::move(code), what) {}
};

inline int exit_code(const error& e) noexcept {
    switch (e.family()) {
        case error_family::domain: return 2;
        case error_family::numerical: return 3;
        case error_family::io: return 4;
    }
    return 1;
}

} // namespace gts
