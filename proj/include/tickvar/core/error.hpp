#pragma once

#include <stdexcept>
#include <string>

namespace tickvar {

// Error categories are distinct types so that callers (the gateway in
// particular) can map them to transport-level status codes.
enum class ErrorKind {
    parse,
    contract_violation,
    domain,
    insufficient_data,
    degenerate_correlation,
    singular_design,
    fit,
    stale_data,
    degenerate_portfolio,
    invalid_moments,
    not_found,
    validation,
    io,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::contract_violation: return "contract_violation";
    case ErrorKind::domain: return "domain_error";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::degenerate_correlation: return "degenerate_correlation";
    case ErrorKind::singular_design: return "singular_design";
    case ErrorKind::fit: return "fit_error";
    case ErrorKind::stale_data: return "stale_data";
    case ErrorKind::degenerate_portfolio: return "degenerate_portfolio";
    case ErrorKind::invalid_moments: return "invalid_moments";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::validation: return "validation_error";
    case ErrorKind::io: return "io_error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Pipeline stage that raised the error ("inference", "mapping", ...);
    // set while the exception propagates so its dynamic type is kept.
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::string stage_;
};

template <ErrorKind K>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(K, what) {}
};

using ParseError = TypedError<ErrorKind::parse>;
using ContractViolation = TypedError<ErrorKind::contract_violation>;
using DomainError = TypedError<ErrorKind::domain>;
using InsufficientData = TypedError<ErrorKind::insufficient_data>;
using DegenerateCorrelation = TypedError<ErrorKind::degenerate_correlation>;
using SingularDesign = TypedError<ErrorKind::singular_design>;
using DegeneratePortfolio = TypedError<ErrorKind::degenerate_portfolio>;
using InvalidMoments = TypedError<ErrorKind::invalid_moments>;
using NotFound = TypedError<ErrorKind::not_found>;
using ValidationError = TypedError<ErrorKind::validation>;
using IoError = TypedError<ErrorKind::io>;

class StaleData : public Error {
public:
    StaleData(std::string instrument, const std::string& what)
        : Error(ErrorKind::stale_data, what), instrument_(std::move(instrument)) {}
    const std::string& instrument() const noexcept { return instrument_; }

private:
    std::string instrument_;
};

} // namespace tickvar
