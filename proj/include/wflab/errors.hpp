#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "types.hpp"

namespace wflab {

enum class ErrorCode
{
    validation,
    exponent_overflow,
    non_steep,
    hypothesis_violation,
    budget_exceeded,
    infeasible,
    event_cap_exceeded,
    rate_bound_exceeded,
    insufficient_samples,
    io,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::validation: return "validation";
        case ErrorCode::exponent_overflow: return "exponent_overflow";
        case ErrorCode::non_steep: return "non_steep";
        case ErrorCode::hypothesis_violation: return "hypothesis_violation";
        case ErrorCode::budget_exceeded: return "budget_exceeded";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::event_cap_exceeded: return "event_cap_exceeded";
        case ErrorCode::rate_bound_exceeded: return "rate_bound_exceeded";
        case ErrorCode::insufficient_samples: return "insufficient_samples";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error{what}, code_{code}
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

class ValidationError : public Error
{
  public:
    explicit ValidationError(std::string const& what)
        : Error{ErrorCode::validation, what}
    {
    }
};

//! Argument of exp() exceeded the configured cap.
class ExponentOverflow : public Error
{
  public:
    ExponentOverflow(std::size_t atom, double exponent, double cap)
        : Error{ErrorCode::exponent_overflow,
                "exponent " + std::to_string(exponent) + " at atom "
                    + std::to_string(atom) + " exceeds cap "
                    + std::to_string(cap)}
        , atom_{atom}
        , exponent_{exponent}
    {
    }

    //! Index of the offending atom, or npos for pathwise exponents.
    std::size_t atom() const noexcept { return atom_; }
    double exponent() const noexcept { return exponent_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    std::size_t atom_;
    double exponent_;
};

//! Velocity lies outside the effective domain of the Legendre transform.
class NonSteep : public Error
{
  public:
    NonSteep(std::string const& what, Vector direction)
        : Error{ErrorCode::non_steep, what}, direction_{std::move(direction)}
    {
    }

    //! Unit direction along which the dual iterate escaped.
    Vector const& direction() const noexcept { return direction_; }

  private:
    Vector direction_;
};

class BudgetExceeded : public Error
{
  public:
    explicit BudgetExceeded(std::string const& what)
        : Error{ErrorCode::budget_exceeded, what}
    {
    }
};

class Infeasible : public Error
{
  public:
    explicit Infeasible(std::string const& what)
        : Error{ErrorCode::infeasible, what}
    {
    }
};

class RateBoundExceeded : public Error
{
  public:
    explicit RateBoundExceeded(std::string const& what)
        : Error{ErrorCode::rate_bound_exceeded, what}
    {
    }
};

class IoError : public Error
{
  public:
    explicit IoError(std::string const& what) : Error{ErrorCode::io, what} {}
};

}  // namespace wflab
