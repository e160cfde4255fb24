#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>
#include <utility>
#include <variant>

#include "types.hpp"

namespace wflab {

//! lambda(x) = value
struct ConstantRate
{
    double value = 0.0;
};

//! lambda(x) = offset + <slope, x>
struct AffineRate
{
    double offset = 0.0;
    Vector slope;
};

//! lambda(x) = c0 + c1 / (1 + exp(-<a, x> + b))
struct SigmoidRate
{
    double c0 = 0.0;
    double c1 = 0.0;
    Vector a;
    double b = 0.0;
};

//---------------------------------------------------------------------------//
/*!
 * State-dependent jump intensity drawn from a closed-form family.
 *
 * The family is deliberately small: constants, affine forms and bounded
 * sigmoids. Each member knows its supremum over R^d when one exists, which
 * lets the dominating Hamiltonian be built without sampling.
 */
class RateExpression
{
  public:
    using Form = std::variant<ConstantRate, AffineRate, SigmoidRate>;

    RateExpression() = default;
    RateExpression(ConstantRate r) : form_{std::move(r)} {}
    RateExpression(AffineRate r) : form_{std::move(r)} {}
    RateExpression(SigmoidRate r) : form_{std::move(r)} {}

    static RateExpression constant(double value)
    {
        return ConstantRate{value};
    }

    Form const& form() const { return form_; }

    double operator()(Vector const& x) const
    {
        return std::visit(
            [&x](auto const& r) -> double {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantRate>)
                {
                    return r.value;
                }
                else if constexpr (std::is_same_v<T, AffineRate>)
                {
                    return r.offset + r.slope.dot(x);
                }
                else
                {
                    return r.c0 + r.c1 / (1.0 + std::exp(-r.a.dot(x) + r.b));
                }
            },
            form_);
    }

    bool is_state_independent() const
    {
        return std::visit(
            [](auto const& r) -> bool {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantRate>)
                    return true;
                else if constexpr (std::is_same_v<T, AffineRate>)
                    return r.slope.isZero(0.0);
                else
                    return r.a.isZero(0.0) || r.c1 == 0.0;
            },
            form_);
    }

    //! sup_x lambda(x) over R^d, or nullopt when unbounded above.
    std::optional<double> supremum() const
    {
        return std::visit(
            [this](auto const& r) -> std::optional<double> {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantRate>)
                {
                    return r.value;
                }
                else if constexpr (std::is_same_v<T, AffineRate>)
                {
                    if (r.slope.isZero(0.0))
                        return r.offset;
                    return std::nullopt;
                }
                else
                {
                    if (is_state_independent())
                        return (*this)(Vector::Zero(r.a.size()));
                    return r.c0 + std::max(r.c1, 0.0);
                }
            },
            form_);
    }

    //! Number of state components the expression reads, or 0 for constants.
    Eigen::Index arity() const
    {
        return std::visit(
            [](auto const& r) -> Eigen::Index {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantRate>)
                    return 0;
                else if constexpr (std::is_same_v<T, AffineRate>)
                    return r.slope.size();
                else
                    return r.a.size();
            },
            form_);
    }

    friend bool operator==(RateExpression const& lhs, RateExpression const& rhs)
    {
        if (lhs.form_.index() != rhs.form_.index())
            return false;
        return std::visit(
            [&rhs](auto const& l) -> bool {
                using T = std::decay_t<decltype(l)>;
                auto const& r = std::get<T>(rhs.form_);
                if constexpr (std::is_same_v<T, ConstantRate>)
                    return l.value == r.value;
                else if constexpr (std::is_same_v<T, AffineRate>)
                    return l.offset == r.offset && same(l.slope, r.slope);
                else
                    return l.c0 == r.c0 && l.c1 == r.c1 && same(l.a, r.a)
                           && l.b == r.b;
            },
            lhs.form_);
    }

  private:
    static bool same(Vector const& a, Vector const& b)
    {
        return a.size() == b.size() && a == b;
    }

    Form form_{ConstantRate{}};
};

}  // namespace wflab
