#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

namespace wflab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Default cap on the argument of exp() inside Hamiltonian evaluations.
inline constexpr double kDefaultExponentCap = 700.0;

//---------------------------------------------------------------------------//
/*!
 * Nonnegative cost extended with +infinity.
 *
 * Infeasible velocities and unreachable targets carry an explicit infinite
 * marker so optimizers see a hard wall instead of a large float.
 */
class ExtendedReal
{
  public:
    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double value) : value_{value} {}

    static constexpr ExtendedReal infinity() { return ExtendedReal{kInfinity}; }

    constexpr bool is_finite() const { return value_ != kInfinity; }
    constexpr bool is_infinite() const { return value_ == kInfinity; }

    //! Underlying value; +inf when infinite.
    constexpr double value() const { return value_; }

    friend constexpr bool operator==(ExtendedReal, ExtendedReal) = default;
    friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b)
    {
        return a.value_ <=> b.value_;
    }

    friend std::ostream& operator<<(std::ostream& os, ExtendedReal v)
    {
        if (v.is_infinite())
            return os << "+inf";
        return os << v.value_;
    }

  private:
    double value_ = 0.0;
};

inline bool all_finite(Vector const& v)
{
    return v.allFinite();
}

}  // namespace wflab
