#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "errors.hpp"
#include "kernel.hpp"
#include "types.hpp"

namespace wflab {

//! Value, maximizer and curvature of L(x, alpha) = sup_xi <alpha,xi> - H(x,xi).
struct ConjugateResult
{
    double value = 0.0;
    Vector maximizer;
    //! Hessian of L in alpha: inverse Hessian of H at the maximizer.
    Matrix curvature;
    int iterations = 0;
    double residual = 0.0;
};

struct LegendreOptions
{
    int max_iterations = 60;
    double max_maximizer_norm = 1e3;
    //! Converged when |grad H(xi) - alpha| <= tolerance * (1 + |alpha|).
    double tolerance = 1e-10;
    int max_backtracks = 64;
    double exponent_cap = kDefaultExponentCap;
};

//! Why a conjugate solve failed: alpha is outside the effective domain.
struct NonSteepInfo
{
    std::string reason;
    Vector direction;
    int iterations = 0;
};

using ConjugateOutcome = std::variant<ConjugateResult, NonSteepInfo>;

//---------------------------------------------------------------------------//
/*!
 * Damped Newton ascent on xi -> <alpha, xi> - H(xi) from xi = 0.
 *
 * Steps are halved until the concave objective does not decrease. The
 * feasible set of alpha is open, so divergence of the iterate (norm above
 * max_maximizer_norm), a singular Hessian, or exhausting the iteration
 * budget is reported as NonSteep with the escape direction.
 */
inline ConjugateOutcome solve_legendre(FrozenHamiltonian const& ham,
                                       Vector const& alpha,
                                       LegendreOptions const& opts = {})
{
    int const dim = ham.dim();
    double const tol = opts.tolerance * (1.0 + alpha.norm());

    auto objective = [&](Vector const& xi) -> std::optional<double> {
        auto h = ham.try_value(xi);
        if (!h)
            return std::nullopt;
        return alpha.dot(xi) - *h;
    };
    auto unit = [](Vector v) {
        double n = v.norm();
        if (n > 0)
            v /= n;
        return v;
    };

    Vector xi = Vector::Zero(dim);
    double f = 0.0;
    for (int iter = 0; iter <= opts.max_iterations; ++iter)
    {
        auto d = ham.derivatives(xi);
        Vector ascent = alpha - d.gradient;
        double residual = ascent.norm();
        if (residual <= tol)
        {
            // One more full Newton step, kept if it shrinks the residual.
            Eigen::LLT<Matrix> polish{d.hessian};
            if (polish.info() == Eigen::Success && residual > 0)
            {
                Vector trial = xi + polish.solve(ascent);
                if (trial.allFinite() && ham.try_value(trial))
                {
                    auto dt = ham.derivatives(trial);
                    double r = (alpha - dt.gradient).norm();
                    if (r < residual)
                    {
                        xi = std::move(trial);
                        d = std::move(dt);
                        residual = r;
                    }
                }
            }
            ConjugateResult result;
            result.value = alpha.dot(xi) - ham(xi);
            result.maximizer = xi;
            result.iterations = iter;
            result.residual = residual;
            Eigen::LLT<Matrix> llt{d.hessian};
            if (llt.info() == Eigen::Success)
                result.curvature = llt.solve(Matrix::Identity(dim, dim));
            else
                result.curvature = Matrix::Constant(dim, dim, kInfinity);
            return result;
        }
        if (iter == opts.max_iterations)
            break;

        Eigen::LLT<Matrix> llt{d.hessian};
        Vector step;
        if (llt.info() == Eigen::Success)
            step = llt.solve(ascent);
        if (llt.info() != Eigen::Success || !step.allFinite())
        {
            return NonSteepInfo{"Hamiltonian Hessian is singular",
                                unit(ascent), iter};
        }

        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < opts.max_backtracks; ++k, t *= 0.5)
        {
            Vector trial = xi + t * step;
            auto ft = objective(trial);
            if (ft && *ft >= f - 1e-15 * (1.0 + std::abs(f)))
            {
                xi = std::move(trial);
                f = *ft;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return NonSteepInfo{"line search failed", unit(step), iter};
        if (xi.norm() > opts.max_maximizer_norm)
            return NonSteepInfo{"maximizer diverged", unit(xi), iter};
    }
    return NonSteepInfo{"iteration budget exhausted", unit(xi),
                        opts.max_iterations};
}

inline ConjugateResult legendre(FrozenHamiltonian const& ham,
                                Vector const& alpha,
                                LegendreOptions const& opts = {})
{
    auto outcome = solve_legendre(ham, alpha, opts);
    if (auto* info = std::get_if<NonSteepInfo>(&outcome))
        throw NonSteep{"Legendre transform is infinite: " + info->reason,
                       info->direction};
    return std::get<ConjugateResult>(std::move(outcome));
}

//! L(x, alpha) with its maximizer and curvature. Throws NonSteep when infinite.
inline ConjugateResult legendre(JumpKernel const& kernel,
                                Vector const& x,
                                Vector const& alpha,
                                LegendreOptions const& opts = {})
{
    return legendre(FrozenHamiltonian{kernel, x, opts.exponent_cap}, alpha,
                    opts);
}

//! L(x, alpha) as an extended real: +inf instead of NonSteep.
inline ExtendedReal legendre_value(FrozenHamiltonian const& ham,
                                   Vector const& alpha,
                                   LegendreOptions const& opts = {})
{
    auto outcome = solve_legendre(ham, alpha, opts);
    if (auto* r = std::get_if<ConjugateResult>(&outcome))
        return ExtendedReal{r->value};
    return ExtendedReal::infinity();
}

inline ExtendedReal legendre_value(JumpKernel const& kernel,
                                   Vector const& x,
                                   Vector const& alpha,
                                   LegendreOptions const& opts = {})
{
    return legendre_value(FrozenHamiltonian{kernel, x, opts.exponent_cap},
                          alpha, opts);
}

//---------------------------------------------------------------------------//
/*!
 * Rate profile L_1: Legendre transform of the dominating Hamiltonian H_1.
 */
class RateProfile
{
  public:
    explicit RateProfile(JumpKernel const& kernel, LegendreOptions opts = {})
        : dominating_{kernel}
        , frozen_{dominating_.kernel(), Vector::Zero(kernel.dim()),
                  opts.exponent_cap}
        , opts_{opts}
    {
    }

    explicit RateProfile(DominatingHamiltonian dominating,
                         LegendreOptions opts = {})
        : dominating_{std::move(dominating)}
        , frozen_{dominating_.kernel(),
                  Vector::Zero(dominating_.kernel().dim()), opts.exponent_cap}
        , opts_{opts}
    {
    }

    RateProfile(RateProfile const& other)
        : RateProfile{other.dominating_, other.opts_}
    {
    }
    RateProfile& operator=(RateProfile const&) = delete;

    DominatingHamiltonian const& dominating() const { return dominating_; }
    int dim() const { return dominating_.kernel().dim(); }

    ExtendedReal operator()(Vector const& alpha) const
    {
        return legendre_value(frozen_, alpha, opts_);
    }

    ConjugateOutcome solve(Vector const& alpha) const
    {
        return solve_legendre(frozen_, alpha, opts_);
    }

  private:
    DominatingHamiltonian dominating_;
    FrozenHamiltonian frozen_;
    LegendreOptions opts_;
};

//! L_1(alpha), +inf when alpha is outside the effective domain.
inline ExtendedReal l1_rate(RateProfile const& profile, Vector const& alpha)
{
    return profile(alpha);
}

}  // namespace wflab
