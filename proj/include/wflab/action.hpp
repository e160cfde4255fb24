#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "conjugate.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "lbfgs.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "target.hpp"

namespace wflab {

//---------------------------------------------------------------------------//
/*!
 * Polygonal path with knots at uniform times t_k = k T / N, k = 0..N.
 */
struct PolygonalPath
{
    double horizon = 1.0;
    std::vector<Vector> knots;

    std::size_t segments() const { return knots.empty() ? 0 : knots.size() - 1; }
    double dt() const { return horizon / static_cast<double>(segments()); }
    double time(std::size_t k) const
    {
        return horizon * static_cast<double>(k)
               / static_cast<double>(segments());
    }
    int dim() const
    {
        return knots.empty() ? 0 : static_cast<int>(knots.front().size());
    }

    //! Velocity on segment i.
    Vector velocity(std::size_t i) const
    {
        return (knots[i + 1] - knots[i]) / dt();
    }

    void validate() const
    {
        if (knots.size() < 2)
            throw ValidationError{"path needs at least one segment"};
        if (!(horizon > 0) || !std::isfinite(horizon))
            throw ValidationError{"path horizon must be positive"};
        for (auto const& k : knots)
        {
            if (k.size() != knots.front().size() || !k.allFinite())
                throw ValidationError{"path knots must be finite vectors "
                                      "of equal dimension"};
        }
    }

    static PolygonalPath straight_line(Vector const& x,
                                       Vector const& y,
                                       int segments,
                                       double horizon = 1.0)
    {
        PolygonalPath p;
        p.horizon = horizon;
        p.knots.reserve(static_cast<std::size_t>(segments) + 1);
        for (int k = 0; k <= segments; ++k)
        {
            double s = static_cast<double>(k) / segments;
            p.knots.push_back((1.0 - s) * x + s * y);
        }
        p.knots.back() = y;
        return p;
    }
};

//! Discretised action; infinite values carry the first infeasible segment.
struct ActionValue
{
    ExtendedReal value;
    std::optional<std::size_t> infeasible_segment;
};

/// Left-endpoint action dt * sum_i L(x_i, (x_{i+1} - x_i) / dt).
inline ActionValue action_of_path(JumpKernel const& kernel,
                                  PolygonalPath const& path,
                                  LegendreOptions const& opts = {})
{
    path.validate();
    if (path.dim() != kernel.dim())
        throw ValidationError{"path dimension does not match kernel"};
    double const dt = path.dt();
    double total = 0.0;
    for (std::size_t i = 0; i < path.segments(); ++i)
    {
        auto l = legendre_value(kernel, path.knots[i], path.velocity(i), opts);
        if (l.is_infinite())
            return {ExtendedReal::infinity(), i};
        total += l.value();
    }
    return {ExtendedReal{dt * total}, std::nullopt};
}

struct MinimizeOptions
{
    //! Initial paths: the straight line plus restarts - 1 perturbations.
    int restarts = 8;
    //! Perturbation amplitude relative to |y - x|.
    double perturbation = 0.1;
    std::uint64_t seed = 0;
    double horizon = 1.0;
    //! Relative step for central differences of L in the state argument.
    double fd_step = 1e-5;
    std::size_t workers = 0;
    LbfgsOptions lbfgs;
    LegendreOptions legendre;
};

struct RateFunctionResult
{
    ExtendedReal value;
    PolygonalPath path;
    int restarts_used = 0;
    double gradient_norm_at_exit = 0.0;
    //! Action of the straight line from x to y.
    ExtendedReal straight_line_value;
};

namespace action_detail {

struct PathObjective
{
    JumpKernel const* kernel;
    Vector x;
    Vector y;
    int segments;
    MinimizeOptions const* opts;

    PolygonalPath unpack(Vector const& z) const
    {
        int const d = kernel->dim();
        PolygonalPath p;
        p.horizon = opts->horizon;
        p.knots.reserve(static_cast<std::size_t>(segments) + 1);
        p.knots.push_back(x);
        for (int k = 1; k < segments; ++k)
            p.knots.push_back(z.segment((k - 1) * d, d));
        p.knots.push_back(y);
        return p;
    }

    static Vector pack(PolygonalPath const& p)
    {
        int const d = p.dim();
        auto const n = static_cast<Eigen::Index>(p.segments()) - 1;
        Vector z(n * d);
        for (Eigen::Index k = 0; k < n; ++k)
            z.segment(k * d, d) = p.knots[static_cast<std::size_t>(k) + 1];
        return z;
    }

    double operator()(Vector const& z, Vector& grad) const
    {
        int const d = kernel->dim();
        auto path = unpack(z);
        double const dt = path.dt();
        auto const n = path.segments();
        std::vector<Vector> xi(n);
        std::vector<Vector> dldx(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            Vector v = path.velocity(i);
            FrozenHamiltonian ham{*kernel, path.knots[i],
                                  opts->legendre.exponent_cap};
            auto outcome = solve_legendre(ham, v, opts->legendre);
            auto* r = std::get_if<ConjugateResult>(&outcome);
            if (!r)
                return kInfinity;
            total += r->value;
            xi[i] = r->maximizer;
            dldx[i] = Vector::Zero(d);
            if (kernel->is_state_independent() || i == 0)
                continue;
            double h = opts->fd_step * (1.0 + path.knots[i].norm());
            for (int k = 0; k < d; ++k)
            {
                Vector xp = path.knots[i];
                Vector xm = path.knots[i];
                xp[k] += h;
                xm[k] -= h;
                auto lp = legendre_value(*kernel, xp, v, opts->legendre);
                auto lm = legendre_value(*kernel, xm, v, opts->legendre);
                if (lp.is_finite() && lm.is_finite())
                    dldx[i][k] = (lp.value() - lm.value()) / (2 * h);
                else if (lp.is_finite())
                    dldx[i][k] = (lp.value() - r->value) / h;
                else if (lm.is_finite())
                    dldx[i][k] = (r->value - lm.value()) / h;
            }
        }
        grad.resize(z.size());
        for (std::size_t k = 1; k < n; ++k)
        {
            grad.segment(static_cast<Eigen::Index>(k - 1) * d, d)
                = dt * dldx[k] - xi[k] + xi[k - 1];
        }
        return dt * total;
    }
};

}  // namespace action_detail

//---------------------------------------------------------------------------//
/*!
 * Minimum of the discretised action over paths from x to y with N segments.
 *
 * Interior knots are optimised by L-BFGS. The gradient combines the
 * envelope theorem (dL/dalpha is the Legendre maximizer) with central
 * differences of L in the state argument. Restart 0 starts from the straight
 * line; restart r > 0 adds a random sine-series bump that vanishes at both
 * endpoints. The best restart wins, ties going to the lowest index.
 */
inline RateFunctionResult minimize_action(JumpKernel const& kernel,
                                          Vector const& x,
                                          Vector const& y,
                                          int segments,
                                          MinimizeOptions const& opts = {})
{
    if (segments < 2)
        throw ValidationError{"minimize_action needs N >= 2"};
    if (opts.restarts < 1)
        throw ValidationError{"minimize_action needs at least one restart"};
    if (x.size() != kernel.dim() || y.size() != kernel.dim())
        throw ValidationError{"endpoint dimension does not match kernel"};

    auto straight = PolygonalPath::straight_line(x, y, segments, opts.horizon);
    RateFunctionResult best;
    best.straight_line_value = action_of_path(kernel, straight,
                                              opts.legendre).value;
    if (x == y)
    {
        best.value = ExtendedReal{0.0};
        best.path = std::move(straight);
        best.restarts_used = 1;
        return best;
    }

    action_detail::PathObjective objective{&kernel, x, y, segments, &opts};
    double const amplitude = opts.perturbation * (y - x).norm();
    int const d = kernel.dim();

    struct Attempt
    {
        bool feasible = false;
        LbfgsResult result;
    };
    std::vector<Attempt> attempts(static_cast<std::size_t>(opts.restarts));
    parallel_for(
        attempts.size(),
        [&](std::size_t r) {
            PolygonalPath init = straight;
            if (r > 0)
            {
                RandomStream rng{mix_seed(opts.seed, 0xAC71), r};
                std::vector<Vector> coef;
                for (int m = 1; m <= 3; ++m)
                {
                    Vector c(d);
                    for (int k = 0; k < d; ++k)
                        c[k] = amplitude * (2 * rng.uniform() - 1) / m;
                    coef.push_back(std::move(c));
                }
                for (int k = 1; k < segments; ++k)
                {
                    double t = static_cast<double>(k) / segments;
                    for (int m = 1; m <= 3; ++m)
                        init.knots[k] += std::sin(std::numbers::pi * m * t) * coef[m - 1];
                }
            }
            Vector z0 = action_detail::PathObjective::pack(init);
            Vector g(z0.size());
            if (!std::isfinite(objective(z0, g)))
                return;
            attempts[r].feasible = true;
            attempts[r].result = lbfgs_minimize(objective, z0, opts.lbfgs);
        },
        opts.workers);

    bool found = false;
    for (auto const& a : attempts)
    {
        if (!a.feasible)
            continue;
        ++best.restarts_used;
        if (!found || a.result.value < best.value.value())
        {
            found = true;
            best.value = ExtendedReal{a.result.value};
            best.path = objective.unpack(a.result.x);
            best.gradient_norm_at_exit = a.result.gradient_norm;
        }
    }
    if (!found)
        throw Infeasible{"no restart produced a finite initial action"};
    return best;
}

struct RateToSetOptions
{
    int segments = 50;
    int grid_per_axis = 9;
    //! Compass-search step halvings after the grid pass.
    int polish_levels = 10;
    MinimizeOptions minimize;
};

struct RateToSetResult
{
    ExtendedReal value;
    Vector argmin;
    RateFunctionResult detail;
    std::size_t evaluations = 0;
};

//---------------------------------------------------------------------------//
/*!
 * inf over y in the closure of O of the rate l(x, y).
 *
 * A deterministic grid on the closure picks a starting cell; a compass
 * search with halving steps, projected onto the closure, polishes it.
 */
inline RateToSetResult rate_to_set(JumpKernel const& kernel,
                                   Vector const& x,
                                   TargetSet const& target,
                                   RateToSetOptions const& opts = {})
{
    if (target.dim() != kernel.dim() || x.size() != kernel.dim())
        throw ValidationError{"target dimension does not match kernel"};
    RateToSetResult out;
    if (target.closure_contains(x))
    {
        out.value = ExtendedReal{0.0};
        out.argmin = x;
        out.detail.value = ExtendedReal{0.0};
        out.detail.path = PolygonalPath::straight_line(
            x, x, opts.segments, opts.minimize.horizon);
        out.detail.straight_line_value = ExtendedReal{0.0};
        return out;
    }

    auto evaluate = [&](Vector const& y) -> RateFunctionResult {
        ++out.evaluations;
        try
        {
            return minimize_action(kernel, x, y, opts.segments, opts.minimize);
        }
        catch (Infeasible const&)
        {
            RateFunctionResult r;
            r.value = ExtendedReal::infinity();
            return r;
        }
    };

    bool found = false;
    for (auto const& y : target.closure_grid(opts.grid_per_axis))
    {
        auto r = evaluate(y);
        if (r.value.is_finite() && (!found || r.value < out.value))
        {
            found = true;
            out.value = r.value;
            out.argmin = y;
            out.detail = std::move(r);
        }
    }
    if (!found)
        throw Infeasible{"every grid point of the target is unreachable"};

    auto [lo, hi] = target.bounds();
    double step = (hi - lo).maxCoeff() / std::max(1, opts.grid_per_axis - 1);
    int const d = kernel.dim();
    for (int level = 0; level < opts.polish_levels; ++level, step *= 0.5)
    {
        for (int moves = 0; moves < 8; ++moves)
        {
            bool improved = false;
            for (int k = 0; k < d && !improved; ++k)
            {
                for (double sign : {-1.0, 1.0})
                {
                    Vector y = target.project(out.argmin
                                              + sign * step
                                                    * Vector::Unit(d, k));
                    if ((y - out.argmin).norm() < 1e-15)
                        continue;
                    auto r = evaluate(y);
                    if (r.value < out.value)
                    {
                        out.value = r.value;
                        out.argmin = y;
                        out.detail = std::move(r);
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved)
                break;
        }
    }
    return out;
}

}  // namespace wflab
