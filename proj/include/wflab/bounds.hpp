#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "action.hpp"
#include "conjugate.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "simulate.hpp"
#include "target.hpp"

namespace wflab {

//! Finite set of vectors R_i on the sphere of radius R.
struct DirectionSet
{
    std::vector<Vector> directions;
    double radius = 0.0;

    //! The 2d vectors +-R e_k.
    static DirectionSet axes(int dim, double radius)
    {
        DirectionSet s;
        s.radius = radius;
        for (int k = 0; k < dim; ++k)
        {
            s.directions.push_back(radius * Vector::Unit(dim, k));
            s.directions.push_back(-radius * Vector::Unit(dim, k));
        }
        return s;
    }

    //! Rescales arbitrary nonzero vectors onto the sphere of radius R.
    static DirectionSet from_vectors(std::vector<Vector> const& vs,
                                     double radius)
    {
        DirectionSet s;
        s.radius = radius;
        for (auto const& v : vs)
        {
            double n = v.norm();
            if (!(n > 0))
                throw ValidationError{"direction vectors must be nonzero"};
            s.directions.push_back(v * (radius / n));
        }
        s.validate();
        return s;
    }

    void validate() const
    {
        if (directions.empty())
            throw ValidationError{"direction set is empty"};
        if (!(radius > 0))
            throw ValidationError{"direction radius must be positive"};
        for (auto const& d : directions)
        {
            if (std::abs(d.norm() - radius) > 1e-12 * (1 + radius))
                throw ValidationError{"direction off the sphere of radius R"};
        }
    }
};

struct ChernoffBound
{
    double total = 0.0;
    //! exp(-t L_1(R_i / t) / h) per direction; 0 where L_1 is infinite.
    std::vector<double> terms;
    std::vector<ExtendedReal> rates;
};

/// sum_i exp(-t L_1(R_i / t) / h): bound on the probability of leaving B(x, R).
inline ChernoffBound chernoff_exit_bound(RateProfile const& profile,
                                         double t,
                                         double h,
                                         DirectionSet const& dirs)
{
    if (!(t > 0) || !(h > 0))
        throw ValidationError{"Chernoff bound needs t > 0 and h > 0"};
    dirs.validate();
    ChernoffBound out;
    for (auto const& r : dirs.directions)
    {
        auto l1 = profile(r / t);
        out.rates.push_back(l1);
        double term = l1.is_finite() ? std::exp(-t * l1.value() / h) : 0.0;
        out.terms.push_back(term);
        out.total += term;
    }
    return out;
}

//! Time step, increment bound and confinement radius defining the set E.
struct SkeletonConfig
{
    double delta_t = 0.1;
    double delta = 1.0;
    double radius = kInfinity;
};

/*!
 * Estimate of P(E^c) for the skeleton (X_{t_1}, ..., X_{t_n}), t_k = k dt,
 * where E requires |X_{t_k} - x0| <= R and |X_{t_{k+1}} - X_{t_k}| <= delta.
 */
inline McEstimate skeleton_event_estimate(JumpKernel const& kernel,
                                          SimConfig const& cfg,
                                          SkeletonConfig const& skel)
{
    validate_sim_config(kernel, cfg);
    if (!(skel.delta_t > 0) || skel.delta_t > cfg.horizon)
        throw ValidationError{"skeleton time step must lie in (0, horizon]"};
    if (!(skel.delta > 0) || !(skel.radius > 0))
        throw ValidationError{"skeleton needs delta > 0 and R > 0"};
    double steps_real = cfg.horizon / skel.delta_t;
    auto steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
        throw ValidationError{"horizon / delta_t must be an integer"};

    std::vector<double> times(steps);
    for (std::size_t k = 0; k < steps; ++k)
        times[k] = std::min(cfg.horizon,
                            static_cast<double>(k + 1) * skel.delta_t);

    auto zero = Vector::Zero(kernel.dim()).eval();
    simulate_detail::Engine engine{kernel, cfg, zero, zero};
    std::vector<double> values(cfg.n_paths, 0.0);
    std::vector<char> aborted(cfg.n_paths, 0);
    parallel_for(
        cfg.n_paths,
        [&](std::size_t i) {
            RandomStream rng{cfg.seed, i};
            Vector prev = cfg.x0;
            bool escaped = false;
            auto out = engine.run(
                rng, times, [](double, Vector const&, long) {},
                [&](std::size_t, Vector const& x) {
                    if ((x - cfg.x0).norm() > skel.radius
                        || (x - prev).norm() > skel.delta)
                        escaped = true;
                    prev = x;
                });
            aborted[i] = out.aborted ? 1 : 0;
            values[i] = escaped ? 1.0 : 0.0;
        },
        cfg.workers);
    return simulate_detail::summarize(values, aborted, cfg.seed);
}

enum class TiltPolicy
{
    automatic,
    plain,
    tilted,
};

enum class EstimatorKind
{
    plain,
    tilted,
};

inline std::string to_string(EstimatorKind k)
{
    return k == EstimatorKind::plain ? "plain" : "tilted";
}

struct LdpOptions
{
    std::vector<double> h_list{0.2, 0.1, 0.05, 0.02};
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    TiltPolicy policy = TiltPolicy::automatic;
    //! Under the automatic policy, rows with h >= this use plain sampling.
    double plain_from_h = 0.5;
    double tolerance_base = 0.15;
    double tolerance_slope = 2.0;
    double horizon = 1.0;
    double substep_fraction = 0.1;
    std::size_t workers = 0;
    std::string model_id = "model";
    RateToSetOptions rate;
};

struct LdpRow
{
    double h = 0.0;
    double p_hat = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::size_t n_aborted = 0;
    //! h ln p_hat; empty when p_hat == 0.
    std::optional<double> h_log_p;
    //! One-sided 95% upper bound 3/n, used when p_hat == 0.
    double p_upper = 0.0;
    EstimatorKind estimator = EstimatorKind::plain;
    double tolerance = 0.0;
    bool unreachable = false;
    bool insufficient = false;
};

struct LdpReport
{
    std::string model_id;
    Vector x0;
    TargetSet target;
    double horizon = 1.0;
    ExtendedReal variational_bound;
    std::optional<Vector> argmin;
    Vector tilt;
    std::vector<LdpRow> rows;
    bool verdict = true;

    bool insufficient() const
    {
        for (auto const& r : rows)
        {
            if (r.insufficient)
                return true;
        }
        return false;
    }

    //! (-bound + tolerance) - h log p; >= 0 where the bound holds.
    double margin(LdpRow const& r) const
    {
        double lhs = r.h_log_p ? *r.h_log_p
                               : r.h * std::log(r.p_upper);
        return -variational_bound.value() + r.tolerance - lhs;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Empirical check of lim sup h log P_1^h[1_O](x0) <= -inf_{y in O} l(x0, y).
 *
 * The variational bound comes from rate_to_set. Each h row estimates the
 * probability with the tilted sampler, tilt C = xi*(x0, (y* - x0) / T)
 * frozen at x0, or plain sampling for large h. The verdict holds when every
 * row with p_hat > 0 satisfies h log p_hat <= -bound + tol(h),
 * tol(h) = tolerance_base + tolerance_slope * h. Rows with
 * std_error / p_hat > 0.5 are flagged insufficient.
 */
inline LdpReport ldp_report(JumpKernel const& kernel,
                            Vector const& x0,
                            TargetSet const& target,
                            LdpOptions const& opts = {})
{
    if (opts.h_list.empty())
        throw ValidationError{"h_list is empty"};
    for (std::size_t i = 0; i < opts.h_list.size(); ++i)
    {
        if (!(opts.h_list[i] > 0))
            throw ValidationError{"h_list entries must be positive"};
        if (i > 0 && !(opts.h_list[i] < opts.h_list[i - 1]))
            throw ValidationError{"h_list must be strictly decreasing"};
    }
    LdpReport report{opts.model_id, x0, target, opts.horizon,
                     ExtendedReal::infinity(), std::nullopt,
                     Vector::Zero(kernel.dim()), {}, true};

    RateToSetOptions rate_opts = opts.rate;
    rate_opts.minimize.horizon = opts.horizon;
    try
    {
        auto r = rate_to_set(kernel, x0, target, rate_opts);
        report.variational_bound = r.value;
        report.argmin = r.argmin;
    }
    catch (Infeasible const&)
    {
        report.variational_bound = ExtendedReal::infinity();
    }

    bool can_tilt = false;
    if (report.argmin && report.variational_bound.value() > 0)
    {
        auto outcome = solve_legendre(FrozenHamiltonian{kernel, x0},
                                      (*report.argmin - x0) / opts.horizon);
        if (auto* c = std::get_if<ConjugateResult>(&outcome))
        {
            report.tilt = c->maximizer;
            can_tilt = true;
        }
    }

    auto f = indicator(target);
    for (std::size_t i = 0; i < opts.h_list.size(); ++i)
    {
        double h = opts.h_list[i];
        SimConfig cfg;
        cfg.h = h;
        cfg.horizon = opts.horizon;
        cfg.x0 = x0;
        cfg.n_paths = opts.n_paths;
        cfg.seed = mix_seed(opts.seed, i);
        cfg.substep_fraction = opts.substep_fraction;
        cfg.workers = opts.workers;

        bool tilted = can_tilt
                      && (opts.policy == TiltPolicy::tilted
                          || (opts.policy == TiltPolicy::automatic
                              && h < opts.plain_from_h));
        LdpRow row;
        row.h = h;
        row.tolerance = opts.tolerance_base + opts.tolerance_slope * h;
        McEstimate est;
        if (tilted)
        {
            row.estimator = EstimatorKind::tilted;
            est = sample_tilted(kernel, cfg, TiltConfig{report.tilt, x0}, f);
        }
        else
        {
            row.estimator = EstimatorKind::plain;
            est = estimate_semigroup(kernel, cfg, f);
        }
        row.p_hat = est.mean;
        row.std_error = est.std_error;
        row.n = est.n;
        row.n_aborted = est.n_aborted;
        row.p_upper = est.n > 0 ? 3.0 / static_cast<double>(est.n) : 1.0;
        if (row.p_hat > 0)
        {
            row.h_log_p = h * std::log(row.p_hat);
            row.insufficient = row.std_error / row.p_hat > 0.5;
            if (*row.h_log_p > -report.variational_bound.value()
                                   + row.tolerance)
                report.verdict = false;
        }
        else
        {
            row.unreachable = true;
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace wflab
