#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "target.hpp"

namespace wflab {

//! Configuration of the scaled process generated by (1/h) L^h.
struct SimConfig
{
    double h = 0.1;
    double horizon = 1.0;
    Vector x0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    //! Candidate-event cap per path; 0 selects 10x the expected count + 1000.
    std::size_t max_events = 0;
    //! Euler substep as a fraction of h / rate_bound.
    double substep_fraction = 0.1;
    //! 0 uses worker_count().
    std::size_t workers = 0;
};

//! Exponential tilt: atom rates are multiplied by exp(<z_j, tilt>).
struct TiltConfig
{
    Vector tilt;
    //! State at which a state-dependent tilt was frozen (metadata only).
    Vector freeze_point;
    //! Largest admissible tilted dominating rate per atom.
    double max_rate = 1e6;
};

struct McEstimate
{
    double mean = 0.0;
    double std_error = 0.0;
    //! Completed paths entering the estimate.
    std::size_t n = 0;
    std::uint64_t seed = 0;
    //! Paths aborted by the event cap, excluded from mean and n.
    std::size_t n_aborted = 0;
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<Vector> states;
    //! Atom index of each accepted jump; -1 for the start and end records.
    std::vector<long> atoms;
    bool aborted = false;
    std::size_t candidates = 0;
};

using Observable = std::function<double(Vector const&)>;

//! Indicator of the open target set.
inline Observable indicator(TargetSet target)
{
    return [t = std::move(target)](Vector const& x) {
        return t.contains(x) ? 1.0 : 0.0;
    };
}

//! Hard errors throw ValidationError; soft problems come back as warnings.
inline std::vector<std::string> validate_sim_config(JumpKernel const& kernel,
                                                    SimConfig const& cfg)
{
    if (!(cfg.h > 0) || !std::isfinite(cfg.h))
        throw ValidationError{"h must be positive"};
    if (!(cfg.horizon > 0) || !std::isfinite(cfg.horizon))
        throw ValidationError{"horizon must be positive"};
    if (cfg.n_paths < 1)
        throw ValidationError{"n_paths must be at least 1"};
    if (cfg.x0.size() != kernel.dim() || !cfg.x0.allFinite())
        throw ValidationError{"x0 must be a finite state of the kernel's "
                              "dimension"};
    if (!(cfg.substep_fraction > 0) || cfg.substep_fraction > 1)
        throw ValidationError{"substep_fraction must lie in (0, 1]"};
    std::vector<std::string> warnings;
    double expected = 2.0 * kernel.rate_bound() * cfg.horizon
                      * static_cast<double>(kernel.size()) / cfg.h;
    if (cfg.max_events != 0 && static_cast<double>(cfg.max_events) < expected)
        warnings.push_back("max_events " + std::to_string(cfg.max_events)
                           + " is below twice the expected candidate count "
                           + std::to_string(expected));
    return warnings;
}

namespace simulate_detail {

struct Outcome
{
    Vector state;
    //! int_0^t H(X_s, C) ds for the integral covector C.
    double integral = 0.0;
    bool aborted = false;
    std::size_t candidates = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Event-driven sampler for one path.
 *
 * Candidate events arrive at total rate sum_j rate_bound * m_j / h, where
 * m_j = exp(<z_j, tilt>); candidate atom j is accepted with probability
 * lambda_j(X) / rate_bound and moves the state by h z_j. Between events the
 * compensator drift -sum_j lambda_j(X) z_j, always taken from the untilted
 * rates, is integrated by Euler substeps. When no rate depends on the state
 * the drift is constant and the state is recomputed exactly as
 * x0 + h * (sum of jumps) + drift * t.
 */
class Engine
{
  public:
    Engine(JumpKernel const& kernel,
           SimConfig const& cfg,
           Vector const& rate_tilt,
           Vector const& integral_covector,
           double max_rate = kInfinity)
        : kernel_{kernel}
        , h_{cfg.h}
        , horizon_{cfg.horizon}
        , x0_{cfg.x0}
        , bound_{kernel.rate_bound()}
        , covector_{integral_covector}
    {
        double const cap = kDefaultExponentCap;
        int const d = kernel.dim();
        if (rate_tilt.size() != d || covector_.size() != d)
            throw ValidationError{"tilt has wrong dimension"};
        double cumulative = 0.0;
        for (std::size_t j = 0; j < kernel.size(); ++j)
        {
            auto const& z = kernel.atom(j).displacement;
            double u = z.dot(rate_tilt);
            if (u > cap)
                throw ExponentOverflow{j, u, cap};
            double m = std::exp(u);
            if (bound_ * m > max_rate)
                throw RateBoundExceeded{
                    "tilted dominating rate of atom " + std::to_string(j)
                    + " exceeds " + std::to_string(max_rate)};
            cumulative += m;
            cumulative_.push_back(cumulative);
            double c = z.dot(covector_);
            if (c > cap)
                throw ExponentOverflow{j, c, cap};
            phi_.push_back(std::expm1(c) - c);
        }
        total_rate_ = bound_ * cumulative / h_;
        substep_ = bound_ > 0 ? cfg.substep_fraction * h_ / bound_ : kInfinity;
        state_independent_ = kernel.is_state_independent();
        if (state_independent_)
        {
            auto rates = kernel.rates(x0_);
            constant_drift_ = Vector::Zero(d);
            constant_h_ = 0.0;
            for (std::size_t j = 0; j < kernel.size(); ++j)
            {
                constant_drift_ -= rates[j] * kernel.atom(j).displacement;
                constant_h_ += rates[j] * phi_[j];
            }
        }
        double expected = total_rate_ * horizon_;
        cap_ = cfg.max_events != 0
                   ? cfg.max_events
                   : static_cast<std::size_t>(std::ceil(10 * expected)) + 1000;
    }

    double total_rate() const { return total_rate_; }

    /*!
     * Run one path. on_event(t, state, atom) fires after each accepted jump;
     * on_observe(k, state) fires at each observation time, which must be
     * sorted and within [0, horizon].
     */
    template<class OnEvent, class OnObserve>
    Outcome run(RandomStream& rng,
                std::span<double const> observe_at,
                OnEvent&& on_event,
                OnObserve&& on_observe) const
    {
        int const d = kernel_.dim();
        Outcome out;
        Vector x = x0_;
        Vector jumps = Vector::Zero(d);
        double t = 0.0;
        std::size_t next_obs = 0;

        auto exact_state = [&](double time) {
            return Vector{x0_ + h_ * jumps + constant_drift_ * time};
        };
        auto advance = [&](double target) {
            if (target <= t)
                return;
            if (state_independent_)
            {
                t = target;
                return;
            }
            double span = target - t;
            auto n = static_cast<long>(std::ceil(span / substep_));
            n = std::max(n, 1L);
            double ds = span / static_cast<double>(n);
            for (long s = 0; s < n; ++s)
            {
                Vector drift = Vector::Zero(d);
                double ham = 0.0;
                for (std::size_t j = 0; j < kernel_.size(); ++j)
                {
                    double r = kernel_.rate(j, x);
                    drift -= r * kernel_.atom(j).displacement;
                    ham += r * phi_[j];
                }
                out.integral += ham * ds;
                x += drift * ds;
            }
            t = target;
        };
        auto current = [&]() -> Vector {
            return state_independent_ ? exact_state(t) : x;
        };

        double next_candidate = total_rate_ > 0
                                    ? rng.exponential(total_rate_)
                                    : kInfinity;
        while (true)
        {
            double stop = std::min(next_candidate, horizon_);
            while (next_obs < observe_at.size() && observe_at[next_obs] <= stop)
            {
                advance(observe_at[next_obs]);
                on_observe(next_obs, current());
                ++next_obs;
            }
            advance(stop);
            if (next_candidate >= horizon_)
                break;

            if (++out.candidates > cap_)
            {
                out.aborted = true;
                break;
            }
            double pick = rng.uniform() * cumulative_.back();
            std::size_t j = 0;
            while (j + 1 < cumulative_.size() && pick >= cumulative_[j])
                ++j;
            double accept = rng.uniform();
            Vector here = current();
            double r = kernel_.rate(j, here);
            if (r < 0 || r > bound_ * (1 + 1e-12))
                throw RateBoundExceeded{
                    "rate of atom " + std::to_string(j) + " is "
                    + std::to_string(r) + ", outside [0, rate_bound]"};
            if (accept * bound_ < r)
            {
                auto const& z = kernel_.atom(j).displacement;
                if (state_independent_)
                    jumps += z;
                else
                    x += h_ * z;
                on_event(t, current(), static_cast<long>(j));
            }
            next_candidate = t + rng.exponential(total_rate_);
        }
        out.state = state_independent_ ? exact_state(horizon_) : x;
        if (state_independent_)
            out.integral = constant_h_ * horizon_;
        if (out.aborted)
            out.state = current();
        return out;
    }

  private:
    JumpKernel const& kernel_;
    double h_;
    double horizon_;
    Vector x0_;
    double bound_;
    Vector covector_;
    std::vector<double> cumulative_;
    std::vector<double> phi_;
    double total_rate_ = 0.0;
    double substep_ = kInfinity;
    bool state_independent_ = false;
    Vector constant_drift_;
    double constant_h_ = 0.0;
    std::size_t cap_ = 0;
};

inline McEstimate summarize(std::vector<double> const& values,
                            std::vector<char> const& aborted,
                            std::uint64_t seed)
{
    McEstimate est;
    est.seed = seed;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (aborted[i])
        {
            ++est.n_aborted;
            continue;
        }
        sum += values[i];
        ++est.n;
    }
    if (est.n == 0)
        return est;
    est.mean = sum / static_cast<double>(est.n);
    if (est.n > 1)
    {
        double ss = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            if (!aborted[i])
                ss += (values[i] - est.mean) * (values[i] - est.mean);
        }
        double var = ss / static_cast<double>(est.n - 1);
        est.std_error = std::sqrt(var / static_cast<double>(est.n));
    }
    return est;
}

//! Runs cfg.n_paths paths; value(outcome) gives each path's contribution.
template<class Value>
McEstimate monte_carlo(Engine const& engine,
                       SimConfig const& cfg,
                       Value&& value)
{
    std::vector<double> values(cfg.n_paths);
    std::vector<char> aborted(cfg.n_paths, 0);
    auto noop_event = [](double, Vector const&, long) {};
    auto noop_obs = [](std::size_t, Vector const&) {};
    parallel_for(
        cfg.n_paths,
        [&](std::size_t i) {
            RandomStream rng{cfg.seed, i};
            auto out = engine.run(rng, {}, noop_event, noop_obs);
            if (out.aborted)
                aborted[i] = 1;
            else
                values[i] = value(out);
        },
        cfg.workers);
    return summarize(values, aborted, cfg.seed);
}

inline Vector zero_like(JumpKernel const& kernel)
{
    return Vector::Zero(kernel.dim());
}

}  // namespace simulate_detail

//! One path of the scaled process with every accepted jump recorded.
inline Trajectory sample_path(JumpKernel const& kernel,
                              SimConfig const& cfg,
                              RandomStream& rng)
{
    validate_sim_config(kernel, cfg);
    auto zero = simulate_detail::zero_like(kernel);
    simulate_detail::Engine engine{kernel, cfg, zero, zero};
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(cfg.x0);
    traj.atoms.push_back(-1);
    auto out = engine.run(
        rng, {},
        [&](double t, Vector const& x, long j) {
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.atoms.push_back(j);
        },
        [](std::size_t, Vector const&) {});
    traj.aborted = out.aborted;
    traj.candidates = out.candidates;
    traj.times.push_back(out.aborted ? traj.times.back() : cfg.horizon);
    traj.states.push_back(out.state);
    traj.atoms.push_back(-1);
    return traj;
}

/// Plain Monte Carlo estimate of P_t^h f(x0) = E[f(X_t)].
inline McEstimate estimate_semigroup(JumpKernel const& kernel,
                                     SimConfig const& cfg,
                                     Observable const& f)
{
    validate_sim_config(kernel, cfg);
    auto zero = simulate_detail::zero_like(kernel);
    simulate_detail::Engine engine{kernel, cfg, zero, zero};
    return simulate_detail::monte_carlo(
        engine, cfg,
        [&](simulate_detail::Outcome const& o) { return f(o.state); });
}

/*!
 * Mean of exp((<C, X_t - x0> - int_0^t H(X_s, C) ds) / h), which is 1 for
 * the scaled process.
 */
inline McEstimate martingale_check(JumpKernel const& kernel,
                                   SimConfig const& cfg,
                                   TiltConfig const& tilt)
{
    validate_sim_config(kernel, cfg);
    simulate_detail::Engine engine{kernel, cfg,
                                   simulate_detail::zero_like(kernel),
                                   tilt.tilt};
    return simulate_detail::monte_carlo(
        engine, cfg, [&](simulate_detail::Outcome const& o) {
            double e = (tilt.tilt.dot(o.state - cfg.x0) - o.integral) / cfg.h;
            if (e > kDefaultExponentCap)
                throw ExponentOverflow{ExponentOverflow::npos, e,
                                       kDefaultExponentCap};
            return std::exp(e);
        });
}

/*!
 * Importance-sampled estimate of E[f(X_t)] under exponential tilting.
 *
 * Paths are drawn with atom rates lambda_j(x) exp(<z_j, C>) and the original
 * compensator drift, then weighted by
 * exp(-(<C, X_t - x0> - int_0^t H(X_s, C) ds) / h).
 */
inline McEstimate sample_tilted(JumpKernel const& kernel,
                                SimConfig const& cfg,
                                TiltConfig const& tilt,
                                Observable const& f)
{
    validate_sim_config(kernel, cfg);
    simulate_detail::Engine engine{kernel, cfg, tilt.tilt, tilt.tilt,
                                   tilt.max_rate};
    return simulate_detail::monte_carlo(
        engine, cfg, [&](simulate_detail::Outcome const& o) {
            double fx = f(o.state);
            if (fx == 0.0)
                return 0.0;
            double e = -(tilt.tilt.dot(o.state - cfg.x0) - o.integral)
                       / cfg.h;
            if (e > kDefaultExponentCap)
                throw ExponentOverflow{ExponentOverflow::npos, e,
                                       kDefaultExponentCap};
            return fx * std::exp(e);
        });
}

}  // namespace wflab
