#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "types.hpp"

namespace wflab {

struct LbfgsOptions
{
    int memory = 8;
    int max_iterations = 2000;
    //! Stop when |grad| <= gradient_tolerance * (1 + |f|).
    double gradient_tolerance = 1e-7;
    double armijo = 1e-4;
    int max_backtracks = 50;
};

struct LbfgsResult
{
    Vector x;
    double value = kInfinity;
    double gradient_norm = kInfinity;
    int iterations = 0;
    bool converged = false;
};

//! Objective returning f(x) and writing grad f(x); +inf marks infeasibility.
using Objective = std::function<double(Vector const&, Vector&)>;

//---------------------------------------------------------------------------//
/*!
 * Limited-memory BFGS with backtracking Armijo line search.
 *
 * Infinite objective values are treated as walls: the line search shrinks
 * the step until it lands on a finite value that satisfies the Armijo
 * condition. The iterate never gets worse than the starting point.
 */
inline LbfgsResult lbfgs_minimize(Objective const& fn,
                                  Vector x,
                                  LbfgsOptions const& opts = {})
{
    LbfgsResult out;
    Vector g(x.size());
    double f = fn(x, g);
    out.x = x;
    out.value = f;
    if (!std::isfinite(f))
        return out;

    std::deque<Vector> s_hist;
    std::deque<Vector> y_hist;
    std::deque<double> rho_hist;
    Vector g_new(x.size());

    for (int iter = 0; iter < opts.max_iterations; ++iter)
    {
        out.iterations = iter;
        double gnorm = g.norm();
        out.gradient_norm = gnorm;
        if (gnorm <= opts.gradient_tolerance * (1.0 + std::abs(f)))
        {
            out.converged = true;
            break;
        }

        // Two-loop recursion.
        Vector q = g;
        std::vector<double> a(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;)
        {
            a[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= a[i] * y_hist[i];
        }
        double gamma = 1.0;
        if (!s_hist.empty())
            gamma = s_hist.back().dot(y_hist.back())
                    / y_hist.back().squaredNorm();
        else
            gamma = 1.0 / std::max(1.0, gnorm);
        Vector dir = gamma * q;
        for (std::size_t i = 0; i < s_hist.size(); ++i)
        {
            double b = rho_hist[i] * y_hist[i].dot(dir);
            dir += (a[i] - b) * s_hist[i];
        }
        dir = -dir;
        double slope = g.dot(dir);
        if (!(slope < 0))
        {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g / std::max(1.0, gnorm);
            slope = g.dot(dir);
        }

        double t = 1.0;
        bool accepted = false;
        Vector x_new;
        double f_new = kInfinity;
        for (int k = 0; k < opts.max_backtracks; ++k, t *= 0.5)
        {
            x_new = x + t * dir;
            f_new = fn(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + opts.armijo * t * slope)
            {
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            if (s_hist.empty())
                break;
            // Retry from steepest descent with a fresh memory.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            continue;
        }

        Vector s = x_new - x;
        Vector y = g_new - g;
        double sy = s.dot(y);
        if (sy > 1e-16 * s.norm() * y.norm())
        {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory)
            {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = std::move(x_new);
        g = g_new;
        f = f_new;
        out.x = x;
        out.value = f;
        out.gradient_norm = g.norm();
    }
    return out;
}

}  // namespace wflab
