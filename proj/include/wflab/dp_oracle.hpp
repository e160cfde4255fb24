#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "conjugate.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "target.hpp"

namespace wflab {

//! Uniform state lattice and time discretisation for the DP oracle.
struct LatticeSpec
{
    Vector lower;
    Vector upper;
    int points_per_axis = 201;
    int steps = 40;
    double horizon = 1.0;
};

struct DpResult
{
    ExtendedReal value;
    Vector argmin;
};

//---------------------------------------------------------------------------//
/*!
 * Brute-force rate to a target by value iteration on a state lattice.
 *
 * V_0 is zero at x and +inf elsewhere;
 * V_{k+1}(x') = min_x [V_k(x) + dt L(x, (x' - x) / dt)].
 * The result is min over lattice points in the closure of the target of
 * V_N. Restricting paths to the lattice makes this an upper bound for the
 * continuous-knot minimum with the same number of steps, and refining the
 * lattice with nested nodes can only lower it.
 */
inline DpResult dp_oracle(JumpKernel const& kernel,
                          Vector const& x,
                          TargetSet const& target,
                          LatticeSpec const& lattice,
                          LegendreOptions const& opts = {})
{
    int const dim = kernel.dim();
    if (dim > 2)
        throw ValidationError{"dp_oracle supports d <= 2"};
    if (lattice.lower.size() != dim || lattice.upper.size() != dim)
        throw ValidationError{"lattice bounds have wrong dimension"};
    if (lattice.points_per_axis < 2 || lattice.steps < 1)
        throw ValidationError{"lattice needs >= 2 points and >= 1 step"};
    if (!(lattice.lower.array() < lattice.upper.array()).all())
        throw ValidationError{"lattice needs lower < upper"};

    auto const n = static_cast<std::size_t>(lattice.points_per_axis);
    std::size_t nodes = dim == 1 ? n : n * n;
    if (nodes > 8192)
        throw BudgetExceeded{"dp_oracle lattice exceeds 8192 nodes"};
    Vector spacing = (lattice.upper - lattice.lower)
                     / static_cast<double>(n - 1);

    auto node = [&](std::size_t idx) {
        Vector p(dim);
        for (int k = 0; k < dim; ++k)
        {
            p[k] = lattice.lower[k] + static_cast<double>(idx % n) * spacing[k];
            idx /= n;
        }
        return p;
    };

    // Locate x on the lattice.
    std::size_t start = 0;
    {
        std::size_t stride = 1;
        for (int k = 0; k < dim; ++k)
        {
            double f = (x[k] - lattice.lower[k]) / spacing[k];
            double r = std::round(f);
            if (std::abs(f - r) > 1e-9 || r < 0 || r > static_cast<double>(n - 1))
                throw ValidationError{"start state must be a lattice node"};
            start += static_cast<std::size_t>(r) * stride;
            stride *= n;
        }
    }

    double const dt = lattice.horizon / lattice.steps;
    std::vector<Vector> points(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
        points[i] = node(i);

    // cost[i * nodes + j] = dt L(x_i, (x_j - x_i) / dt)
    std::vector<double> cost(nodes * nodes);
    parallel_for(nodes, [&](std::size_t i) {
        FrozenHamiltonian ham{kernel, points[i], opts.exponent_cap};
        for (std::size_t j = 0; j < nodes; ++j)
        {
            auto l = legendre_value(ham, (points[j] - points[i]) / dt, opts);
            cost[i * nodes + j] = l.is_finite() ? dt * l.value() : kInfinity;
        }
    });

    std::vector<double> value(nodes, kInfinity);
    std::vector<double> next(nodes);
    value[start] = 0.0;
    for (int step = 0; step < lattice.steps; ++step)
    {
        std::fill(next.begin(), next.end(), kInfinity);
        for (std::size_t i = 0; i < nodes; ++i)
        {
            if (value[i] == kInfinity)
                continue;
            double const* row = &cost[i * nodes];
            for (std::size_t j = 0; j < nodes; ++j)
                next[j] = std::min(next[j], value[i] + row[j]);
        }
        value.swap(next);
    }

    DpResult out{ExtendedReal::infinity(), x};
    for (std::size_t j = 0; j < nodes; ++j)
    {
        bool inside = (target.project(points[j]) - points[j]).norm()
                      <= 1e-9 * spacing.maxCoeff();
        if (inside && value[j] < out.value.value())
        {
            out.value = ExtendedReal{value[j]};
            out.argmin = points[j];
        }
    }
    return out;
}

}  // namespace wflab
