#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <set>
#include <vector>

#include "conjugate.hpp"
#include "errors.hpp"
#include "kernel.hpp"

namespace wflab {

struct MinorantOptions
{
    int coarse_cells_per_axis = 4;
    std::size_t max_support_points = 4096;
    //! Verification grid is this many times finer than the finest gap cell.
    int verification_factor = 10;
    std::size_t max_verification_points = 200000;
    int max_verification_rounds = 32;
    //! Smallest cell width, as a fraction of the box side 2R.
    double min_cell_fraction = 1.0 / (1 << 20);
    LegendreOptions legendre;
};

//---------------------------------------------------------------------------//
/*!
 * Finite maximum of tangent planes of alpha -> L(x, alpha).
 *
 * Each support point alpha_i contributes <beta_i, alpha> - H(x, beta_i) with
 * beta_i the Legendre maximizer at alpha_i, so the envelope is a global
 * minorant of L and touches it at every support point.
 */
class PiecewiseMinorant
{
  public:
    std::vector<Vector> support_points;
    std::vector<Vector> slopes;
    //! -H(x, beta_i)
    std::vector<double> intercepts;
    double gap_target = 0.0;
    double radius = 0.0;

    //! Largest and smallest L - L' seen on the verification grid.
    double max_verified_gap = 0.0;
    double min_verified_gap = 0.0;
    std::size_t verification_points = 0;

    std::size_t size() const { return support_points.size(); }

    double operator()(Vector const& alpha) const
    {
        double best = -kInfinity;
        for (std::size_t i = 0; i < slopes.size(); ++i)
            best = std::max(best, slopes[i].dot(alpha) + intercepts[i]);
        return best;
    }

    //! Adds the tangent at alpha; false when L(x, alpha) is infinite.
    bool add_support(FrozenHamiltonian const& ham,
                     Vector const& alpha,
                     LegendreOptions const& opts = {})
    {
        auto outcome = solve_legendre(ham, alpha, opts);
        auto* r = std::get_if<ConjugateResult>(&outcome);
        if (!r)
            return false;
        support_points.push_back(alpha);
        slopes.push_back(r->maximizer);
        intercepts.push_back(-ham(r->maximizer));
        return true;
    }

    static PiecewiseMinorant
    from_support_points(FrozenHamiltonian const& ham,
                        std::vector<Vector> const& points,
                        LegendreOptions const& opts = {})
    {
        PiecewiseMinorant m;
        for (auto const& p : points)
        {
            if (!m.add_support(ham, p, opts))
                throw NonSteep{"support point outside the effective domain",
                               p.normalized()};
        }
        return m;
    }
};

namespace minorant_detail {

struct Cell
{
    Vector lower;
    double width;
    int depth;
};

//! Vertex offsets of the unit hypercube.
inline std::vector<Vector> corners(int dim)
{
    std::vector<Vector> out;
    for (std::uint32_t mask = 0; mask < (1u << dim); ++mask)
    {
        Vector c(dim);
        for (int k = 0; k < dim; ++k)
            c[k] = (mask >> k) & 1u ? 1.0 : 0.0;
        out.push_back(std::move(c));
    }
    return out;
}

//! Euclidean distance from the origin to an axis-aligned box.
inline double distance_to_box(Vector const& lower, double width)
{
    double sq = 0.0;
    for (Eigen::Index k = 0; k < lower.size(); ++k)
    {
        double lo = lower[k];
        double hi = lower[k] + width;
        double d = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace minorant_detail

//---------------------------------------------------------------------------//
/*!
 * Build a tangent-envelope minorant with gap at most chi on |alpha| <= R.
 *
 * Cells of a coarse lattice over [-R, R]^d are bisected while the gap at
 * their midpoint exceeds chi; all cell vertices in the effective domain
 * become tangency points. A verification pass on a grid ten times finer
 * than the finest gap cell adds the worst offenders as extra support points
 * until the gap bound holds everywhere on the grid. Points of the ball
 * outside the effective domain of L (where L is infinite) are skipped.
 */
inline PiecewiseMinorant build_minorant(JumpKernel const& kernel,
                                        Vector const& x,
                                        double radius,
                                        double chi,
                                        MinorantOptions const& opts = {})
{
    using namespace minorant_detail;
    if (!(radius > 0) || !(chi > 0))
        throw ValidationError{"minorant needs R > 0 and chi > 0"};

    int const dim = kernel.dim();
    FrozenHamiltonian ham{kernel, x, opts.legendre.exponent_cap};
    PiecewiseMinorant m;
    m.gap_target = chi;
    m.radius = radius;

    double const side = 2.0 * radius;
    double const min_width = side * opts.min_cell_fraction;
    double const key_scale = 1.0 / (side * opts.min_cell_fraction);

    std::set<std::vector<long long>> seen;
    std::set<std::vector<long long>> infeasible;
    auto key_of = [&](Vector const& a) {
        std::vector<long long> key(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k)
            key[k] = std::llround((a[k] + radius) * key_scale * 4.0);
        return key;
    };
    auto check_budget = [&] {
        if (m.size() > opts.max_support_points)
            throw BudgetExceeded{"minorant exceeded "
                                 + std::to_string(opts.max_support_points)
                                 + " support points"};
    };
    // Returns whether alpha lies in the effective domain.
    auto visit_vertex = [&](Vector const& alpha) {
        auto key = key_of(alpha);
        if (seen.count(key))
            return true;
        if (infeasible.count(key))
            return false;
        if (alpha.norm() > radius * (1 + 1e-12))
            return true;
        if (m.add_support(ham, alpha, opts.legendre))
        {
            seen.insert(std::move(key));
            check_budget();
            return true;
        }
        infeasible.insert(std::move(key));
        return false;
    };

    auto const unit_corners = corners(dim);
    double const coarse_width = side / opts.coarse_cells_per_axis;
    std::deque<Cell> queue;
    {
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        while (true)
        {
            Vector lower(dim);
            for (int k = 0; k < dim; ++k)
                lower[k] = -radius + idx[k] * coarse_width;
            queue.push_back({lower, coarse_width, 0});
            int k = 0;
            while (k < dim && ++idx[k] == opts.coarse_cells_per_axis)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
    }

    int gap_depth = 0;
    while (!queue.empty())
    {
        Cell cell = std::move(queue.front());
        queue.pop_front();
        if (distance_to_box(cell.lower, cell.width) > radius)
            continue;

        bool any_feasible = false;
        for (auto const& c : unit_corners)
            any_feasible = visit_vertex(cell.lower + cell.width * c)
                           || any_feasible;

        Vector mid = cell.lower + Vector::Constant(dim, 0.5 * cell.width);
        if (mid.norm() > radius)
            continue;
        auto outcome = solve_legendre(ham, mid, opts.legendre);
        bool split = false;
        if (auto* r = std::get_if<ConjugateResult>(&outcome))
        {
            if (r->value - m(mid) > chi)
            {
                split = true;
                gap_depth = std::max(gap_depth, cell.depth + 1);
            }
        }
        else
        {
            split = any_feasible;
        }
        if (!split || cell.width * 0.5 < min_width)
            continue;
        double half = 0.5 * cell.width;
        for (auto const& c : unit_corners)
            queue.push_back({cell.lower + half * c, half, cell.depth + 1});
    }

    // Verification grid over [-R, R]^d restricted to the closed ball.
    double per_axis_target = opts.verification_factor
                                 * opts.coarse_cells_per_axis
                                 * std::ldexp(1.0, gap_depth)
                             + 1.0;
    double per_axis_cap = std::floor(std::pow(
        static_cast<double>(opts.max_verification_points), 1.0 / dim));
    auto per_axis = static_cast<long long>(
        std::max(2.0, std::min(per_axis_target, per_axis_cap)));
    double step = side / static_cast<double>(per_axis - 1);

    std::vector<Vector> grid;
    std::vector<double> grid_values;
    {
        std::vector<long long> idx(static_cast<std::size_t>(dim), 0);
        while (true)
        {
            Vector a(dim);
            for (int k = 0; k < dim; ++k)
                a[k] = -radius + static_cast<double>(idx[k]) * step;
            if (a.norm() <= radius * (1 + 1e-12))
            {
                auto lv = legendre_value(ham, a, opts.legendre);
                if (lv.is_finite())
                {
                    grid.push_back(std::move(a));
                    grid_values.push_back(lv.value());
                }
            }
            int k = 0;
            while (k < dim && ++idx[k] == per_axis)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
    }

    for (int round = 0;; ++round)
    {
        double max_gap = -kInfinity;
        double min_gap = kInfinity;
        std::vector<std::pair<double, std::size_t>> offenders;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            double gap = grid_values[i] - m(grid[i]);
            max_gap = std::max(max_gap, gap);
            min_gap = std::min(min_gap, gap);
            if (gap > chi)
                offenders.emplace_back(gap, i);
        }
        m.max_verified_gap = grid.empty() ? 0.0 : max_gap;
        m.min_verified_gap = grid.empty() ? 0.0 : min_gap;
        m.verification_points = grid.size();
        if (offenders.empty())
            break;
        if (round == opts.max_verification_rounds)
            throw BudgetExceeded{"minorant verification did not converge"};
        std::sort(offenders.begin(), offenders.end(),
                  [](auto const& a, auto const& b) { return a.first > b.first; });
        // Worst offenders first, at most 64 per round.
        std::size_t added = 0;
        for (auto const& [gap, i] : offenders)
        {
            if (m.add_support(ham, grid[i], opts.legendre))
            {
                check_budget();
                if (++added == 64)
                    break;
            }
        }
    }
    return m;
}

}  // namespace wflab
