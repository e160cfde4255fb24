#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace wflab {

//! Open Euclidean ball.
struct Ball
{
    Vector center;
    double radius = 0.0;
};

//! Open axis-aligned box.
struct Box
{
    Vector lower;
    Vector upper;
};

//---------------------------------------------------------------------------//
/*!
 * Open target set O: a ball or an axis-aligned box.
 */
class TargetSet
{
  public:
    using Shape = std::variant<Ball, Box>;

    TargetSet(Ball b) : shape_{std::move(b)} { validate(); }
    TargetSet(Box b) : shape_{std::move(b)} { validate(); }

    static TargetSet interval(double lo, double hi)
    {
        return Box{Vector::Constant(1, lo), Vector::Constant(1, hi)};
    }

    Shape const& shape() const { return shape_; }
    bool is_ball() const { return std::holds_alternative<Ball>(shape_); }

    int dim() const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
            return static_cast<int>(b->center.size());
        return static_cast<int>(std::get<Box>(shape_).lower.size());
    }

    bool contains(Vector const& y) const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
            return (y - b->center).norm() < b->radius;
        auto const& box = std::get<Box>(shape_);
        return (y.array() > box.lower.array()).all()
               && (y.array() < box.upper.array()).all();
    }

    bool closure_contains(Vector const& y) const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
            return (y - b->center).norm() <= b->radius;
        auto const& box = std::get<Box>(shape_);
        return (y.array() >= box.lower.array()).all()
               && (y.array() <= box.upper.array()).all();
    }

    //! Nearest point of the closure.
    Vector project(Vector const& y) const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
        {
            Vector d = y - b->center;
            double n = d.norm();
            if (n <= b->radius)
                return y;
            return b->center + d * (b->radius / n);
        }
        auto const& box = std::get<Box>(shape_);
        return y.cwiseMax(box.lower).cwiseMin(box.upper);
    }

    //! Bounding box of the closure.
    std::pair<Vector, Vector> bounds() const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
        {
            Vector r = Vector::Constant(b->center.size(), b->radius);
            return {b->center - r, b->center + r};
        }
        auto const& box = std::get<Box>(shape_);
        return {box.lower, box.upper};
    }

    //! Deterministic grid on the closure, `per_axis` points per axis.
    std::vector<Vector> closure_grid(int per_axis) const
    {
        auto [lo, hi] = bounds();
        int const dim = static_cast<int>(lo.size());
        std::vector<Vector> out;
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        while (true)
        {
            Vector p(dim);
            for (int k = 0; k < dim; ++k)
            {
                double t = per_axis == 1
                               ? 0.5
                               : static_cast<double>(idx[k]) / (per_axis - 1);
                p[k] = lo[k] + t * (hi[k] - lo[k]);
            }
            if (closure_contains(p))
                out.push_back(std::move(p));
            int k = 0;
            while (k < dim && ++idx[k] == per_axis)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
        if (auto* b = std::get_if<Ball>(&shape_); b && dim > 1)
        {
            // Boundary points along the axes, which a box grid misses.
            for (int k = 0; k < dim; ++k)
            {
                out.push_back(b->center + b->radius * Vector::Unit(dim, k));
                out.push_back(b->center - b->radius * Vector::Unit(dim, k));
            }
        }
        return out;
    }

    std::string describe() const
    {
        auto vec = [](Vector const& v) {
            std::string s = "[";
            for (Eigen::Index i = 0; i < v.size(); ++i)
                s += (i ? "," : "") + std::to_string(v[i]);
            return s + "]";
        };
        if (auto* b = std::get_if<Ball>(&shape_))
            return "ball(center=" + vec(b->center)
                   + ", radius=" + std::to_string(b->radius) + ")";
        auto const& box = std::get<Box>(shape_);
        return "box(lower=" + vec(box.lower) + ", upper=" + vec(box.upper)
               + ")";
    }

  private:
    Shape shape_;

    void validate() const
    {
        if (auto* b = std::get_if<Ball>(&shape_))
        {
            if (b->center.size() == 0 || !b->center.allFinite()
                || !(b->radius > 0) || !std::isfinite(b->radius))
                throw ValidationError{"ball needs a finite center and R > 0"};
            return;
        }
        auto const& box = std::get<Box>(shape_);
        if (box.lower.size() == 0 || box.lower.size() != box.upper.size())
            throw ValidationError{"box bounds have mismatched dimensions"};
        if (!(box.lower.array() < box.upper.array()).all())
            throw ValidationError{"box needs lower < upper on every axis"};
    }
};

}  // namespace wflab
