#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "conjugate.hpp"
#include "errors.hpp"
#include "kernel.hpp"

namespace wflab {

//! Radical-inverse (Halton) point in [0,1)^dim, index >= 1.
inline Vector halton_point(std::size_t index, int dim)
{
    static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                     23, 29, 31, 37, 41, 43, 47, 53};
    if (dim > static_cast<int>(std::size(primes)))
        throw ValidationError{"Halton sequence supports at most 16 dims"};
    Vector p(dim);
    for (int k = 0; k < dim; ++k)
    {
        double f = 1.0;
        double r = 0.0;
        std::size_t i = index;
        int const base = primes[k];
        while (i > 0)
        {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        p[k] = r;
    }
    return p;
}

struct ProbeConfig
{
    //! Box of states probed for H.1 and H.2.
    Vector x_lower;
    Vector x_upper;
    std::size_t x_probes = 32;
    //! Grid points per axis for xi and alpha grids.
    int points_per_axis = 32;
    double xi_radius = 2.0;
    std::size_t convexity_pairs = 256;
    std::vector<double> deltas{1.0, 0.5, 0.25, 0.125, 0.0625};
    std::vector<double> superlinear_constants{1.0, 2.0, 4.0};
    std::vector<double> superlinear_radii{1,  2,   4,   8,   16,  32,
                                          64, 128, 256, 512, 1024};
    LegendreOptions legendre;
};

struct HypothesisFailure
{
    std::string hypothesis;
    std::string detail;
    Vector x;
    Vector probe;
};

struct ModulusSample
{
    double delta = 0.0;
    double modulus = 0.0;
};

struct SuperlinearRay
{
    Vector direction;
    std::vector<double> radii;
    //! L_1(r u) / r; +inf outside the effective domain.
    std::vector<double> ratios;
};

struct ThresholdSample
{
    double constant = 0.0;
    //! Smallest probed radius beyond which every ratio exceeds the constant.
    std::optional<double> threshold;
};

struct DiagnosticsReport
{
    double radius = 0.0;
    //! max over probes of H(x, xi) - H_1(xi); must be <= 0.
    double h1_max_excess = -kInfinity;
    double min_rate = kInfinity;
    double max_rate = -kInfinity;
    double h1_max_convexity_defect = 0.0;
    //! Bound on L and |dL/dalpha| over the probed alpha ball.
    double bound_m_upper = 0.0;
    //! Smallest Hessian eigenvalue of L over the probed alpha ball.
    double curvature_m_lower = kInfinity;
    std::size_t alpha_probes = 0;
    //! Probes on the sphere |alpha| = R where L is infinite.
    std::size_t boundary_nonsteep = 0;
    std::vector<ModulusSample> continuity;
    std::vector<SuperlinearRay> superlinearity;
    std::vector<ThresholdSample> thresholds;
    std::vector<HypothesisFailure> failures;

    bool ok() const { return failures.empty(); }
};

//! Raised when check_hypotheses finds at least one failure.
class HypothesisViolation : public Error
{
  public:
    explicit HypothesisViolation(DiagnosticsReport report)
        : Error{ErrorCode::hypothesis_violation, summarize(report)}
        , report_{std::move(report)}
    {
    }

    DiagnosticsReport const& report() const noexcept { return report_; }

  private:
    DiagnosticsReport report_;

    static std::string summarize(DiagnosticsReport const& r)
    {
        std::string s = "hypothesis violation:";
        for (auto const& f : r.failures)
            s += " [" + f.hypothesis + "] " + f.detail + ";";
        return s;
    }
};

namespace diagnostics_detail {

inline std::vector<Vector> box_grid(Vector const& lower,
                                    Vector const& upper,
                                    int per_axis)
{
    int const dim = static_cast<int>(lower.size());
    std::vector<Vector> out;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true)
    {
        Vector p(dim);
        for (int k = 0; k < dim; ++k)
        {
            double t = per_axis == 1 ? 0.5
                                     : static_cast<double>(idx[k])
                                           / (per_axis - 1);
            p[k] = lower[k] + t * (upper[k] - lower[k]);
        }
        out.push_back(std::move(p));
        int k = 0;
        while (k < dim && ++idx[k] == per_axis)
            idx[k++] = 0;
        if (k == dim)
            break;
    }
    return out;
}

inline std::vector<Vector> state_probes(ProbeConfig const& cfg)
{
    std::vector<Vector> out;
    Vector span = cfg.x_upper - cfg.x_lower;
    for (std::size_t i = 1; i <= cfg.x_probes; ++i)
    {
        Vector u = halton_point(i, static_cast<int>(span.size()));
        out.push_back(cfg.x_lower + span.cwiseProduct(u));
    }
    return out;
}

inline std::vector<Vector> axis_directions(int dim)
{
    std::vector<Vector> out;
    for (int k = 0; k < dim; ++k)
    {
        out.push_back(Vector::Unit(dim, k));
        out.push_back(-Vector::Unit(dim, k));
    }
    return out;
}

}  // namespace diagnostics_detail

//---------------------------------------------------------------------------//
/*!
 * Probe the regularity hypotheses of a kernel on finite grids.
 *
 * - H.1: rates are nonnegative and bounded by the asserted rate bound,
 *   H(x, xi) <= H_1(xi), and H_1 is midpoint convex on sampled pairs.
 * - H.2: L(x, .) is finite on the open ball |alpha| < R with bounded value
 *   and gradient and Hessian >= m I; the continuity modulus
 *   sup |L(x', a) - L(x, a)| / (1 + L(x, a)) over |x - x'| < delta is
 *   tabulated for decreasing delta and must not increase.
 * - H.3: L_1(alpha) / |alpha| grows along axis rays and eventually exceeds
 *   each requested constant.
 *
 * Alpha probes on the sphere |alpha| = R where L is infinite are counted
 * separately and excluded from the constants; interior infinities fail H.2.
 */
inline DiagnosticsReport check_hypotheses(JumpKernel const& kernel,
                                          DominatingHamiltonian const& h1,
                                          double radius,
                                          ProbeConfig cfg = {})
{
    using namespace diagnostics_detail;
    if (!(radius > 0))
        throw ValidationError{"check_hypotheses needs R > 0"};
    int const dim = kernel.dim();
    if (cfg.x_lower.size() == 0)
        cfg.x_lower = Vector::Constant(dim, -1.0);
    if (cfg.x_upper.size() == 0)
        cfg.x_upper = Vector::Constant(dim, 1.0);
    if (cfg.x_lower.size() != dim || cfg.x_upper.size() != dim)
        throw ValidationError{"probe box has wrong dimension"};
    if (cfg.points_per_axis < 2)
        throw ValidationError{"probe grids need at least 2 points per axis"};

    DiagnosticsReport report;
    report.radius = radius;
    auto fail = [&](std::string hyp, std::string detail, Vector x, Vector p) {
        report.failures.push_back(
            {std::move(hyp), std::move(detail), std::move(x), std::move(p)});
    };

    auto const xs = state_probes(cfg);

    // H.1: positivity of the measure and the uniform bound.
    for (auto const& x : xs)
    {
        for (std::size_t j = 0; j < kernel.size(); ++j)
        {
            double r = kernel.rate(j, x);
            report.min_rate = std::min(report.min_rate, r);
            report.max_rate = std::max(report.max_rate, r);
            if (r < 0)
                fail("H.1",
                     "rate of atom " + std::to_string(j) + " is negative ("
                         + std::to_string(r) + ")",
                     x, Vector{});
            else if (r > kernel.rate_bound())
                fail("H.1",
                     "rate of atom " + std::to_string(j)
                         + " exceeds rate_bound",
                     x, Vector{});
        }
    }
    if (!report.ok())
        throw HypothesisViolation{std::move(report)};

    auto const xis = box_grid(Vector::Constant(dim, -cfg.xi_radius),
                              Vector::Constant(dim, cfg.xi_radius),
                              cfg.points_per_axis);
    std::vector<double> h1_values;
    h1_values.reserve(xis.size());
    for (auto const& xi : xis)
        h1_values.push_back(h1(xi, cfg.legendre.exponent_cap));
    for (auto const& x : xs)
    {
        FrozenHamiltonian ham{kernel, x, cfg.legendre.exponent_cap};
        for (std::size_t i = 0; i < xis.size(); ++i)
        {
            double excess = ham(xis[i]) - h1_values[i];
            if (excess > report.h1_max_excess)
                report.h1_max_excess = excess;
            if (excess > 1e-12 * (1.0 + h1_values[i]))
                fail("H.1", "H(x, xi) exceeds H_1(xi)", x, xis[i]);
        }
    }
    for (std::size_t i = 1; i <= cfg.convexity_pairs; ++i)
    {
        Vector u = halton_point(i, 2 * dim);
        Vector a = cfg.xi_radius * (2.0 * u.head(dim).array() - 1.0).matrix();
        Vector b = cfg.xi_radius * (2.0 * u.tail(dim).array() - 1.0).matrix();
        double defect = h1(0.5 * (a + b)) - 0.5 * (h1(a) + h1(b));
        report.h1_max_convexity_defect
            = std::max(report.h1_max_convexity_defect, defect);
        if (defect > 1e-12 * (1.0 + std::abs(h1(a)) + std::abs(h1(b))))
            fail("H.1", "H_1 is not convex on a probed segment", Vector{}, a);
    }

    // H.2: finiteness and curvature on the alpha ball.
    std::vector<Vector> alphas;
    for (auto& a : box_grid(Vector::Constant(dim, -radius),
                            Vector::Constant(dim, radius),
                            cfg.points_per_axis))
    {
        if (a.norm() <= radius * (1 + 1e-12))
            alphas.push_back(std::move(a));
    }
    report.alpha_probes = alphas.size();
    report.bound_m_upper = 0.0;
    for (auto const& x : xs)
    {
        FrozenHamiltonian ham{kernel, x, cfg.legendre.exponent_cap};
        for (auto const& a : alphas)
        {
            auto outcome = solve_legendre(ham, a, cfg.legendre);
            if (auto* r = std::get_if<ConjugateResult>(&outcome))
            {
                report.bound_m_upper = std::max(
                    {report.bound_m_upper, r->value, r->maximizer.norm()});
                Eigen::SelfAdjointEigenSolver<Matrix> eig(r->curvature);
                double lo = eig.eigenvalues().minCoeff();
                report.curvature_m_lower = std::min(report.curvature_m_lower,
                                                    lo);
            }
            else if (a.norm() >= radius * (1 - 1e-12))
            {
                ++report.boundary_nonsteep;
            }
            else
            {
                fail("H.2", "L(x, alpha) is infinite inside the ball", x, a);
            }
        }
    }
    if (!(report.curvature_m_lower > 0))
        fail("H.2", "Hessian of L is not bounded below by a positive m",
             Vector{}, Vector{});

    // Continuity modulus in x.
    auto const dirs = axis_directions(dim);
    for (double delta : cfg.deltas)
    {
        double modulus = 0.0;
        if (!kernel.is_state_independent())
        {
            for (auto const& x : xs)
            {
                FrozenHamiltonian ham{kernel, x, cfg.legendre.exponent_cap};
                for (auto const& u : dirs)
                {
                    Vector xp = x + 0.5 * delta * u;
                    FrozenHamiltonian ham_p{kernel, xp,
                                            cfg.legendre.exponent_cap};
                    for (auto const& a : alphas)
                    {
                        auto l = legendre_value(ham, a, cfg.legendre);
                        auto lp = legendre_value(ham_p, a, cfg.legendre);
                        if (l.is_infinite() || lp.is_infinite())
                            continue;
                        modulus = std::max(modulus,
                                           std::abs(lp.value() - l.value())
                                               / (1.0 + l.value()));
                    }
                }
            }
        }
        report.continuity.push_back({delta, modulus});
    }
    for (std::size_t i = 1; i < report.continuity.size(); ++i)
    {
        auto const& prev = report.continuity[i - 1];
        auto const& cur = report.continuity[i];
        if (cur.delta < prev.delta && cur.modulus > prev.modulus + 1e-9)
            fail("H.2",
                 "continuity modulus increases as delta decreases (delta="
                     + std::to_string(cur.delta) + ")",
                 Vector{}, Vector{});
    }

    // H.3: superlinear growth of L_1 along axis rays.
    RateProfile profile{h1, cfg.legendre};
    auto radii = cfg.superlinear_radii;
    std::sort(radii.begin(), radii.end());
    for (auto const& u : dirs)
    {
        SuperlinearRay ray{u, radii, {}};
        for (double r : radii)
        {
            auto v = profile(r * u);
            ray.ratios.push_back(v.is_finite() ? v.value() / r : kInfinity);
        }
        for (std::size_t i = 1; i < ray.ratios.size(); ++i)
        {
            if (ray.ratios[i] < ray.ratios[i - 1] * (1 - 1e-12))
                fail("H.3", "L_1(alpha)/|alpha| decreases along a ray",
                     Vector{}, radii[i] * u);
        }
        report.superlinearity.push_back(std::move(ray));
    }
    for (double c : cfg.superlinear_constants)
    {
        ThresholdSample sample{c, std::nullopt};
        for (std::size_t i = radii.size(); i-- > 0;)
        {
            bool all_above = true;
            for (auto const& ray : report.superlinearity)
                all_above = all_above && ray.ratios[i] >= c;
            if (!all_above)
                break;
            sample.threshold = radii[i];
        }
        if (!sample.threshold)
            fail("H.3",
                 "L_1(alpha)/|alpha| never exceeds C=" + std::to_string(c)
                     + " on the probed radii",
                 Vector{}, Vector{});
        report.thresholds.push_back(sample);
    }

    if (!report.ok())
        throw HypothesisViolation{std::move(report)};
    return report;
}

}  // namespace wflab
