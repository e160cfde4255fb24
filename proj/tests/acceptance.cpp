// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <wflab/wflab.hpp>

#include "models.hpp"

using namespace wflab;
using namespace wflab::test;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(char const* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double unit_l(double a)
{
    return (1 + a) * std::log1p(a) - a;
}

constexpr std::uint64_t kSeed = 20240611;
constexpr double kBound = 0.790726829685388;  // 2.5 ln 2.5 - 1.5
TargetSet const kEvent = TargetSet::interval(1.5, 2.5);

LdpOptions ldp_options()
{
    LdpOptions opts;
    opts.h_list = {0.2, 0.1, 0.05, 0.02};
    opts.n_paths = 100000;
    opts.seed = kSeed;
    opts.policy = TiltPolicy::tilted;
    opts.model_id = "unit-jump";
    return opts;
}

//---------------------------------------------------------------------------//

Outcome conjugate_exactness()
{
    auto k = unit_jump();
    double worst_l = 0, worst_xi = 0;
    for (double a : {-0.5, 0.0, std::exp(1.0) - 1, 3.0})
    {
        auto r = legendre(k, scalar(0.0), scalar(a));
        worst_l = std::max(worst_l, std::abs(r.value - unit_l(a)));
        worst_xi = std::max(worst_xi,
                            std::abs(r.maximizer[0] - std::log1p(a)));
    }
    return {worst_l <= 1e-8 && worst_xi <= 1e-8,
            fmt("max |L - closed form| = %.2e, max |xi* - ln(1+a)| = %.2e",
                worst_l, worst_xi)};
}

Outcome biconjugation()
{
    struct Case
    {
        char const* name;
        JumpKernel kernel;
        double lo, hi;
    };
    // Grids cover grad H([-1, 1]): (e^xi - 1) and 2 sinh(xi).
    Case const cases[] = {{"unit-jump", unit_jump(), -0.7, 1.8},
                          {"symmetric", symmetric(), -2.4, 2.4}};
    std::mt19937_64 gen{kSeed};
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    double worst = 0;
    for (auto const& c : cases)
    {
        FrozenHamiltonian ham{c.kernel, scalar(0.0)};
        std::vector<double> alpha(2001), l(2001);
        for (int i = 0; i < 2001; ++i)
        {
            alpha[i] = c.lo + (c.hi - c.lo) * i / 2000.0;
            l[i] = legendre(ham, scalar(alpha[i])).value;
        }
        for (int s = 0; s < 20; ++s)
        {
            double xi = u(gen);
            double sup = -kInfinity;
            for (int i = 0; i < 2001; ++i)
                sup = std::max(sup, alpha[i] * xi - l[i]);
            worst = std::max(worst, std::abs(sup - ham(scalar(xi))));
        }
    }
    return {worst <= 1e-6,
            fmt("max |sup_grid(a xi - L) - H(xi)| = %.2e over 40 draws",
                worst)};
}

Outcome minimum_action()
{
    std::mt19937_64 gen{kSeed + 1};
    std::uniform_real_distribution<double> u{0.0, 1.0};
    double worst_rel = 0, worst_knot = 0;
    std::string cases;
    for (int trial = 0; trial < 5; ++trial)
    {
        JumpKernel k = trial % 3 == 0   ? unit_jump()
                       : trial % 3 == 1 ? symmetric()
                                        : planar();
        Vector x(k.dim()), y(k.dim());
        for (int d = 0; d < k.dim(); ++d)
        {
            x[d] = 2 * u(gen) - 1;
            // Unit-jump velocities must exceed -1.
            y[d] = x[d] + (trial % 3 == 0 ? -0.8 + 2.8 * u(gen)
                                          : 4 * u(gen) - 2);
        }
        MinimizeOptions opts;
        opts.restarts = 8;
        opts.seed = kSeed;
        auto r = minimize_action(k, x, y, 50, opts);
        double exact = legendre(k, Vector::Zero(k.dim()), y - x).value;
        worst_rel = std::max(worst_rel,
                             std::abs(r.value.value() - exact) / exact);
        auto line = PolygonalPath::straight_line(x, y, 50);
        for (std::size_t i = 0; i < line.knots.size(); ++i)
            worst_knot = std::max(worst_knot,
                                  (r.path.knots[i] - line.knots[i]).norm());
    }
    return {worst_rel <= 1e-4 && worst_knot <= 1e-3,
            fmt("5 pairs, max rel error %.2e, max knot deviation %.2e",
                worst_rel, worst_knot)};
}

Outcome dp_agreement()
{
    // One atom z = 1 at rate 1 + 0.5 / (1 + exp(-x)).
    JumpKernel k{1, {{scalar(1.0), SigmoidRate{1.0, 0.5, scalar(1.0), 0.0}}},
                 1.5};
    struct Case
    {
        double lo, hi, lattice_lo, lattice_hi;
    };
    // Lattices bracket each optimal path and keep x = 0 on a node.
    Case const cases[] = {{0.5, 0.9, -0.1, 0.9},
                          {1.0, 1.4, -0.2, 1.4},
                          {-0.5, -0.3, -0.6, 0.2}};
    double worst = 0;
    std::string values;
    for (auto const& c : cases)
    {
        auto target = TargetSet::interval(c.lo, c.hi);
        auto r = rate_to_set(k, scalar(0.0), target);
        auto dp = dp_oracle(k, scalar(0.0), target,
                            LatticeSpec{scalar(c.lattice_lo),
                                        scalar(c.lattice_hi), 201, 40, 1.0});
        double rel = std::abs(r.value.value() - dp.value.value())
                     / dp.value.value();
        worst = std::max(worst, rel);
        values += fmt(" (%.4f vs %.4f)", r.value.value(), dp.value.value());
    }
    return {worst <= 0.05, fmt("max rel gap %.4f;%s", worst, values.c_str())};
}

Outcome martingale_identity()
{
    struct Case
    {
        char const* name;
        JumpKernel kernel;
    };
    Case const kernels[] = {{"unit-jump", unit_jump()},
                            {"sigmoid", sigmoid_1d()}};
    double worst_z = 0;
    std::uint64_t tag = 0;
    for (auto const& c : kernels)
    {
        for (double h : {1.0, 0.5, 0.2})
        {
            for (double tilt : {0.3, 0.5})
            {
                SimConfig cfg;
                cfg.h = h;
                cfg.horizon = 1.0;
                cfg.x0 = scalar(0.0);
                cfg.n_paths = 100000;
                cfg.seed = mix_seed(kSeed, tag++);
                auto est = martingale_check(c.kernel, cfg,
                                            TiltConfig{scalar(tilt),
                                                       scalar(0.0)});
                worst_z = std::max(worst_z,
                                   std::abs(est.mean - 1) / est.std_error);
            }
        }
    }
    return {worst_z <= 3.0,
            fmt("12 runs, max |mean - 1| / stderr = %.2f", worst_z)};
}

Outcome chernoff_dominance()
{
    struct Case
    {
        char const* name;
        JumpKernel kernel;
    };
    Case const kernels[] = {{"unit-jump", unit_jump()},
                            {"sigmoid", sigmoid_1d()}};
    double worst_excess = -kInfinity;
    std::uint64_t tag = 100;
    int checked = 0;
    for (auto const& c : kernels)
    {
        RateProfile profile{c.kernel};
        for (double t : {0.1, 0.2})
        {
            for (double h : {0.5, 0.1})
            {
                for (double radius : {1.0, 2.0})
                {
                    SimConfig cfg;
                    cfg.h = h;
                    cfg.horizon = t;
                    cfg.x0 = scalar(0.0);
                    cfg.n_paths = 100000;
                    cfg.seed = mix_seed(kSeed, tag++);
                    auto est = estimate_semigroup(
                        c.kernel, cfg, [radius](Vector const& x) {
                            return x.norm() >= radius ? 1.0 : 0.0;
                        });
                    double bound
                        = chernoff_exit_bound(profile, t, h,
                                              DirectionSet::axes(1, radius))
                              .total;
                    worst_excess = std::max(
                        worst_excess, est.mean - bound - 4 * est.std_error);
                    ++checked;
                }
            }
        }
    }
    return {worst_excess <= 0,
            fmt("%d cases, max (p_hat - bound - 4 stderr) = %.3e", checked,
                worst_excess)};
}

Outcome theorem(LdpReport const& rep)
{
    bool ok = std::abs(rep.variational_bound.value() - kBound) <= 1e-4
              && rep.verdict;
    std::string seq;
    double prev_gap = kInfinity;
    bool converging = true;
    for (auto const& row : rep.rows)
    {
        if (!row.h_log_p || row.estimator != EstimatorKind::tilted)
        {
            ok = false;
            continue;
        }
        double v = *row.h_log_p;
        ok = ok && v <= -kBound + 0.15 + 2 * row.h;
        // Approach to the limit: distance to -bound shrinks as h decreases.
        double gap = std::abs(v + kBound);
        converging = converging && gap < prev_gap;
        prev_gap = gap;
        seq += fmt(" %.4f", v);
    }
    return {ok && converging,
            fmt("bound %.6f; h log p_hat =%s (monotone toward -bound: %s)",
                rep.variational_bound.value(), seq.c_str(),
                converging ? "yes" : "no")};
}

Outcome variance_reduction()
{
    auto k = unit_jump();
    SimConfig cfg;
    cfg.h = 0.05;
    cfg.horizon = 1.0;
    cfg.x0 = scalar(0.0);
    cfg.n_paths = 100000;
    cfg.seed = mix_seed(kSeed, 200);
    auto f = indicator(kEvent);
    auto plain = estimate_semigroup(k, cfg, f);
    auto tilt = legendre(k, scalar(0.0), scalar(1.5)).maximizer;
    auto tilted = sample_tilted(k, cfg, TiltConfig{tilt, scalar(0.0)}, f);
    double plain_err = plain.mean > 0
                           ? plain.std_error
                           : 3.0 / static_cast<double>(plain.n);
    return {tilted.std_error <= 0.1 * plain_err,
            fmt("tilted stderr %.3e vs plain %.3e%s (ratio %.2e)",
                tilted.std_error, plain_err,
                plain.mean > 0 ? "" : " [3/n, p_hat = 0]",
                tilted.std_error / plain_err)};
}

Outcome minorant_contract()
{
    auto k = unit_jump();
    auto m = build_minorant(k, scalar(0.0), 3.0, 0.05);
    FrozenHamiltonian ham{k, scalar(0.0)};
    std::mt19937_64 gen{kSeed + 2};
    std::uniform_real_distribution<double> u{-6.0, 6.0};
    double worst = -kInfinity;
    for (int i = 0; i < 1000; ++i)
    {
        double a = u(gen);
        auto l = legendre_value(ham, scalar(a));
        if (l.is_finite())
            worst = std::max(worst, m(scalar(a)) - l.value());
    }
    bool ok = m.min_verified_gap >= 0 && m.max_verified_gap <= 0.05
              && worst <= 0;
    return {ok, fmt("%zu supports, verified gap in [%.2e, %.4f] on %zu "
                    "points, max (L' - L) = %.2e",
                    m.size(), m.min_verified_gap, m.max_verified_gap,
                    m.verification_points, worst)};
}

Outcome determinism(std::string const& reference)
{
    std::vector<std::string> bodies;
    for (char const* threads : {"1", "3", "8"})
    {
        setenv("WFLAB_THREADS", threads, 1);
        auto rep = ldp_report(unit_jump(), scalar(0.0), kEvent, ldp_options());
        bodies.push_back(ldp_csv(rep).str());
    }
    unsetenv("WFLAB_THREADS");
    bool same = true;
    for (auto const& b : bodies)
        same = same && b == reference;
    return {same, fmt("%zu-byte CSV identical at 1, 3, 8 threads and default: "
                      "%s",
                      reference.size(), same ? "yes" : "no")};
}

}  // namespace

int main()
{
    int failures = 0;
    auto run = [&](int id, char const* name, double limit,
                   std::function<Outcome()> const& body) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try
        {
            out = body();
        }
        catch (std::exception const& e)
        {
            out = {false, std::string{"exception: "} + e.what()};
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        bool in_time = limit <= 0 || secs < limit;
        bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        std::string budget = limit > 0 ? fmt(" < %.0fs", limit) : "";
        std::printf("[%s] %2d %-26s %s (%.2fs%s%s)\n", pass ? "PASS" : "FAIL",
                    id, name, out.detail.c_str(), secs, budget.c_str(),
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    };

    run(1, "conjugate exactness", 1, conjugate_exactness);
    run(2, "biconjugation", 10, biconjugation);
    run(3, "minimum-action optimality", 30, minimum_action);
    run(4, "dp-oracle agreement", 120, dp_agreement);
    run(5, "martingale identity", 120, martingale_identity);
    run(6, "chernoff dominance", 180, chernoff_dominance);

    std::string reference;
    run(7, "theorem verification", 300, [&] {
        auto rep = ldp_report(unit_jump(), scalar(0.0), kEvent, ldp_options());
        reference = ldp_csv(rep).str();
        return theorem(rep);
    });
    run(8, "variance reduction", 120, variance_reduction);
    run(9, "minorant contract", 30, minorant_contract);
    run(10, "determinism", 0, [&] { return determinism(reference); });

    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS",
                failures);
    return failures ? 1 : 0;
}
