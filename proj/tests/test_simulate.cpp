#include <cmath>

#include <gtest/gtest.h>

#include <wflab/simulate.hpp>

#include "models.hpp"

using namespace wflab;
using namespace wflab::test;

namespace {

SimConfig config(double h, double t, Vector x0, std::size_t n,
                 std::uint64_t seed = 1)
{
    SimConfig c;
    c.h = h;
    c.horizon = t;
    c.x0 = std::move(x0);
    c.n_paths = n;
    c.seed = seed;
    return c;
}

Observable one = [](Vector const&) { return 1.0; };

}  // namespace

TEST(Simulate, MassConservation)
{
    for (auto const& k : {unit_jump(), sigmoid_1d(), planar()})
    {
        auto est = estimate_semigroup(
            k, config(0.2, 1.0, Vector::Zero(k.dim()), 2000), one);
        EXPECT_EQ(est.mean, 1.0);
        EXPECT_EQ(est.std_error, 0.0);
        EXPECT_EQ(est.n, 2000u);
    }
}

TEST(Simulate, ZeroRatesStayPut)
{
    auto k = unit_jump(0.0);
    RandomStream rng{1, 0};
    auto tr = sample_path(k, config(0.1, 1.0, scalar(0.5), 1), rng);
    ASSERT_EQ(tr.states.size(), 2u);
    EXPECT_EQ(tr.states.back()[0], 0.5);
    auto est = estimate_semigroup(k, config(0.1, 1.0, scalar(0.5), 100),
                                  indicator(TargetSet{Ball{scalar(0.5), 0.1}}));
    EXPECT_EQ(est.mean, 1.0);
}

TEST(Simulate, PoissonLawChiSquare)
{
    // h = 1, t = 1: X_1 = N - 1 with N ~ Poisson(1).
    auto k = unit_jump();
    auto cfg = config(1.0, 1.0, scalar(0.0), 20000, 77);
    std::vector<double> counts(7, 0.0);
    for (std::size_t i = 0; i < cfg.n_paths; ++i)
    {
        RandomStream rng{cfg.seed, i};
        auto tr = sample_path(k, cfg, rng);
        double n = tr.states.back()[0] + 1.0;
        ASSERT_NEAR(n, std::round(n), 1e-12);
        counts[std::min<std::size_t>(6, static_cast<std::size_t>(std::round(n)))]
            += 1;
    }
    double chi2 = 0.0;
    double tail = 1.0;
    for (int j = 0; j < 7; ++j)
    {
        double p = j < 6 ? std::exp(-1.0) / std::tgamma(j + 1.0) : tail;
        tail -= p;
        double expected = p * static_cast<double>(cfg.n_paths);
        chi2 += (counts[j] - expected) * (counts[j] - expected) / expected;
    }
    // 99.9% quantile of chi-square with 6 degrees of freedom.
    EXPECT_LT(chi2, 22.458);
}

TEST(Simulate, PoissonAtLeastOneJump)
{
    auto k = unit_jump();
    auto est = estimate_semigroup(
        k, config(1.0, 1.0, scalar(0.0), 50000, 3),
        [](Vector const& x) { return x[0] >= 0.0 ? 1.0 : 0.0; });
    EXPECT_NEAR(est.mean, 0.632120558828558, 4 * est.std_error);
}

TEST(Simulate, SymmetricStateDependentMeanIsZero)
{
    auto est = estimate_semigroup(sigmoid_1d(),
                                  config(0.2, 1.0, scalar(0.0), 40000, 5),
                                  [](Vector const& x) { return x[0]; });
    EXPECT_NEAR(est.mean, 0.0, 4 * est.std_error);
}

TEST(Simulate, TrajectoryRecords)
{
    auto k = sigmoid_1d();
    RandomStream rng{9, 0};
    auto tr = sample_path(k, config(0.1, 2.0, scalar(0.0), 1), rng);
    ASSERT_GE(tr.times.size(), 2u);
    EXPECT_EQ(tr.atoms.front(), -1);
    EXPECT_EQ(tr.atoms.back(), -1);
    EXPECT_EQ(tr.times.back(), 2.0);
    for (std::size_t i = 1; i < tr.times.size(); ++i)
        EXPECT_GE(tr.times[i], tr.times[i - 1]);
    for (std::size_t i = 1; i + 1 < tr.atoms.size(); ++i)
        EXPECT_TRUE(tr.atoms[i] == 0 || tr.atoms[i] == 1);
}

TEST(Simulate, DeterministicAcrossWorkerCounts)
{
    auto k = sigmoid_1d();
    auto f = [](Vector const& x) { return x[0] * x[0]; };
    auto cfg = config(0.1, 1.0, scalar(0.3), 5000, 11);
    cfg.workers = 1;
    auto a = estimate_semigroup(k, cfg, f);
    cfg.workers = 3;
    auto b = estimate_semigroup(k, cfg, f);
    cfg.workers = 8;
    auto c = estimate_semigroup(k, cfg, f);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.mean, c.mean);
    cfg.seed = 12;
    EXPECT_NE(estimate_semigroup(k, cfg, f).mean, a.mean);
}

TEST(Simulate, EventCapAbortsAndExcludes)
{
    auto k = unit_jump();
    auto cfg = config(0.01, 1.0, scalar(0.0), 200);
    cfg.max_events = 5;
    EXPECT_FALSE(validate_sim_config(k, cfg).empty());
    auto est = estimate_semigroup(k, cfg, one);
    EXPECT_EQ(est.n + est.n_aborted, 200u);
    EXPECT_GT(est.n_aborted, 190u);
}

TEST(Simulate, RateAboveBoundIsReported)
{
    JumpKernel k{1, {{scalar(1.0), AffineRate{1.0, scalar(1.0)}}}, 2.0};
    EXPECT_THROW(estimate_semigroup(k, config(0.1, 1.0, scalar(5.0), 10), one),
                 RateBoundExceeded);
}

TEST(Simulate, ConfigValidation)
{
    auto k = unit_jump();
    EXPECT_THROW(estimate_semigroup(k, config(0.0, 1.0, scalar(0.0), 10), one),
                 ValidationError);
    EXPECT_THROW(estimate_semigroup(k, config(0.1, 1.0, vec({0, 0}), 10), one),
                 ValidationError);
    EXPECT_THROW(estimate_semigroup(k, config(0.1, -1.0, scalar(0.0), 10), one),
                 ValidationError);
}

TEST(Martingale, ZeroTiltIsExactlyOne)
{
    auto est = martingale_check(sigmoid_1d(),
                                config(0.2, 1.0, scalar(0.0), 1000),
                                TiltConfig{scalar(0.0), scalar(0.0)});
    EXPECT_EQ(est.mean, 1.0);
    EXPECT_EQ(est.std_error, 0.0);
}

TEST(Martingale, FlatInTime)
{
    auto k = sigmoid_1d();
    for (double t : {0.25, 1.0, 2.0})
    {
        auto est = martingale_check(k, config(0.5, t, scalar(0.0), 20000, 21),
                                    TiltConfig{scalar(0.3), scalar(0.0)});
        EXPECT_NEAR(est.mean, 1.0, 3 * est.std_error) << t;
    }
}

TEST(Tilted, ZeroTiltMatchesPlain)
{
    auto k = sigmoid_1d();
    auto f = indicator(TargetSet::interval(0.2, 5.0));
    auto cfg = config(0.2, 1.0, scalar(0.0), 3000, 4);
    auto plain = estimate_semigroup(k, cfg, f);
    auto tilted = sample_tilted(k, cfg, TiltConfig{scalar(0.0), scalar(0.0)},
                                f);
    EXPECT_EQ(plain.mean, tilted.mean);
    EXPECT_EQ(plain.std_error, tilted.std_error);
}

TEST(Tilted, UnbiasedWithSmallerError)
{
    auto k = unit_jump();
    auto f = [](Vector const& x) { return x[0] >= 1.5 ? 1.0 : 0.0; };
    auto cfg = config(0.1, 1.0, scalar(0.0), 100000, 8);
    auto plain = estimate_semigroup(k, cfg, f);
    auto tilted = sample_tilted(
        k, cfg, TiltConfig{scalar(std::log(2.5)), scalar(0.0)}, f);
    double combined = std::hypot(plain.std_error, tilted.std_error);
    EXPECT_NEAR(plain.mean, tilted.mean, 4 * combined);
    EXPECT_LE(tilted.std_error, 0.1 * plain.std_error);
}

TEST(Tilted, TiltedRateCap)
{
    auto k = unit_jump();
    TiltConfig tilt{scalar(20.0), scalar(0.0), 100.0};
    EXPECT_THROW(sample_tilted(k, config(0.1, 1.0, scalar(0.0), 10), tilt, one),
                 RateBoundExceeded);
}
