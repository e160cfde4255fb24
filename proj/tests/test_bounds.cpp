#include <cmath>

#include <gtest/gtest.h>

#include <wflab/bounds.hpp>
#include <wflab/report_io.hpp>

#include "models.hpp"

using namespace wflab;
using namespace wflab::test;

TEST(DirectionSet, AxesAndValidation)
{
    auto d = DirectionSet::axes(2, 3.0);
    ASSERT_EQ(d.directions.size(), 4u);
    for (auto const& r : d.directions)
        EXPECT_DOUBLE_EQ(r.norm(), 3.0);
    auto s = DirectionSet::from_vectors({vec({1, 1}), vec({-2, 0})}, 2.0);
    EXPECT_NEAR(s.directions[0].norm(), 2.0, 1e-15);
    EXPECT_THROW(DirectionSet::from_vectors({vec({0, 0})}, 1.0),
                 ValidationError);
    DirectionSet off{{vec({1, 0})}, 2.0};
    EXPECT_THROW(off.validate(), ValidationError);
}

TEST(Chernoff, UnitJumpClosedForm)
{
    RateProfile profile{unit_jump()};
    auto dirs = DirectionSet::axes(1, 1.0);
    auto b = chernoff_exit_bound(profile, 0.1, 1.0, dirs);
    EXPECT_NEAR(b.total, 0.194429665152203, 1e-12);
    EXPECT_TRUE(b.rates[1].is_infinite());
    EXPECT_EQ(b.terms[1], 0.0);
    auto fine = chernoff_exit_bound(profile, 0.1, 0.1, dirs);
    EXPECT_NEAR(fine.total / 7.72014188821532e-8, 1.0, 1e-9);
    EXPECT_THROW(chernoff_exit_bound(profile, 0.0, 0.1, dirs), ValidationError);
}

TEST(Chernoff, AllInfiniteGivesZero)
{
    RateProfile dead{unit_jump(0.0)};
    EXPECT_EQ(chernoff_exit_bound(dead, 0.5, 0.1, DirectionSet::axes(1, 1.0))
                  .total,
              0.0);
}

TEST(Chernoff, NonincreasingAsHDecreases)
{
    RateProfile profile{sigmoid_1d()};
    auto dirs = DirectionSet::axes(1, 1.5);
    double prev = kInfinity;
    for (double h : {1.0, 0.5, 0.2, 0.1, 0.05, 0.01})
    {
        double b = chernoff_exit_bound(profile, 0.3, h, dirs).total;
        EXPECT_LE(b, prev);
        prev = b;
    }
}

TEST(Chernoff, DominatesMonteCarloExit)
{
    auto k = symmetric();
    RateProfile profile{k};
    for (double h : {0.5, 0.2})
    {
        SimConfig cfg;
        cfg.h = h;
        cfg.horizon = 0.2;
        cfg.x0 = scalar(0.0);
        cfg.n_paths = 20000;
        cfg.seed = 31;
        auto est = estimate_semigroup(k, cfg, [](Vector const& x) {
            return std::abs(x[0]) >= 1.0 ? 1.0 : 0.0;
        });
        auto b = chernoff_exit_bound(profile, 0.2, h,
                                     DirectionSet::axes(1, 1.0));
        EXPECT_LE(est.mean, b.total + 4 * est.std_error) << h;
    }
}

TEST(Skeleton, TrivialCases)
{
    SimConfig cfg;
    cfg.h = 0.1;
    cfg.x0 = scalar(0.0);
    cfg.n_paths = 500;
    auto dead = skeleton_event_estimate(unit_jump(0.0), cfg,
                                        SkeletonConfig{0.1, 0.01, 0.01});
    EXPECT_EQ(dead.mean, 0.0);
    auto loose = skeleton_event_estimate(sigmoid_1d(), cfg,
                                         SkeletonConfig{0.25, kInfinity,
                                                        kInfinity});
    EXPECT_EQ(loose.mean, 0.0);
    EXPECT_THROW(skeleton_event_estimate(sigmoid_1d(), cfg,
                                         SkeletonConfig{0.3, 1.0, 1.0}),
                 ValidationError);
}

TEST(Skeleton, UnionBoundOverSteps)
{
    auto k = unit_jump();
    SimConfig cfg;
    cfg.h = 0.05;
    cfg.x0 = scalar(0.0);
    cfg.n_paths = 100000;
    cfg.seed = 13;
    auto est = skeleton_event_estimate(k, cfg, SkeletonConfig{0.1, 1.0,
                                                              kInfinity});
    RateProfile profile{k};
    double step = chernoff_exit_bound(profile, 0.1, 0.05,
                                      DirectionSet::axes(1, 1.0))
                      .total;
    EXPECT_LE(est.mean, 10 * step + 4 * est.std_error);

    // A tight increment bound is violated on most paths.
    auto tight = skeleton_event_estimate(
        k, cfg, SkeletonConfig{0.1, 0.01, kInfinity});
    EXPECT_GT(tight.mean, 0.5);
}

TEST(LdpReport, InsideTargetIsTrivial)
{
    LdpOptions opts;
    opts.h_list = {0.2, 0.1};
    opts.n_paths = 2000;
    auto r = ldp_report(sigmoid_1d(), scalar(0.0),
                        TargetSet::interval(-0.5, 0.5), opts);
    EXPECT_EQ(r.variational_bound.value(), 0.0);
    EXPECT_TRUE(r.verdict);
    for (auto const& row : r.rows)
    {
        ASSERT_TRUE(row.h_log_p);
        EXPECT_LE(*row.h_log_p, 0.0);
        EXPECT_EQ(row.estimator, EstimatorKind::plain);
    }
}

TEST(LdpReport, ZeroRatesAreUnreachable)
{
    LdpOptions opts;
    opts.h_list = {0.2, 0.1};
    opts.n_paths = 1000;
    auto r = ldp_report(unit_jump(0.0), scalar(0.0),
                        TargetSet::interval(1.0, 2.0), opts);
    EXPECT_TRUE(r.variational_bound.is_infinite());
    EXPECT_TRUE(r.verdict);
    for (auto const& row : r.rows)
    {
        EXPECT_TRUE(row.unreachable);
        EXPECT_EQ(row.p_hat, 0.0);
        EXPECT_FALSE(row.h_log_p);
        EXPECT_DOUBLE_EQ(row.p_upper, 3.0 / 1000);
    }
    auto csv = ldp_csv(r).str();
    EXPECT_NE(csv.find("plain-upper95"), std::string::npos);
}

TEST(LdpReport, RowsAreConsistent)
{
    LdpOptions opts;
    opts.h_list = {0.2, 0.1};
    opts.n_paths = 20000;
    opts.seed = 3;
    auto k = unit_jump();
    auto target = TargetSet::interval(1.5, 2.5);
    auto r = ldp_report(k, scalar(0.0), target, opts);
    EXPECT_NEAR(r.variational_bound.value(), 0.790726829685388, 1e-4);
    auto again = rate_to_set(k, scalar(0.0), target, opts.rate);
    EXPECT_NEAR(again.value.value(), r.variational_bound.value(), 1e-6);
    EXPECT_NEAR(r.tilt[0], std::log(2.5), 1e-6);
    for (auto const& row : r.rows)
    {
        ASSERT_TRUE(row.h_log_p);
        EXPECT_EQ(*row.h_log_p, row.h * std::log(row.p_hat));
        EXPECT_EQ(row.tolerance, 0.15 + 2 * row.h);
        EXPECT_EQ(row.estimator, EstimatorKind::tilted);
    }
    EXPECT_TRUE(r.verdict);
    LdpOptions increasing;
    increasing.h_list = {0.1, 0.2};
    EXPECT_THROW(ldp_report(k, scalar(0.0), target, increasing),
                 ValidationError);
}

TEST(LdpCsv, HeaderIsFixed)
{
    LdpReport empty{"m", scalar(0.0), TargetSet::interval(0, 1), 1.0,
                    ExtendedReal{0.5}, std::nullopt, scalar(0.0), {}, true};
    EXPECT_EQ(ldp_csv(empty).str(),
              "h,p_hat,stderr,h_log_p,bound,margin,estimator\n");
    EXPECT_TRUE(ldp_json(empty)["rows"].empty());
}
