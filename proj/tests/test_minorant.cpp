#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <wflab/minorant.hpp>

#include "models.hpp"

using namespace wflab;
using namespace wflab::test;

TEST(Minorant, SingleSupportAtZeroIsZero)
{
    auto k = sigmoid_1d();
    FrozenHamiltonian ham{k, scalar(0.4)};
    auto m = PiecewiseMinorant::from_support_points(ham, {scalar(0.0)});
    for (double a = -3; a <= 3; a += 0.5)
        EXPECT_NEAR(m(scalar(a)), 0.0, 1e-14);
}

TEST(Minorant, InfeasibleSupportIsNonSteep)
{
    auto k = unit_jump();
    FrozenHamiltonian ham{k, scalar(0.0)};
    EXPECT_THROW(PiecewiseMinorant::from_support_points(ham, {scalar(-2.0)}),
                 NonSteep);
}

TEST(Minorant, UnitJumpGapOnIndependentGrid)
{
    auto k = unit_jump();
    auto m = build_minorant(k, scalar(0.0), 3.0, 0.05);
    EXPECT_GE(m.min_verified_gap, 0.0);
    EXPECT_LE(m.max_verified_gap, 0.05);
    FrozenHamiltonian ham{k, scalar(0.0)};
    for (int i = 0; i <= 3900; ++i)
    {
        double a = -0.9 + 0.001 * i;
        double gap = legendre(ham, scalar(a)).value - m(scalar(a));
        EXPECT_GE(gap, -1e-10) << a;
        EXPECT_LE(gap, 0.05) << a;
    }
}

TEST(Minorant, FenchelEqualityAtSupports)
{
    for (auto const& k : {unit_jump(), symmetric(), sigmoid_1d()})
    {
        FrozenHamiltonian ham{k, scalar(0.3)};
        auto m = build_minorant(k, scalar(0.3), 2.0, 0.02);
        ASSERT_GT(m.size(), 0u);
        for (std::size_t i = 0; i < m.size(); ++i)
        {
            double l = legendre(ham, m.support_points[i]).value;
            double tangent = m.slopes[i].dot(m.support_points[i])
                             + m.intercepts[i];
            EXPECT_NEAR(l, tangent, 1e-8);
            EXPECT_NEAR(m(m.support_points[i]), l, 1e-8);
        }
    }
}

TEST(Minorant, GlobalMinorantBeyondTheBall)
{
    auto k = planar();
    auto m = build_minorant(k, vec({0, 0}), 1.0, 0.05);
    EXPECT_LE(m.max_verified_gap, 0.05);
    FrozenHamiltonian ham{k, vec({0, 0})};
    std::mt19937_64 gen{17};
    std::uniform_real_distribution<double> u{-4.0, 4.0};
    for (int i = 0; i < 300; ++i)
    {
        Vector a = vec({u(gen), u(gen)});
        EXPECT_LE(m(a), legendre(ham, a).value + 1e-10);
    }
}

TEST(Minorant, BudgetAndValidation)
{
    auto k = unit_jump();
    MinorantOptions opts;
    opts.max_support_points = 3;
    EXPECT_THROW(build_minorant(k, scalar(0.0), 3.0, 1e-4, opts),
                 BudgetExceeded);
    EXPECT_THROW(build_minorant(k, scalar(0.0), -1.0, 0.1), ValidationError);
    EXPECT_THROW(build_minorant(k, scalar(0.0), 1.0, 0.0), ValidationError);
}
