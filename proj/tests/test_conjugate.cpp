#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <wflab/conjugate.hpp>

#include "models.hpp"

using namespace wflab;
using namespace wflab::test;

namespace {

double unit_l(double a)
{
    return (1 + a) * std::log1p(a) - a;
}

}  // namespace

TEST(Legendre, UnitJumpClosedForm)
{
    auto k = unit_jump();
    struct Case
    {
        double alpha, value, xi;
    };
    Case const cases[] = {
        {-0.5, 0.153426409720027, -0.693147180559945},
        {0.0, 0.0, 0.0},
        {std::exp(1.0) - 1, 1.0, 1.0},
        {3.0, 2.54517744447956, 1.38629436111989},
        {1.5, 0.790726829685388, 0.916290731874155},
        {-0.2, 0.0214851589486322, -0.22314355131421},
    };
    for (auto const& c : cases)
    {
        auto r = legendre(k, scalar(0.0), scalar(c.alpha));
        EXPECT_NEAR(r.value, c.value, 1e-12) << c.alpha;
        EXPECT_NEAR(r.maximizer[0], c.xi, 1e-12) << c.alpha;
        EXPECT_NEAR(r.curvature(0, 0), 1 / (1 + c.alpha), 1e-9) << c.alpha;
    }
}

TEST(Legendre, SymmetricAndPlanarClosedForm)
{
    auto r = legendre(symmetric(), scalar(0.0), scalar(1.0));
    EXPECT_NEAR(r.value, 0.245143847559814, 1e-12);
    EXPECT_NEAR(r.maximizer[0], std::asinh(0.5), 1e-12);

    auto h = legendre(symmetric_half(), scalar(0.0), scalar(1.0));
    EXPECT_NEAR(h.value, 0.881373587019543 - std::sqrt(2.0) + 1, 1e-12);
    EXPECT_NEAR(h.maximizer[0], 0.881373587019543, 1e-12);

    auto p = legendre(planar(), vec({0, 0}), vec({0.5, -0.7}));
    EXPECT_NEAR(p.value, 0.298391452649080, 1e-12);
    EXPECT_NEAR(p.maximizer[0], 0.247466461547263, 1e-12);
    EXPECT_NEAR(p.maximizer[1], -0.652666566082356, 1e-12);
}

TEST(Legendre, OutsideDomainIsNonSteep)
{
    auto k = unit_jump();
    for (double a : {-1.0001, -1.5, -10.0})
    {
        auto outcome = solve_legendre(FrozenHamiltonian{k, scalar(0.0)},
                                      scalar(a));
        auto* info = std::get_if<NonSteepInfo>(&outcome);
        ASSERT_NE(info, nullptr) << a;
        EXPECT_LT(info->direction[0], 0.0);
        EXPECT_TRUE(legendre_value(k, scalar(0.0), scalar(a)).is_infinite());
    }
    // alpha = -1 is on the boundary: L(-1) = 1 as a supremum, not attained.
    EXPECT_NEAR(legendre_value(k, scalar(0.0), scalar(-1.0)).value(), 1.0,
                1e-8);
    try
    {
        (void)legendre(k, scalar(0.0), scalar(-2.0));
        FAIL() << "expected NonSteep";
    }
    catch (NonSteep const& e)
    {
        EXPECT_LT(e.direction()[0], 0.0);
    }
    // Zero rates: only alpha = 0 is feasible.
    auto dead = unit_jump(0.0);
    EXPECT_EQ(legendre_value(dead, scalar(0.0), scalar(0.0)).value(), 0.0);
    EXPECT_TRUE(legendre_value(dead, scalar(0.0), scalar(0.1)).is_infinite());
}

TEST(Legendre, ZeroAtZeroVelocityAndNonnegative)
{
    auto k = sigmoid_1d();
    std::mt19937_64 gen{5};
    std::uniform_real_distribution<double> u{-3.0, 3.0};
    for (int i = 0; i < 100; ++i)
    {
        Vector x = scalar(u(gen));
        EXPECT_NEAR(legendre(k, x, scalar(0.0)).value, 0.0, 1e-14);
        EXPECT_GE(legendre(k, x, scalar(u(gen))).value, 0.0);
    }
}

TEST(Legendre, EnvelopeTheoremAndCurvature)
{
    auto k = planar();
    FrozenHamiltonian ham{k, vec({0, 0})};
    std::mt19937_64 gen{9};
    std::uniform_real_distribution<double> u{-2.0, 2.0};
    double const e = 1e-5;
    for (int i = 0; i < 30; ++i)
    {
        Vector a = vec({u(gen), u(gen)});
        auto r = legendre(ham, a);
        for (int d = 0; d < 2; ++d)
        {
            Vector step = e * Vector::Unit(2, d);
            double lp = legendre(ham, a + step).value;
            double lm = legendre(ham, a - step).value;
            EXPECT_NEAR((lp - lm) / (2 * e), r.maximizer[d], 1e-7);
            EXPECT_NEAR((lp - 2 * r.value + lm) / (e * e), r.curvature(d, d),
                        1e-3 * (1 + r.curvature(d, d)));
        }
    }
}

TEST(Legendre, ConvexAlongSegments)
{
    auto k = unit_jump();
    std::mt19937_64 gen{11};
    std::uniform_real_distribution<double> u{-0.99, 8.0};
    for (int i = 0; i < 200; ++i)
    {
        double a = u(gen);
        double b = u(gen);
        double t = (u(gen) + 0.99) / 8.99;
        EXPECT_LE(unit_l(t * a + (1 - t) * b),
                  t * unit_l(a) + (1 - t) * unit_l(b) + 1e-12);
        EXPECT_NEAR(legendre(k, scalar(0.0), scalar(a)).value, unit_l(a),
                    1e-10 * (1 + unit_l(a)));
    }
}

TEST(RateProfile, DominatingProfile)
{
    RateProfile profile{unit_jump()};
    EXPECT_NEAR(l1_rate(profile, scalar(10.0)).value(), 16.3768480007821,
                1e-10);
    EXPECT_TRUE(profile(scalar(-10.0)).is_infinite());

    // L_1 <= L at every state, since H <= H_1.
    auto k = sigmoid_1d();
    RateProfile p1{k};
    for (double x = -3; x <= 3; x += 0.5)
    {
        for (double a = -2; a <= 2; a += 0.25)
            EXPECT_LE(p1(scalar(a)).value(),
                      legendre(k, scalar(x), scalar(a)).value + 1e-12);
    }
    RateProfile copy{p1};
    EXPECT_EQ(copy(scalar(0.7)), p1(scalar(0.7)));
}
