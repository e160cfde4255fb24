#pragma once

#include <wflab/kernel.hpp>

namespace wflab::test {

inline Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

inline Vector scalar(double v)
{
    return Vector::Constant(1, v);
}

//! Single atom z = 1 at rate 1.
inline JumpKernel unit_jump(double rate = 1.0)
{
    return {1, {{scalar(1.0), RateExpression::constant(rate)}}, rate};
}

//! Atoms z = +1 and z = -1, both at rate 1.
inline JumpKernel symmetric()
{
    return {1,
            {{scalar(1.0), RateExpression::constant(1.0)},
             {scalar(-1.0), RateExpression::constant(1.0)}},
            1.0};
}

//! Atoms z = +1 and z = -1 at rate 1/2: H = cosh(xi) - 1.
inline JumpKernel symmetric_half()
{
    return {1,
            {{scalar(1.0), RateExpression::constant(0.5)},
             {scalar(-1.0), RateExpression::constant(0.5)}},
            0.5};
}

//! Mean-reverting kernel with rates 0.5 + 1 / (1 + exp(+-x)).
inline JumpKernel sigmoid_1d()
{
    return {1,
            {{scalar(1.0), SigmoidRate{0.5, 1.0, scalar(-1.0), 0.0}},
             {scalar(-1.0), SigmoidRate{0.5, 1.0, scalar(1.0), 0.0}}},
            1.5};
}

//! Four axis jumps in the plane with anisotropic rates.
inline JumpKernel planar()
{
    return {2,
            {{vec({1, 0}), RateExpression::constant(1.0)},
             {vec({-1, 0}), RateExpression::constant(1.0)},
             {vec({0, 1}), RateExpression::constant(0.5)},
             {vec({0, -1}), RateExpression::constant(0.5)}},
            1.0};
}

}  // namespace wflab::test
