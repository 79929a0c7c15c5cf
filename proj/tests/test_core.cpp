#include "test_support.hpp"

#include <opthim/benchmarks.hpp>
#include <opthim/core.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace opthim;
using opthim::testing::half_norm_squared;

TEST(Evaluate, CountsOnePerRequestedPiece)
{
    auto const   obj = half_norm_squared(2);
    EvalCounters c;
    auto const   ev = evaluate(obj, Vector::Ones(2), c, want_value_gradient);
    EXPECT_DOUBLE_EQ(*ev.value, 1.0);
    EXPECT_EQ(*ev.gradient, Vector::Ones(2));
    EXPECT_FALSE(ev.hessian);
    EXPECT_EQ(c, (EvalCounters{1, 1, 0}));

    evaluate(obj, Vector::Ones(2), c, Want{false, false, true});
    EXPECT_EQ(c, (EvalCounters{1, 1, 1}));
}

TEST(Evaluate, RosenbrockMinimum)
{
    auto const   obj = make_rosenbrock_objective(3);
    EvalCounters c;
    EXPECT_EQ(eval_value(obj, Vector::Ones(3), c), 0.0);
    EXPECT_EQ(c.func_evals, 1);
}

TEST(Evaluate, GenhumpsOrigin)
{
    auto const   spec = make_genhumps();
    EvalCounters c;
    auto const   ev = evaluate(spec.objective, Vector::Zero(5), c, want_value_gradient);
    EXPECT_EQ(*ev.value, 0.0);
    EXPECT_EQ(*ev.gradient, Vector::Zero(5));
}

TEST(Evaluate, DimensionMismatchLeavesCountersAlone)
{
    auto const   obj = half_norm_squared(2);
    EvalCounters c;
    EXPECT_THROW(evaluate(obj, Vector::Ones(3), c, want_value_gradient), DimensionError);
    EXPECT_EQ(c, EvalCounters{});
}

TEST(Evaluate, HessianOnHessianlessObjective)
{
    Objective    obj{"no_hessian", 2, [](Vector const& x) { return x.squaredNorm(); },
                     [](Vector const& x) -> Vector { return 2.0 * x; }};
    EvalCounters c;
    EXPECT_FALSE(obj.has_hessian());
    EXPECT_THROW(evaluate(obj, Vector::Ones(2), c, Want{true, true, true}), MissingHessianError);
    EXPECT_EQ(c, EvalCounters{});
}

TEST(Objective, RejectsBadConstruction)
{
    EXPECT_THROW((Objective{"bad", 0, [](Vector const&) { return 0.0; },
                            [](Vector const& x) -> Vector { return x; }}),
                 DimensionError);
    Objective wrong_length{"wrong", 2, [](Vector const&) { return 0.0; },
                           [](Vector const&) -> Vector { return Vector::Zero(3); }};
    EXPECT_THROW(wrong_length.gradient(Vector::Zero(2)), DimensionError);
}

TEST(FdGradient, LinearGradientOfHalfNorm)
{
    Vector const x{{2.0, -3.0}};
    Vector const g = fd_gradient(half_norm_squared(2), x, 1e-6);
    EXPECT_NEAR(g[0], 2.0, 1e-6);
    EXPECT_NEAR(g[1], -3.0, 1e-6);
}

TEST(FdGradient, RosenbrockAgainstHandDerivedGradient)
{
    // d/dx0 = -400 x0 (x1 - x0^2) - 2 (1 - x0) = -211.2 - 4.4
    // d/dx1 =  200 (x1 - x0^2)                 = 200 * (1 - 1.44)
    Vector const expected{{-215.6, -88.0}};
    auto const   obj = make_rosenbrock_objective(2);
    Vector const x{{-1.2, 1.0}};
    EXPECT_LE(relative_error(fd_gradient(obj, x, 1e-6), expected), 1e-5);
    EXPECT_LE(relative_error(obj.gradient(x), expected), 1e-12);
}

TEST(FdGradient, ExponentialAtOrigin)
{
    // d/dx0 [tanh(x0/2) + 0.1 e^-x0] = 0.5 - 0.1 at 0; 4 (0 - 1)^3 = -4 elsewhere.
    auto const   spec = make_exponential(10);
    Vector const g    = fd_gradient(spec.objective, Vector::Zero(10), 1e-6);
    EXPECT_NEAR(g[0], 0.4, 1e-6);
    for (Eigen::Index i = 1; i < 10; ++i) { EXPECT_NEAR(g[i], -4.0, 1e-6); }
}

TEST(FdGradient, RejectsNonPositiveStep)
{
    EXPECT_THROW(fd_gradient(half_norm_squared(2), Vector::Zero(2), 0.0), std::invalid_argument);
    EXPECT_THROW(fd_hessian(half_norm_squared(2), Vector::Zero(2), -1.0), std::invalid_argument);
}

TEST(FdHessian, ConstantHessianOfQuadratic)
{
    Matrix const q   = Vector{{1.0, 2.0}}.asDiagonal();
    auto const   obj = opthim::testing::quadratic(q, Vector::Zero(2));
    for (Vector const& x : {Vector{{0.0, 0.0}}, Vector{{3.0, -7.0}}}) {
        EXPECT_LE((fd_hessian(obj, x, 1e-5) - q).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(FdHessian, QuarticAtOriginIsIdentity)
{
    // The quartic term is fourth order, so the Hessian at 0 is that of x'x/2.
    for (char v : {'A', 'B'}) {
        auto const   spec = make_quartic(v);
        Matrix const h    = fd_hessian(spec.objective, Vector::Zero(4), 1e-5);
        EXPECT_LE(relative_error(h, Matrix::Identity(4, 4)), 1e-4);
        EXPECT_LE(relative_error(spec.objective.hessian(Vector::Zero(4)), Matrix::Identity(4, 4)),
                  1e-15);
    }
}

TEST(FdHessian, GenhumpsAtOrigin)
{
    // Only the 0.05 (a^2 + b^2) parts survive at 0; interior coordinates
    // appear in two terms.
    Matrix const expected = Vector{{0.1, 0.2, 0.2, 0.2, 0.1}}.asDiagonal();
    auto const   spec     = make_genhumps();
    EXPECT_LE(relative_error(fd_hessian(spec.objective, Vector::Zero(5), 1e-5), expected), 1e-4);
    EXPECT_LE(relative_error(spec.objective.hessian(Vector::Zero(5)), expected), 1e-15);
}

TEST(FdHessian, IsSymmetric)
{
    auto const   obj = make_rosenbrock_objective(4);
    Matrix const h   = fd_hessian(obj, Vector{{-1.0, 0.5, 2.0, 0.3}}, 1e-5);
    EXPECT_EQ(h, h.transpose());
}

TEST(RelativeError, UsesUnitFloor)
{
    Vector const a{{1e-3, 0.0}};
    Vector const b{{0.0, 0.0}};
    EXPECT_DOUBLE_EQ(relative_error(a, b), 1e-3);
    EXPECT_DOUBLE_EQ(relative_error(Vector{{11.0}}, Vector{{10.0}}), 0.1);
}
