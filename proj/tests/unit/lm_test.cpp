// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "vbrelax/decay_fit.hpp"
#include "vbrelax/lm.hpp"
#include "vbrelax/odmr.hpp"

using namespace vbrelax;

namespace {

FitModel linear_model()
{
    FitModel m;
    m.name = "line";
    m.param_names = {"slope"};
    m.eval = [](std::span<const double> p, double x) { return p[0] * x; };
    return m;
}

std::vector<DataPoint> exponential_points(double a, double k, double c, int n, double stop, double sigma = 0.01)
{
    std::vector<DataPoint> pts;
    for (int i = 0; i < n; ++i) {
        const double t = stop * i / (n - 1);
        pts.push_back({t, a * std::exp(-k * t * 1e-3) + c, sigma});
    }
    return pts;
}

std::vector<DataPoint> noisy_exponential(std::uint64_t seed)
{
    auto pts = exponential_points(1.0, 99.78, 0.02, 25, 30.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (auto& p : pts) p.y += noise(rng);
    return pts;
}

} // namespace

TEST(LevenbergMarquardt, FixedPointAtTruth)
{
    const auto pts = exponential_points(1.0, 99.78, 0.0, 20, 30.07);
    const auto res = levenberg_marquardt(exponential_decay_model(), pts, std::vector<double>{1.0, 99.78, 0.0});
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.iterations, 2u);
    EXPECT_LT(res.chi2, 1e-18);
}

TEST(LevenbergMarquardt, LinearModelMatchesWeightedRegression)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> x, y, s;
    std::vector<DataPoint> pts;
    for (int i = 0; i < 30; ++i) {
        x.push_back(i * 0.5);
        s.push_back(u(rng));
        y.push_back(2.5 * x.back() + noise(rng) * s.back());
        pts.push_back({x.back(), y.back(), s.back()});
    }
    const auto [slope, err] = oracle::weighted_slope(x, y, s);
    const auto res = levenberg_marquardt(linear_model(), pts, std::vector<double>{0.0});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.params[0], slope, 1e-10 * std::abs(slope));
    EXPECT_NEAR(res.errors[0], err, 1e-8 * err);
}

TEST(LevenbergMarquardt, RecoversNoiseFreeDecayRate)
{
    const auto pts = exponential_points(1.0, 99.78, 0.0, 20, 3.0 / (3 * 33.26e-3));
    const auto res = levenberg_marquardt(exponential_decay_model(), pts, std::vector<double>{0.7, 60.0, 0.1});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.params[1], 99.78, 1e-6 * 99.78);
}

TEST(LevenbergMarquardt, PreconditionsAreChecked)
{
    const auto model = exponential_decay_model();
    const auto pts = exponential_points(1.0, 99.78, 0.0, 3, 30.0);
    EXPECT_THROW(levenberg_marquardt(model, pts, std::vector<double>{1.0, 99.78, 0.0}), FitError);
    auto more = exponential_points(1.0, 99.78, 0.0, 10, 30.0);
    EXPECT_THROW(levenberg_marquardt(model, more, std::vector<double>{-1.0, 99.78, 0.0}), InvalidArgument);
    EXPECT_THROW(levenberg_marquardt(model, more, std::vector<double>{1.0, 99.78}), InvalidArgument);
    more[2].sigma = 0.0;
    EXPECT_THROW(levenberg_marquardt(model, more, std::vector<double>{1.0, 99.78, 0.0}), InvalidArgument);
}

TEST(LevenbergMarquardt, SingularNormalMatrixIsReported)
{
    FitModel m;
    m.name = "degenerate";
    m.param_names = {"a", "b"};
    m.eval = [](std::span<const double> p, double x) { return (p[0] + p[1]) * x; };
    std::vector<DataPoint> pts;
    for (int i = 1; i <= 6; ++i) pts.push_back({double(i), 3.0 * i, 0.1});
    EXPECT_THROW(levenberg_marquardt(m, pts, std::vector<double>{1.0, 1.0}), FitError);
}

TEST(LevenbergMarquardt, IterationCapClearsConvergedFlag)
{
    FitOptions opt;
    opt.max_iterations = 1;
    const auto res =
        levenberg_marquardt(exponential_decay_model(), noisy_exponential(3), std::vector<double>{0.3, 20.0, 0.5}, opt);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.iterations, 1u);
}

TEST(LevenbergMarquardt, BoundsAreRespected)
{
    // Falling data pulls the slope negative; the bound projects it to zero.
    auto m = linear_model();
    m.bounds = {Bounds::nonnegative()};
    std::vector<DataPoint> pts;
    for (int i = 1; i <= 10; ++i) pts.push_back({double(i), -0.5 * i, 0.1});
    const auto res = levenberg_marquardt(m, pts, std::vector<double>{1.0});
    EXPECT_EQ(res.params[0], 0.0);
}

TEST(LevenbergMarquardt, DegenerateBoundedSolutionIsReported)
{
    // A rising curve drives the rate to its zero bound, where amplitude and
    // baseline become indistinguishable.
    std::vector<DataPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({i * 3.0, 1.0 + 0.01 * i, 0.01});
    EXPECT_THROW(levenberg_marquardt(exponential_decay_model(), pts, std::vector<double>{0.5, 10.0, 0.5}), FitError);
}

TEST(NumericJacobian, ExponentialDerivative)
{
    FitModel m;
    m.name = "exp";
    m.param_names = {"p"};
    m.eval = [](std::span<const double> p, double x) { return std::exp(-p[0] * x); };
    const std::vector<double> p{1.0}, x{1.0};
    EXPECT_NEAR(numeric_jacobian(m, p, x)(0, 0), -std::exp(-1.0), 1e-6);
}

TEST(NumericJacobian, ConstantModelGivesZeroColumn)
{
    FitModel m;
    m.name = "const";
    m.param_names = {"a", "b"};
    m.eval = [](std::span<const double> p, double) { return p[0]; };
    const std::vector<double> p{2.0, 7.0}, x{0.0, 1.0, 5.0};
    const auto j = numeric_jacobian(m, p, x);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(j(i, 1), 0.0);
        EXPECT_NEAR(j(i, 0), 1.0, 1e-9);
    }
}

TEST(NumericJacobian, QuadraticMatchesAnalytic)
{
    FitModel m;
    m.name = "quad";
    m.param_names = {"a", "b"};
    m.eval = [](std::span<const double> p, double x) { return p[0] * p[0] * x + p[0] * p[1] - 3.0 * p[1] * p[1]; };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<double> p{u(rng), u(rng)}, x{u(rng)};
        const auto j = numeric_jacobian(m, p, x);
        EXPECT_NEAR(j(0, 0), 2 * p[0] * x[0] + p[1], 1e-7 * std::max(1.0, std::abs(2 * p[0] * x[0] + p[1])));
        EXPECT_NEAR(j(0, 1), p[0] - 6 * p[1], 1e-7 * std::max(1.0, std::abs(p[0] - 6 * p[1])));
    }
}

TEST(NumericJacobian, MatchesAnalyticModelGradients)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto check = [&](const FitModel& m, const std::vector<double>& p, double x) {
        const std::vector<double> xs{x};
        const auto j = numeric_jacobian(m, p, xs);
        std::vector<double> g(m.arity());
        m.gradient(p, x, g);
        // Central differences cannot resolve below the cancellation floor eps |f| / h.
        const double f = std::abs(m.eval(p, x));
        for (std::size_t k = 0; k < m.arity(); ++k) {
            const double h = std::max(1e-8, 1e-6 * std::abs(p[k]));
            const double floor = 4.0 * std::numeric_limits<double>::epsilon() * f / h;
            EXPECT_NEAR(j(0, static_cast<Eigen::Index>(k)), g[k], 1e-6 * std::abs(g[k]) + floor)
                << m.name << " param " << k;
        }
    };
    const auto exp_model = exponential_decay_model();
    const auto lor = two_lorentzian_model();
    for (int trial = 0; trial < 200; ++trial) {
        check(exp_model, {0.1 + u(rng), 1.0 + 300.0 * u(rng), u(rng) - 0.5}, 50.0 * u(rng));
        check(lor, {1.0, 0.01 + 0.05 * u(rng), 3380.0 + 40.0 * u(rng), 5.0 + 10.0 * u(rng), 0.01 + 0.05 * u(rng),
                    3530.0 + 40.0 * u(rng), 5.0 + 10.0 * u(rng)},
              3300.0 + 350.0 * u(rng));
    }
}

TEST(LevenbergMarquardtProperties, ChiSquareNeverIncreases)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto res =
            levenberg_marquardt(exponential_decay_model(), noisy_exponential(seed), std::vector<double>{0.3, 20.0, 0.5});
        ASSERT_GE(res.chi2_history.size(), 2u);
        for (std::size_t i = 1; i < res.chi2_history.size(); ++i)
            EXPECT_LE(res.chi2_history[i], res.chi2_history[i - 1]);
        EXPECT_DOUBLE_EQ(res.chi2_history.back(), res.chi2);
    }
}

TEST(LevenbergMarquardtProperties, InvariantUnderReordering)
{
    std::mt19937_64 rng(23);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto pts = noisy_exponential(seed);
        const std::vector<double> init{0.8, 80.0, 0.0};
        const auto a = levenberg_marquardt(exponential_decay_model(), pts, init);
        std::shuffle(pts.begin(), pts.end(), rng);
        const auto b = levenberg_marquardt(exponential_decay_model(), pts, init);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.params[k], b.params[k], 1e-9 * std::max(1.0, std::abs(a.params[k])));
    }
}

TEST(LevenbergMarquardtProperties, SigmaRescalingScalesErrorsLinearly)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto pts = noisy_exponential(seed);
        const std::vector<double> init{0.8, 80.0, 0.0};
        const auto a = levenberg_marquardt(exponential_decay_model(), pts, init);
        for (auto& p : pts) p.sigma *= 4.0;
        const auto b = levenberg_marquardt(exponential_decay_model(), pts, init);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(a.params[k], b.params[k], 1e-9 * std::max(1.0, std::abs(a.params[k])));
            EXPECT_NEAR(b.errors[k], 4.0 * a.errors[k], 1e-6 * b.errors[k]);
        }
    }
}

TEST(LevenbergMarquardtProperties, CovarianceIsSymmetricPsd)
{
    const auto res =
        levenberg_marquardt(exponential_decay_model(), noisy_exponential(8), std::vector<double>{0.8, 80.0, 0.0});
    EXPECT_EQ(res.dof, 22u);
    EXPECT_TRUE(res.covariance.isApprox(res.covariance.transpose(), 1e-14));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(res.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 0.0);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(res.errors[k], std::sqrt(res.covariance(k, k)));
}

TEST(LevenbergMarquardtProperties, ReducedScalingMultipliesCovariance)
{
    const auto pts = noisy_exponential(9);
    const std::vector<double> init{0.8, 80.0, 0.0};
    FitOptions opt;
    opt.covariance = CovarianceScaling::reduced_chi2;
    const auto a = levenberg_marquardt(exponential_decay_model(), pts, init);
    const auto b = levenberg_marquardt(exponential_decay_model(), pts, init, opt);
    EXPECT_TRUE(b.covariance.isApprox(a.covariance * a.reduced_chi2(), 1e-10));
}
