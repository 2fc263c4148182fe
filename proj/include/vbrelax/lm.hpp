// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Weighted nonlinear least squares (Levenberg-Marquardt) with box bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "vbrelax/error.hpp"

namespace vbrelax {

struct Bounds {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double v) const noexcept { return v >= lower && v <= upper; }
    double clamp(double v) const noexcept { return std::clamp(v, lower, upper); }

    static Bounds nonnegative() { return {0.0, std::numeric_limits<double>::infinity()}; }
};

/// One weighted observation.
struct DataPoint {
    double x;
    double y;
    double sigma;
};

using ModelFunction = std::function<double(std::span<const double> params, double x)>;
using GradientFunction = std::function<void(std::span<const double> params, double x, std::span<double> out)>;

/// A parametric curve y = f(params, x).
struct FitModel {
    std::string name;
    std::vector<std::string> param_names;
    ModelFunction eval;
    /// One entry per parameter; empty means unbounded.
    std::vector<Bounds> bounds;
    /// Hand-derived partial derivatives, when the model family provides them.
    GradientFunction gradient;

    std::size_t arity() const noexcept { return param_names.size(); }

    Bounds bound(std::size_t i) const { return bounds.empty() ? Bounds{} : bounds.at(i); }
};

enum class CovarianceScaling {
    /// (J^T W J)^-1; sigmas are taken as true standard errors.
    absolute,
    /// (J^T W J)^-1 * chi2/dof; sigmas are relative weights only.
    reduced_chi2,
};

struct FitOptions {
    std::size_t max_iterations = 500;
    double chi2_rel_tolerance = 1e-10;
    /// Relative to the parameter norm.
    double step_tolerance = 1e-12;
    double initial_lambda = 1e-3;
    double lambda_factor = 10.0;
    CovarianceScaling covariance = CovarianceScaling::absolute;
};

struct FitResult {
    std::vector<std::string> param_names;
    std::vector<double> params;
    /// Standard errors, sqrt of the covariance diagonal.
    std::vector<double> errors;
    Eigen::MatrixXd covariance;
    double chi2 = 0.0;
    std::size_t dof = 0;
    bool converged = false;
    std::size_t iterations = 0;
    /// chi2 after the initial guess and after each accepted step.
    std::vector<double> chi2_history;

    double reduced_chi2() const { return chi2 / static_cast<double>(dof); }
};

/// Central-difference Jacobian of the model, one row per abscissa,
/// step h_i = max(1e-8, 1e-6 |p_i|).
inline Eigen::MatrixXd numeric_jacobian(const FitModel& model, std::span<const double> params,
                                        std::span<const double> xs)
{
    const std::size_t m = params.size();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(m));
    std::vector<double> hi(params.begin(), params.end());
    std::vector<double> lo(params.begin(), params.end());
    for (std::size_t j = 0; j < m; ++j) {
        const double h = std::max(1e-8, 1e-6 * std::abs(params[j]));
        hi[j] = params[j] + h;
        lo[j] = params[j] - h;
        // The realized difference, not 2h, divides out representation error.
        const double span = hi[j] - lo[j];
        for (std::size_t i = 0; i < xs.size(); ++i)
            jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (model.eval(hi, xs[i]) - model.eval(lo, xs[i])) / span;
        hi[j] = params[j];
        lo[j] = params[j];
    }
    return jac;
}

namespace detail {

inline double chi_square(const FitModel& model, std::span<const double> p, std::span<const DataPoint> data,
                         Eigen::VectorXd* residuals = nullptr)
{
    double chi2 = 0.0;
    if (residuals) residuals->resize(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = (data[i].y - model.eval(p, data[i].x)) / data[i].sigma;
        if (residuals) (*residuals)(static_cast<Eigen::Index>(i)) = r;
        chi2 += r * r;
    }
    return chi2;
}

inline double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Inverse of a symmetric positive semidefinite matrix, after Jacobi
/// scaling. Throws when the matrix is numerically singular.
inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::vector<std::string>& names)
{
    const Eigen::Index m = a.rows();
    Eigen::VectorXd scale(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(a(i, i) > 0.0))
            throw FitError(fmt::format("singular normal matrix: data carry no information on parameter '{}'",
                                       names.at(static_cast<std::size_t>(i))));
        scale(i) = 1.0 / std::sqrt(a(i, i));
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * a * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 1e-14 * lmax))
        throw FitError(fmt::format("singular normal matrix (reciprocal condition {:.3g})", lmin / lmax));
    const Eigen::MatrixXd inv =
        eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return scale.asDiagonal() * inv * scale.asDiagonal();
}

} // namespace detail

/// Minimizes sum(((y - f(p, x)) / sigma)^2) from `init`.
///
/// Damping is Marquardt's (lambda times the normal-matrix diagonal), divided
/// by `lambda_factor` on an accepted step and multiplied on a rejected one.
/// Trial points are projected onto the bounds. Iteration stops when an
/// accepted step lowers chi2 by less than `chi2_rel_tolerance` (relative),
/// when a step is shorter than `step_tolerance` times |p|, or after
/// `max_iterations` Jacobian evaluations (converged = false).
inline FitResult levenberg_marquardt(const FitModel& model, std::span<const DataPoint> data,
                                     std::span<const double> init, const FitOptions& opt = {})
{
    const std::size_t m = model.arity();
    if (init.size() != m)
        throw InvalidArgument(fmt::format("{}: expected {} initial parameters, got {}", model.name, m, init.size()));
    if (data.size() < m + 1)
        throw FitError(fmt::format("{}: {} points cannot constrain {} parameters", model.name, data.size(), m));
    for (const auto& d : data) {
        if (!(d.sigma > 0.0) || !std::isfinite(d.sigma) || !std::isfinite(d.x) || !std::isfinite(d.y))
            throw InvalidArgument(fmt::format("{}: data need finite values and sigma > 0", model.name));
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!model.bound(j).contains(init[j]) || !std::isfinite(init[j]))
            throw InvalidArgument(fmt::format("{}: initial {} = {} outside its bounds", model.name,
                                              model.param_names[j], init[j]));
    }

    std::vector<double> xs(data.size());
    Eigen::VectorXd inv_sigma(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        xs[i] = data[i].x;
        inv_sigma(static_cast<Eigen::Index>(i)) = 1.0 / data[i].sigma;
    }

    FitResult res;
    res.param_names = model.param_names;
    res.dof = data.size() - m;
    std::vector<double> p(init.begin(), init.end());
    Eigen::VectorXd resid;
    double chi2 = detail::chi_square(model, p, data, &resid);
    if (!std::isfinite(chi2)) throw FitError(fmt::format("{}: model is not finite at the initial guess", model.name));
    res.chi2_history.push_back(chi2);

    double lambda = opt.initial_lambda;
    std::vector<double> trial(m);
    bool done = chi2 == 0.0;
    while (!done && res.iterations < opt.max_iterations) {
        ++res.iterations;
        const Eigen::MatrixXd jw = inv_sigma.asDiagonal() * numeric_jacobian(model, p, xs);
        const Eigen::MatrixXd a = jw.transpose() * jw;
        const Eigen::VectorXd g = jw.transpose() * resid;
        Eigen::VectorXd diag = a.diagonal();
        for (Eigen::Index j = 0; j < diag.size(); ++j)
            if (!(diag(j) > 0.0)) diag(j) = 1.0;

        while (true) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd delta = damped.ldlt().solve(g);
            for (std::size_t j = 0; j < m; ++j)
                trial[j] = model.bound(j).clamp(p[j] + delta(static_cast<Eigen::Index>(j)));

            double step2 = 0.0;
            for (std::size_t j = 0; j < m; ++j) step2 += (trial[j] - p[j]) * (trial[j] - p[j]);
            const bool tiny_step = std::sqrt(step2) <= opt.step_tolerance * (detail::norm(p) + opt.step_tolerance);

            Eigen::VectorXd trial_resid;
            const double trial_chi2 = detail::chi_square(model, trial, data, &trial_resid);
            if (std::isfinite(trial_chi2) && trial_chi2 < chi2) {
                const double rel = (chi2 - trial_chi2) / chi2;
                p = trial;
                chi2 = trial_chi2;
                resid = std::move(trial_resid);
                res.chi2_history.push_back(chi2);
                lambda = std::max(lambda / opt.lambda_factor, 1e-12);
                done = rel < opt.chi2_rel_tolerance || tiny_step || chi2 == 0.0;
                break;
            }
            lambda *= opt.lambda_factor;
            if (tiny_step || lambda > 1e20) {
                // No representable downhill step remains: p is the minimum.
                done = true;
                break;
            }
        }
    }
    res.converged = done;
    res.params = p;
    res.chi2 = chi2;

    const Eigen::MatrixXd jw = inv_sigma.asDiagonal() * numeric_jacobian(model, p, xs);
    res.covariance = detail::spd_inverse(jw.transpose() * jw, model.param_names);
    if (opt.covariance == CovarianceScaling::reduced_chi2) res.covariance *= chi2 / static_cast<double>(res.dof);
    res.errors.resize(m);
    for (std::size_t j = 0; j < m; ++j)
        res.errors[j] = std::sqrt(res.covariance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    return res;
}

} // namespace vbrelax
