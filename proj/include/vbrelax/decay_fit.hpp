// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/kinetics.hpp"
#include "vbrelax/lm.hpp"
#include "vbrelax/pulse.hpp"
#include "vbrelax/units.hpp"

namespace vbrelax {

/// y = A exp(-k tau) + c with params (A, k [kHz], c) and tau in us.
inline FitModel exponential_decay_model()
{
    FitModel m;
    m.name = "exponential decay";
    m.param_names = {"amplitude", "rate_kHz", "baseline"};
    m.bounds = {Bounds::nonnegative(), Bounds::nonnegative(), Bounds{}};
    m.eval = [](std::span<const double> p, double tau) {
        return p[0] * std::exp(-units::decay_exponent(p[1], tau)) + p[2];
    };
    m.gradient = [](std::span<const double> p, double tau, std::span<double> out) {
        const double e = std::exp(-units::decay_exponent(p[1], tau));
        out[0] = e;
        out[1] = -p[0] * tau * units::khz_us * e;
        out[2] = 1.0;
    };
    return m;
}

inline std::vector<DataPoint> to_data_points(const DecayDataset& d)
{
    std::vector<DataPoint> out;
    out.reserve(d.points.size());
    for (const auto& p : d.points) out.push_back({p.tau_us, p.signal, p.sigma});
    return out;
}

struct ExponentialGuess {
    double amplitude;
    double rate_khz;
    double baseline;
};

/// Starting point for the exponential fit: baseline from the last 10% of
/// points, amplitude from the first point, rate from a log-linear
/// regression over the first half.
inline ExponentialGuess guess_exponential(const DecayDataset& data)
{
    auto pts = data.points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.tau_us < b.tau_us; });
    const std::size_t n = pts.size();
    const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n))));
    double c0 = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) c0 += pts[i].signal;
    c0 /= static_cast<double>(tail);

    const double a0 = pts.front().signal - c0;
    if (!(a0 > 0.0))
        throw FitError(fmt::format("{} data do not decay: first point {} is not above the baseline {}",
                                   to_string(data.kind), pts.front().signal, c0));

    // Ordinary least squares of ln(y - c0) against tau.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < std::max<std::size_t>(2, n / 2); ++i) {
        const double dy = pts[i].signal - c0;
        if (!(dy > 0.0)) continue;
        const double ly = std::log(dy);
        sx += pts[i].tau_us;
        sy += ly;
        sxx += pts[i].tau_us * pts[i].tau_us;
        sxy += pts[i].tau_us * ly;
        ++used;
    }
    double k0 = 0.0;
    if (used >= 2) {
        const double un = static_cast<double>(used);
        const double den = un * sxx - sx * sx;
        if (den > 0.0) k0 = -(un * sxy - sx * sy) / den / units::khz_us;
    }
    if (!(k0 > 0.0) || !std::isfinite(k0)) {
        // Assume the grid spans about three decay lengths.
        const double span = pts.back().tau_us - pts.front().tau_us;
        k0 = 3.0 * units::inverse_rate_us(1.0) / span;
    }
    return {a0, k0, c0};
}

/// Fits A exp(-k tau) + c. The returned rate is 3*omega for an F1 curve
/// and omega + 2*gamma for an F2 curve.
inline FitResult fit_single_exponential(const DecayDataset& data, const FitOptions& opt = {})
{
    data.validate();
    if (data.points.size() < 4)
        throw FitError(fmt::format("exponential fit needs at least 4 points, got {}", data.points.size()));
    const ExponentialGuess g = guess_exponential(data);
    const auto pts = to_data_points(data);
    const std::vector<double> init{g.amplitude, g.rate_khz, g.baseline};
    return levenberg_marquardt(exponential_decay_model(), pts, init, opt);
}

/// Relaxation rates recovered from the two decay curves.
struct RateEstimate {
    double omega;
    double sigma_omega;
    /// Unclamped; may be negative when the curves are inconsistent.
    double gamma;
    double sigma_gamma;
    /// False when the F2 rate lies below omega by more than 3 sigma.
    bool consistent = true;

    RatePair rates() const { return {std::max(omega, 0.0), std::max(gamma, 0.0)}; }
};

/// omega = k1/3 and gamma = (k2 - omega)/2, with errors propagated as if the
/// two fits were independent.
inline RateEstimate extract_rates(const FitResult& f1_fit, const FitResult& f2_fit)
{
    if (!f1_fit.converged || !f2_fit.converged) throw FitError("rate extraction needs two converged decay fits");
    if (f1_fit.params.size() != 3 || f2_fit.params.size() != 3)
        throw InvalidArgument("rate extraction expects exponential-decay fit results");
    const double k1 = f1_fit.params[1], s1 = f1_fit.errors[1];
    const double k2 = f2_fit.params[1], s2 = f2_fit.errors[1];

    RateEstimate r{};
    r.omega = k1 / 3.0;
    r.sigma_omega = s1 / 3.0;
    r.gamma = (k2 - r.omega) / 2.0;
    r.sigma_gamma = std::sqrt(s2 * s2 + r.sigma_omega * r.sigma_omega) / 2.0;
    const double sigma_diff = std::sqrt(s2 * s2 + r.sigma_omega * r.sigma_omega);
    r.consistent = !(r.omega - k2 > 3.0 * sigma_diff);
    return r;
}

struct JointRateFit {
    RateEstimate rates;
    /// params (A1, c1, A2, c2, omega, gamma).
    FitResult fit;
};

/// Fits both curves at once with omega and gamma shared:
/// F1 = A1 exp(-3 omega tau) + c1, F2 = A2 exp(-(omega + 2 gamma) tau) + c2.
inline JointRateFit fit_rates_joint(const DecayDataset& f1, const DecayDataset& f2, const FitOptions& opt = {})
{
    f1.validate();
    f2.validate();
    if (f1.points.size() < 4 || f2.points.size() < 4) throw FitError("joint fit needs at least 4 points per curve");
    const auto g1 = guess_exponential(f1);
    const auto g2 = guess_exponential(f2);

    // The abscissa is the point index into the concatenated curves.
    std::vector<std::pair<bool, double>> table;
    std::vector<DataPoint> pts;
    for (const auto& p : f1.points) {
        pts.push_back({static_cast<double>(table.size()), p.signal, p.sigma});
        table.emplace_back(false, p.tau_us);
    }
    for (const auto& p : f2.points) {
        pts.push_back({static_cast<double>(table.size()), p.signal, p.sigma});
        table.emplace_back(true, p.tau_us);
    }

    FitModel m;
    m.name = "joint decay";
    m.param_names = {"amplitude_f1", "baseline_f1", "amplitude_f2", "baseline_f2", "omega_kHz", "gamma_kHz"};
    m.bounds = {Bounds::nonnegative(), {}, Bounds::nonnegative(), {}, Bounds::nonnegative(), Bounds::nonnegative()};
    m.eval = [table](std::span<const double> p, double x) {
        const auto& [second, tau] = table[static_cast<std::size_t>(x)];
        if (!second) return p[0] * std::exp(-units::decay_exponent(3.0 * p[4], tau)) + p[1];
        return p[2] * std::exp(-units::decay_exponent(p[4] + 2.0 * p[5], tau)) + p[3];
    };

    const double omega0 = g1.rate_khz / 3.0;
    const double gamma0 = std::max((g2.rate_khz - omega0) / 2.0, 0.0);
    const std::vector<double> init{g1.amplitude, g1.baseline, g2.amplitude, g2.baseline, omega0, gamma0};
    JointRateFit out{{}, levenberg_marquardt(m, pts, init, opt)};
    const auto& fp = out.fit;
    out.rates = {fp.params[4], fp.errors[4], fp.params[5], fp.errors[5], true};
    return out;
}

} // namespace vbrelax
