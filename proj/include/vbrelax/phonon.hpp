// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Two-phonon temperature models of the relaxation rates,
//   omega(T) = sum_i A_i n_i (n_i + 1) + A_S
//   gamma(T) = sum_i B_i n_i (n_i + 1) + B_S
// with n_i the Bose-Einstein occupation of effective mode i.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/kinetics.hpp"
#include "vbrelax/lm.hpp"
#include "vbrelax/nnls.hpp"
#include "vbrelax/peaks.hpp"
#include "vbrelax/units.hpp"

namespace vbrelax {

/// Effective phonon mode, carried as its energy hbar*omega in meV.
class PhononMode {
public:
    explicit PhononMode(double energy_meV) : energy_(energy_meV)
    {
        if (!(energy_ > 0.0) || !std::isfinite(energy_))
            throw InvalidArgument(fmt::format("phonon energy must be finite and > 0 (got {})", energy_));
    }

    double energy_meV() const noexcept { return energy_; }

    friend bool operator==(const PhononMode&, const PhononMode&) = default;

private:
    double energy_;
};

/// Peaks of the defective-monolayer phonon density of states, meV.
inline constexpr std::array<double, 3> reference_mode_energies_meV{23.48, 77.39, 165.75};

inline std::vector<PhononMode> reference_modes()
{
    return {PhononMode(reference_mode_energies_meV[0]), PhononMode(reference_mode_energies_meV[1]),
            PhononMode(reference_mode_energies_meV[2])};
}

/// Mean thermal occupation 1 / (exp(E / kT) - 1).
inline double bose_occupation(double energy_meV, double temperature_K)
{
    if (!(temperature_K > 0.0) || !std::isfinite(temperature_K))
        throw InvalidArgument(fmt::format("temperature must be finite and > 0 (got {})", temperature_K));
    if (!(energy_meV > 0.0) || !std::isfinite(energy_meV))
        throw InvalidArgument(fmt::format("phonon energy must be finite and > 0 (got {})", energy_meV));
    return 1.0 / std::expm1(energy_meV / (units::boltzmann_meV_per_K * temperature_K));
}

/// n (n + 1), the two-phonon temperature factor.
inline double two_phonon_factor(double energy_meV, double temperature_K)
{
    const double n = bose_occupation(energy_meV, temperature_K);
    return n * (n + 1.0);
}

enum class RateKind { omega, gamma };

/// Mode energies with the omega (A) and gamma (B) couplings, kHz.
struct CouplingSet {
    std::vector<PhononMode> modes;
    std::vector<double> a_coeffs;
    double a_offset = 0.0;
    std::vector<double> b_coeffs;
    double b_offset = 0.0;

    void validate() const
    {
        if (a_coeffs.size() != modes.size() || b_coeffs.size() != modes.size())
            throw InvalidArgument(fmt::format("coupling set has {} modes but {} A and {} B coefficients",
                                              modes.size(), a_coeffs.size(), b_coeffs.size()));
        auto check = [](double v, const char* what) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidArgument(fmt::format("{} must be finite and >= 0 (got {})", what, v));
        };
        for (double a : a_coeffs) check(a, "A coefficient");
        for (double b : b_coeffs) check(b, "B coefficient");
        check(a_offset, "A_S");
        check(b_offset, "B_S");
    }

    std::span<const double> coeffs(RateKind k) const { return k == RateKind::omega ? a_coeffs : b_coeffs; }
    double offset(RateKind k) const { return k == RateKind::omega ? a_offset : b_offset; }
};

inline double rate_model(RateKind kind, const CouplingSet& coupling, double temperature_K)
{
    coupling.validate();
    const auto c = coupling.coeffs(kind);
    double rate = coupling.offset(kind);
    for (std::size_t i = 0; i < c.size(); ++i)
        rate += c[i] * two_phonon_factor(coupling.modes[i].energy_meV(), temperature_K);
    return rate;
}

/// Rate versus temperature with params (C_1..C_m, offset); modes fixed.
inline FitModel phonon_rate_model(std::span<const PhononMode> modes)
{
    FitModel m;
    m.name = "two-phonon rate";
    std::vector<double> energies;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        m.param_names.push_back(fmt::format("coeff_{}_kHz", i + 1));
        energies.push_back(modes[i].energy_meV());
    }
    m.param_names.push_back("offset_kHz");
    m.bounds.assign(m.param_names.size(), Bounds::nonnegative());
    m.eval = [energies](std::span<const double> p, double t) {
        double r = p[energies.size()];
        for (std::size_t i = 0; i < energies.size(); ++i) r += p[i] * two_phonon_factor(energies[i], t);
        return r;
    };
    m.gradient = [energies](std::span<const double>, double t, std::span<double> out) {
        for (std::size_t i = 0; i < energies.size(); ++i) out[i] = two_phonon_factor(energies[i], t);
        out[energies.size()] = 1.0;
    };
    return m;
}

struct TemperaturePoint {
    double temperature_K;
    double omega_khz;
    double sigma_omega_khz;
    double gamma_khz;
    double sigma_gamma_khz;

    friend bool operator==(const TemperaturePoint&, const TemperaturePoint&) = default;
};

/// Rates measured on one spot at increasing temperatures.
struct TemperatureSeries {
    std::vector<TemperaturePoint> points;
    std::string spot_label;

    void validate() const
    {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!(p.temperature_K > 0.0) || !std::isfinite(p.temperature_K))
                throw InvalidArgument(fmt::format("point {}: temperature must be > 0", i));
            if (i > 0 && !(p.temperature_K > points[i - 1].temperature_K))
                throw InvalidArgument(fmt::format("point {}: temperatures must be strictly increasing", i));
            if (!(p.sigma_omega_khz > 0.0) || !(p.sigma_gamma_khz > 0.0))
                throw InvalidArgument(fmt::format("point {}: sigmas must be > 0", i));
            if (!std::isfinite(p.omega_khz) || !std::isfinite(p.gamma_khz))
                throw InvalidArgument(fmt::format("point {}: rates must be finite", i));
        }
    }
};

/// Weighted design matrix [n_i(n_i+1) ..., 1] / sigma and targets y / sigma.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> weighted_design(const TemperatureSeries& series,
                                                                   std::span<const PhononMode> modes, RateKind kind)
{
    const auto rows = static_cast<Eigen::Index>(series.points.size());
    const auto cols = static_cast<Eigen::Index>(modes.size() + 1);
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& p = series.points[static_cast<std::size_t>(r)];
        const double y = kind == RateKind::omega ? p.omega_khz : p.gamma_khz;
        const double s = kind == RateKind::omega ? p.sigma_omega_khz : p.sigma_gamma_khz;
        for (std::size_t i = 0; i < modes.size(); ++i)
            a(r, static_cast<Eigen::Index>(i)) = two_phonon_factor(modes[i].energy_meV(), p.temperature_K) / s;
        a(r, cols - 1) = 1.0 / s;
        b(r) = y / s;
    }
    return {a, b};
}

struct TemperatureFit {
    /// Exact nonnegative least-squares couplings.
    CouplingSet coupling;
    /// Bounded LM refinement started from the exact solution; carries the
    /// covariance and chi2.
    FitResult omega_fit;
    FitResult gamma_fit;
};

/// Fits omega(T) and gamma(T) independently with the mode energies held
/// fixed. The models are linear in their coefficients, so the couplings are
/// the exact nonnegative least-squares solution.
inline TemperatureFit fit_temperature_series(const TemperatureSeries& series, std::span<const PhononMode> modes,
                                             const FitOptions& opt = {})
{
    series.validate();
    if (modes.empty()) throw InvalidArgument("temperature fit needs at least one phonon mode");
    const std::size_t needed = std::max<std::size_t>(5, modes.size() + 2);
    if (series.points.size() < needed)
        throw FitError(fmt::format("temperature series with {} points is under-determined (need {})",
                                   series.points.size(), needed));

    const FitModel model = phonon_rate_model(modes);
    auto fit_one = [&](RateKind kind, std::vector<double>& coeffs, double& offset) {
        const auto [a, b] = weighted_design(series, modes, kind);
        const Eigen::VectorXd x = nnls(a, b);
        coeffs.assign(x.data(), x.data() + modes.size());
        offset = x(static_cast<Eigen::Index>(modes.size()));

        std::vector<DataPoint> pts;
        for (const auto& p : series.points) {
            if (kind == RateKind::omega) pts.push_back({p.temperature_K, p.omega_khz, p.sigma_omega_khz});
            else pts.push_back({p.temperature_K, p.gamma_khz, p.sigma_gamma_khz});
        }
        const std::vector<double> init(x.data(), x.data() + x.size());
        return levenberg_marquardt(model, pts, init, opt);
    };

    TemperatureFit out;
    out.coupling.modes.assign(modes.begin(), modes.end());
    out.omega_fit = fit_one(RateKind::omega, out.coupling.a_coeffs, out.coupling.a_offset);
    out.gamma_fit = fit_one(RateKind::gamma, out.coupling.b_coeffs, out.coupling.b_offset);
    out.coupling.validate();
    return out;
}

struct T1Point {
    double temperature_K;
    double omega_khz;
    double gamma_khz;
    double t1_us;
};

inline std::vector<T1Point> predict_t1_curve(const CouplingSet& coupling, std::span<const double> temperatures_K)
{
    coupling.validate();
    std::vector<T1Point> out;
    out.reserve(temperatures_K.size());
    for (double t : temperatures_K) {
        const double om = rate_model(RateKind::omega, coupling, t);
        const double ga = rate_model(RateKind::gamma, coupling, t);
        out.push_back({t, om, ga, t1_from_rates(RatePair(om, ga))});
    }
    return out;
}

struct PdosPoint {
    double energy_meV;
    double density;

    friend bool operator==(const PdosPoint&, const PdosPoint&) = default;
};

/// The `count` most prominent maxima of the 5-point-smoothed density,
/// returned in ascending energy.
inline std::vector<PhononMode> pdos_peaks(std::span<const PdosPoint> spectrum, std::size_t count = 3)
{
    if (spectrum.size() < 16)
        throw InvalidArgument(fmt::format("PDOS needs at least 16 points, got {}", spectrum.size()));
    std::vector<double> density;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (!std::isfinite(spectrum[i].energy_meV) || !std::isfinite(spectrum[i].density))
            throw InvalidArgument(fmt::format("PDOS point {} is not finite", i));
        if (i > 0 && !(spectrum[i].energy_meV > spectrum[i - 1].energy_meV))
            throw InvalidArgument(fmt::format("PDOS energies not strictly increasing at point {}", i));
        density.push_back(spectrum[i].density);
    }
    auto peaks = rank_by_prominence(find_peaks(moving_average(density, 5)));
    if (peaks.size() < count) {
        std::string found;
        for (const auto& p : peaks)
            found += fmt::format("{}{} meV (prominence {:.3g})", found.empty() ? "" : ", ",
                                 spectrum[p.index].energy_meV, p.prominence);
        throw FitError(fmt::format("PDOS shows {} peak(s), {} requested: {}", peaks.size(), count,
                                   found.empty() ? "none" : found));
    }
    peaks.resize(count);
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
    std::vector<PhononMode> modes;
    for (const auto& p : peaks) modes.emplace_back(spectrum[p.index].energy_meV);
    return modes;
}

} // namespace vbrelax
