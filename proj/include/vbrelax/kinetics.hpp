// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Population dynamics of the spin-1 ground-state triplet under
// single-quantum (|0> <-> |+-1>, rate omega) and double-quantum
// (|-1> <-> |+1>, rate gamma) relaxation. Up and down rates are equal, so
// the equilibrium is uniform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/units.hpp"

namespace vbrelax {

/// Basis ordering used by every 3-vector and 3x3 matrix in this header.
enum class Level : std::size_t { minus = 0, zero = 1, plus = 2 };

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

constexpr std::size_t index(Level l) noexcept { return static_cast<std::size_t>(l); }

/// Single-quantum (omega) and double-quantum (gamma) relaxation rates, kHz.
class RatePair {
public:
    RatePair(double omega_khz, double gamma_khz) : omega_(omega_khz), gamma_(gamma_khz)
    {
        if (!std::isfinite(omega_) || !std::isfinite(gamma_))
            throw InvalidArgument("relaxation rates must be finite");
        if (omega_ < 0.0 || gamma_ < 0.0)
            throw InvalidArgument(
                fmt::format("relaxation rates must be nonnegative (omega={}, gamma={})", omega_, gamma_));
    }

    double omega() const noexcept { return omega_; }
    double gamma() const noexcept { return gamma_; }

    /// Decay rate of the |0> vs |-1> population difference (F1 curve).
    double f1_rate() const noexcept { return 3.0 * omega_; }
    /// Decay rate of the |-1> vs |+1> population difference (F2 curve).
    double f2_rate() const noexcept { return omega_ + 2.0 * gamma_; }

    friend bool operator==(const RatePair&, const RatePair&) = default;

private:
    double omega_;
    double gamma_;
};

/// Occupation probabilities of (|-1>, |0>, |+1>).
class PopulationState {
public:
    static constexpr double sum_tolerance = 1e-12;

    PopulationState(double p_minus, double p_zero, double p_plus) : p_{p_minus, p_zero, p_plus}
    {
        for (double p : p_) {
            if (!std::isfinite(p) || p < 0.0 || p > 1.0)
                throw InvalidArgument(fmt::format("population {} outside [0, 1]", p));
        }
        const double s = p_[0] + p_[1] + p_[2];
        if (std::abs(s - 1.0) > sum_tolerance)
            throw InvalidArgument(fmt::format("populations sum to {:.17g}, not 1", s));
    }

    explicit PopulationState(const Vec3& p) : PopulationState(p[0], p[1], p[2]) {}

    /// All population in |0>, the state left by optical pumping.
    static PopulationState polarized() { return {0.0, 1.0, 0.0}; }
    static PopulationState uniform() { return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; }

    /// Builds a state from a computed vector, absorbing round-off excursions
    /// of at most `sum_tolerance` outside [0, 1].
    static PopulationState from_computed(Vec3 p)
    {
        for (double& x : p) {
            if (x < 0.0 && x > -sum_tolerance) x = 0.0;
            if (x > 1.0 && x < 1.0 + sum_tolerance) x = 1.0;
        }
        return PopulationState(p);
    }

    double minus() const noexcept { return p_[0]; }
    double zero() const noexcept { return p_[1]; }
    double plus() const noexcept { return p_[2]; }
    double operator[](Level l) const noexcept { return p_[index(l)]; }
    const Vec3& values() const noexcept { return p_; }
    double sum() const noexcept { return p_[0] + p_[1] + p_[2]; }

    friend bool operator==(const PopulationState&, const PopulationState&) = default;

private:
    Vec3 p_;
};

/// Generator of dp/dt = M p in kHz, basis (|-1>, |0>, |+1>).
class RateMatrix {
public:
    static constexpr double tolerance = 1e-12;

    explicit RateMatrix(const Mat3& entries) : m_(entries)
    {
        double scale = 0.0;
        for (const auto& row : m_)
            for (double x : row) {
                if (!std::isfinite(x)) throw InvalidArgument("rate matrix entries must be finite");
                scale = std::max(scale, std::abs(x));
            }
        const double tol = tolerance * std::max(1.0, scale);
        for (std::size_t i = 0; i < 3; ++i) {
            if (m_[i][i] > 0.0) throw InvalidArgument("rate matrix diagonal must be nonpositive");
            double col = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                col += m_[j][i];
                if (i == j) continue;
                if (m_[i][j] < 0.0) throw InvalidArgument("rate matrix off-diagonal entries must be nonnegative");
                if (std::abs(m_[i][j] - m_[j][i]) > tol) throw InvalidArgument("rate matrix must be symmetric");
            }
            if (std::abs(col) > tol)
                throw InvalidArgument(fmt::format("rate matrix column {} sums to {}, not 0", i, col));
        }
    }

    double operator()(Level row, Level col) const noexcept { return m_[index(row)][index(col)]; }
    double operator()(std::size_t row, std::size_t col) const noexcept { return m_[row][col]; }
    const Mat3& entries() const noexcept { return m_; }

    Vec3 apply(const Vec3& p) const noexcept
    {
        Vec3 out{};
        for (std::size_t i = 0; i < 3; ++i)
            out[i] = m_[i][0] * p[0] + m_[i][1] * p[1] + m_[i][2] * p[2];
        return out;
    }

private:
    Mat3 m_;
};

/// Spectral decomposition of a rate matrix: decay rates (kHz, ascending) and
/// the population-difference vector that decays at each rate.
struct KineticEigenmodes {
    Vec3 rates;
    std::array<Vec3, 3> modes;
};

inline RateMatrix build_rate_matrix(const RatePair& rates)
{
    const double om = rates.omega();
    const double ga = rates.gamma();
    // dp0/dt  = -2 om p0 + om p- + om p+
    // dp-+/dt = om p0 - (om + ga) p-+ + ga p+-
    return RateMatrix(Mat3{{
        {-(om + ga), om, ga},
        {om, -2.0 * om, om},
        {ga, om, -(om + ga)},
    }});
}

/// Closed-form decomposition. The generator must have equal single-quantum
/// rates on both transitions, which build_rate_matrix guarantees.
inline KineticEigenmodes eigenmodes(const RateMatrix& m)
{
    const double om = m(Level::minus, Level::zero);
    const double om_plus = m(Level::plus, Level::zero);
    const double ga = m(Level::minus, Level::plus);
    if (std::abs(om - om_plus) > RateMatrix::tolerance * std::max(1.0, std::abs(om)))
        throw InvalidArgument("closed-form eigenmodes need equal single-quantum rates");

    struct Mode {
        double rate;
        Vec3 vec;
    };
    std::array<Mode, 3> modes{{
        {0.0, {1.0, 1.0, 1.0}},
        {3.0 * om, {1.0, -2.0, 1.0}},
        {om + 2.0 * ga, {1.0, 0.0, -1.0}},
    }};
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.rate < b.rate; });

    KineticEigenmodes out{};
    for (std::size_t k = 0; k < 3; ++k) {
        out.rates[k] = modes[k].rate;
        out.modes[k] = modes[k].vec;
    }
    return out;
}

/// Exact population state after relaxing for `tau_us`.
inline PopulationState evolve_analytic(const PopulationState& initial, const RatePair& rates, double tau_us)
{
    if (!(tau_us >= 0.0) || !std::isfinite(tau_us))
        throw InvalidArgument(fmt::format("evolution time must be finite and >= 0 (got {})", tau_us));

    const auto& p = initial.values();
    // Projections onto (1,1,1), (1,-2,1) and (1,0,-1).
    const double mean = (p[0] + p[1] + p[2]) / 3.0;
    const double c_sq = (p[0] - 2.0 * p[1] + p[2]) / 6.0;
    const double c_dq = (p[0] - p[2]) / 2.0;

    const double e_sq = std::exp(-units::decay_exponent(rates.f1_rate(), tau_us));
    const double e_dq = std::exp(-units::decay_exponent(rates.f2_rate(), tau_us));

    const double a = c_sq * e_sq;
    const double b = c_dq * e_dq;
    return PopulationState::from_computed({mean + a + b, mean - 2.0 * a, mean + a - b});
}

struct NumericEvolution {
    PopulationState state;
    /// Set when integration drift above `drift_limit` forced renormalization.
    bool renormalized = false;
    std::size_t steps = 0;

    static constexpr double drift_limit = 1e-9;
};

/// Fixed-step classical Runge-Kutta integration of the rate equations.
/// The interval is split into ceil(tau/step) equal steps no longer than `step`.
inline NumericEvolution evolve_numeric(const PopulationState& initial, const RatePair& rates, double tau_us,
                                       double step_us)
{
    if (!(step_us > 0.0) || !std::isfinite(step_us))
        throw InvalidArgument(fmt::format("integration step must be > 0 (got {})", step_us));
    if (!(tau_us >= 0.0) || !std::isfinite(tau_us))
        throw InvalidArgument(fmt::format("evolution time must be finite and >= 0 (got {})", tau_us));
    if (tau_us > 0.0 && step_us > tau_us)
        throw InvalidArgument(fmt::format("integration step {} exceeds evolution time {}", step_us, tau_us));
    if (tau_us == 0.0) return {initial, false, 0};

    // Work in ms so the generator is in natural units (kHz * ms = 1).
    const RateMatrix m = build_rate_matrix(rates);
    const auto n = static_cast<std::size_t>(std::ceil(tau_us / step_us - 1e-9));
    const double h = tau_us / static_cast<double>(n) * units::khz_us;

    Vec3 p = initial.values();
    auto axpy = [](const Vec3& x, double a, const Vec3& y) {
        return Vec3{x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2]};
    };
    for (std::size_t s = 0; s < n; ++s) {
        const Vec3 k1 = m.apply(p);
        const Vec3 k2 = m.apply(axpy(p, 0.5 * h, k1));
        const Vec3 k3 = m.apply(axpy(p, 0.5 * h, k2));
        const Vec3 k4 = m.apply(axpy(p, h, k3));
        for (std::size_t i = 0; i < 3; ++i)
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    const double target = initial.sum();
    const double drift = std::abs(p[0] + p[1] + p[2] - target);
    bool flagged = false;
    if (drift > PopulationState::sum_tolerance) {
        // Sub-limit drift is rounding; only larger drift is reported.
        flagged = drift > NumericEvolution::drift_limit;
        const double scale = target / (p[0] + p[1] + p[2]);
        for (double& x : p) x *= scale;
    }
    return {PopulationState::from_computed(p), flagged, n};
}

/// Spin-lattice relaxation time 1 / (3 omega + gamma), in us.
inline double t1_from_rates(const RatePair& rates)
{
    const double total = 3.0 * rates.omega() + rates.gamma();
    if (total == 0.0) throw InfiniteT1();
    return units::inverse_rate_us(total);
}

} // namespace vbrelax
