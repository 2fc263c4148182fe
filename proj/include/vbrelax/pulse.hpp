// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Optical / microwave pulse protocols for the two relaxometry curves:
//
//   F1(tau) = S(0,0) - S(0,-1)     polarize, wait, [pi(0,-1)], read
//   F2(tau) = S(-1,-1) - S(-1,+1)  polarize, pi(0,-1), wait, pi(0,-1) | pi(0,+1), read
//
// Populations come from the exact kinetics; the readout maps the |0>
// population to bright counts and |+-1> to dark counts.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/kinetics.hpp"
#include "vbrelax/random.hpp"

namespace vbrelax {

enum class Transition { zero_minus, zero_plus };

struct Polarize {};

struct Wait {
    double tau_us = 0.0;
};

struct PiPulse {
    Transition transition = Transition::zero_minus;
    /// Fraction of the population swap that takes place.
    double fidelity = 1.0;
};

struct Readout {};

using PulseElement = std::variant<Polarize, Wait, PiPulse, Readout>;

/// Ordered protocol ending in a single Readout.
class PulseSequence {
public:
    explicit PulseSequence(std::vector<PulseElement> elements) : elements_(std::move(elements))
    {
        if (elements_.empty() || !std::holds_alternative<Readout>(elements_.back()))
            throw InvalidArgument("pulse sequence must end with a readout");
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            const auto& e = elements_[i];
            if (std::holds_alternative<Readout>(e) && i + 1 != elements_.size())
                throw InvalidArgument(fmt::format("readout at position {} is not the last element", i));
            if (const auto* w = std::get_if<Wait>(&e); w && (!(w->tau_us >= 0.0) || !std::isfinite(w->tau_us)))
                throw InvalidArgument(fmt::format("wait time {} must be finite and >= 0", w->tau_us));
            if (const auto* p = std::get_if<PiPulse>(&e); p && !(p->fidelity >= 0.0 && p->fidelity <= 1.0))
                throw InvalidArgument(fmt::format("pi-pulse fidelity {} outside [0, 1]", p->fidelity));
        }
    }

    PulseSequence(std::initializer_list<PulseElement> elements)
        : PulseSequence(std::vector<PulseElement>(elements)) {}

    std::span<const PulseElement> elements() const noexcept { return elements_; }

private:
    std::vector<PulseElement> elements_;
};

/// Photon count model. Rates are counts per shot.
struct ReadoutModel {
    double rate_bright = 1.00;
    double rate_dark = 0.85;
    std::uint64_t shots = 1;

    void validate() const
    {
        if (!std::isfinite(rate_bright) || !std::isfinite(rate_dark) || !(rate_dark >= 0.0) ||
            !(rate_bright > rate_dark))
            throw InvalidArgument(fmt::format("readout needs rate_bright > rate_dark >= 0 (got {}, {})",
                                              rate_bright, rate_dark));
        if (shots < 1) throw InvalidArgument("readout needs at least one shot");
    }

    /// Noise-free readout: one count per shot from |0>, none from |+-1>.
    static ReadoutModel ideal() { return {1.0, 0.0, 1}; }
};

/// Applies a (possibly partial) population swap on one transition.
inline PopulationState apply_pi_pulse(const PopulationState& s, const PiPulse& pulse)
{
    Vec3 p = s.values();
    const std::size_t other = pulse.transition == Transition::zero_minus ? index(Level::minus) : index(Level::plus);
    const std::size_t zero = index(Level::zero);
    const double f = pulse.fidelity;
    const double a = p[zero];
    const double b = p[other];
    p[zero] = f * b + (1.0 - f) * a;
    p[other] = f * a + (1.0 - f) * b;
    return PopulationState::from_computed(p);
}

/// Expected total counts (all shots) of a sequence. `polarization` is the
/// state a Polarize element prepares.
inline double run_sequence(const PulseSequence& seq, const RatePair& rates, const ReadoutModel& readout,
                           const PopulationState& polarization = PopulationState::polarized())
{
    readout.validate();
    // Before any Polarize the spin is thermalized.
    PopulationState state = PopulationState::uniform();
    for (const auto& element : seq.elements()) {
        if (std::holds_alternative<Polarize>(element)) {
            state = polarization;
        } else if (const auto* w = std::get_if<Wait>(&element)) {
            state = evolve_analytic(state, rates, w->tau_us);
        } else if (const auto* p = std::get_if<PiPulse>(&element)) {
            state = apply_pi_pulse(state, *p);
        } else {
            const double dark = state.minus() + state.plus();
            return static_cast<double>(readout.shots) *
                   (state.zero() * readout.rate_bright + dark * readout.rate_dark);
        }
    }
    // PulseSequence guarantees a trailing readout.
    return 0.0;
}

enum class CurveKind { f1, f2 };

inline std::string_view to_string(CurveKind k) { return k == CurveKind::f1 ? "F1" : "F2"; }

/// Imperfections shared by both protocols.
struct ProtocolOptions {
    double pi_fidelity = 1.0;
    PopulationState polarization = PopulationState::polarized();
};

/// The two sequences whose count difference forms a curve at delay `tau_us`.
inline std::pair<PulseSequence, PulseSequence> protocol(CurveKind kind, double tau_us,
                                                        const ProtocolOptions& opt = {})
{
    const PiPulse to_minus{Transition::zero_minus, opt.pi_fidelity};
    const PiPulse to_plus{Transition::zero_plus, opt.pi_fidelity};
    if (kind == CurveKind::f1) {
        return {PulseSequence{Polarize{}, Wait{tau_us}, Readout{}},
                PulseSequence{Polarize{}, Wait{tau_us}, to_minus, Readout{}}};
    }
    return {PulseSequence{Polarize{}, to_minus, Wait{tau_us}, to_minus, Readout{}},
            PulseSequence{Polarize{}, to_minus, Wait{tau_us}, to_plus, Readout{}}};
}

/// Expected counts (S_a, S_b) of the two sequences of a curve.
inline std::pair<double, double> expected_counts(CurveKind kind, double tau_us, const RatePair& rates,
                                                 const ReadoutModel& readout, const ProtocolOptions& opt = {})
{
    const auto [a, b] = protocol(kind, tau_us, opt);
    return {run_sequence(a, rates, readout, opt.polarization), run_sequence(b, rates, readout, opt.polarization)};
}

/// Count difference at tau = 0, the normalization of a curve.
inline double curve_contrast(CurveKind kind, const RatePair& rates, const ReadoutModel& readout,
                             const ProtocolOptions& opt = {})
{
    const auto [a, b] = expected_counts(kind, 0.0, rates, readout, opt);
    const double d = a - b;
    if (!(d > 0.0))
        throw InvalidArgument(fmt::format("{} protocol has no contrast at tau = 0 (difference {})",
                                          to_string(kind), d));
    return d;
}

inline double normalized_signal(CurveKind kind, double tau_us, const RatePair& rates, const ReadoutModel& readout,
                                const ProtocolOptions& opt = {})
{
    if (!(tau_us >= 0.0)) throw InvalidArgument(fmt::format("delay {} must be >= 0", tau_us));
    const auto [a, b] = expected_counts(kind, tau_us, rates, readout, opt);
    return (a - b) / curve_contrast(kind, rates, readout, opt);
}

/// S(0,0) - S(0,-1), normalized to 1 at tau = 0.
inline double signal_f1(double tau_us, const RatePair& rates, const ReadoutModel& readout,
                        const ProtocolOptions& opt = {})
{
    return normalized_signal(CurveKind::f1, tau_us, rates, readout, opt);
}

/// S(-1,-1) - S(-1,+1), normalized to 1 at tau = 0.
inline double signal_f2(double tau_us, const RatePair& rates, const ReadoutModel& readout,
                        const ProtocolOptions& opt = {})
{
    return normalized_signal(CurveKind::f2, tau_us, rates, readout, opt);
}

struct DecayPoint {
    double tau_us;
    double signal;
    double sigma;

    friend bool operator==(const DecayPoint&, const DecayPoint&) = default;
};

/// Normalized fluorescence-difference curve.
struct DecayDataset {
    CurveKind kind = CurveKind::f1;
    std::vector<DecayPoint> points;
    std::optional<double> temperature_K;

    void validate() const
    {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!std::isfinite(p.tau_us) || !std::isfinite(p.signal) || !std::isfinite(p.sigma))
                throw InvalidArgument(fmt::format("point {} has non-finite values", i));
            if (p.tau_us < 0.0) throw InvalidArgument(fmt::format("point {}: tau must be >= 0", i));
            if (i > 0 && !(p.tau_us > points[i - 1].tau_us))
                throw InvalidArgument(fmt::format("point {}: tau must be strictly increasing", i));
            if (!(p.sigma > 0.0)) throw InvalidArgument(fmt::format("point {}: sigma must be > 0", i));
        }
    }

    friend bool operator==(const DecayDataset&, const DecayDataset&) = default;
};

namespace detail {

inline void check_grid(std::span<const double> taus)
{
    if (taus.empty()) throw InvalidArgument("delay grid is empty");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] >= 0.0) || !std::isfinite(taus[i]))
            throw InvalidArgument(fmt::format("delay {} at index {} must be finite and >= 0", taus[i], i));
        if (i > 0 && !(taus[i] > taus[i - 1]))
            throw InvalidArgument(fmt::format("delay grid not strictly increasing at index {}", i));
    }
}

inline double poisson_draw(double mean, Rng& rng)
{
    if (!(mean > 0.0)) return 0.0;
    return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

} // namespace detail

/// Noise-free curve; sigma is the shot-noise standard error of the
/// expected counts.
inline DecayDataset expected_dataset(CurveKind kind, const RatePair& rates, const ReadoutModel& readout,
                                     std::span<const double> taus, const ProtocolOptions& opt = {})
{
    detail::check_grid(taus);
    const double norm = curve_contrast(kind, rates, readout, opt);
    DecayDataset out{kind, {}, std::nullopt};
    out.points.reserve(taus.size());
    for (double tau : taus) {
        const auto [a, b] = expected_counts(kind, tau, rates, readout, opt);
        out.points.push_back({tau, (a - b) / norm, std::sqrt(a + b) / norm});
    }
    return out;
}

/// Curve with Poisson-distributed counts for both sequences at every delay.
/// The reported sigma is propagated from the observed counts.
inline DecayDataset synth_dataset(CurveKind kind, const RatePair& rates, const ReadoutModel& readout,
                                  std::span<const double> taus, std::uint64_t seed, const ProtocolOptions& opt = {})
{
    detail::check_grid(taus);
    const double norm = curve_contrast(kind, rates, readout, opt);
    Rng rng(seed);
    DecayDataset out{kind, {}, std::nullopt};
    out.points.reserve(taus.size());
    for (double tau : taus) {
        const auto [a, b] = expected_counts(kind, tau, rates, readout, opt);
        const double na = detail::poisson_draw(a, rng);
        const double nb = detail::poisson_draw(b, rng);
        // Zero total counts would give sigma = 0; one count is the floor.
        const double var = std::max(na + nb, 1.0);
        out.points.push_back({tau, (na - nb) / norm, std::sqrt(var) / norm});
    }
    return out;
}

} // namespace vbrelax
