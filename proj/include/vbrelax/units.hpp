// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Unit conventions used throughout the toolkit:
//   rates        kHz   (1 kHz = 10^3 s^-1)
//   times        us
//   energies     meV
//   temperatures K
// so rate[kHz] * time[us] * 1e-3 is dimensionless.

namespace vbrelax::units {

inline constexpr double khz_us = 1.0e-3;

/// Boltzmann constant in meV/K.
inline constexpr double boltzmann_meV_per_K = 0.08617333;

/// Exponent rate*time for a rate in kHz and a time in us.
constexpr double decay_exponent(double rate_khz, double time_us) noexcept
{
    return rate_khz * time_us * khz_us;
}

/// 1 / rate, returned in us.
constexpr double inverse_rate_us(double rate_khz) noexcept
{
    return 1.0 / (rate_khz * khz_us);
}

} // namespace vbrelax::units
