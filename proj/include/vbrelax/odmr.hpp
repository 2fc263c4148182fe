// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Zero-field ODMR spectra: two Lorentzian dips below a flat baseline,
//   C(nu) = c0 - A1 w1^2 / ((nu - nu1)^2 + w1^2) - A2 w2^2 / ((nu - nu2)^2 + w2^2)
// with w the half width at half maximum.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/lm.hpp"
#include "vbrelax/peaks.hpp"

namespace vbrelax {

struct SpectrumPoint {
    double freq_mhz;
    double contrast;

    friend bool operator==(const SpectrumPoint&, const SpectrumPoint&) = default;
};

/// Params (c0, A1, nu1, w1, A2, nu2, w2), frequencies in MHz.
inline FitModel two_lorentzian_model()
{
    FitModel m;
    m.name = "two-Lorentzian";
    m.param_names = {"baseline", "depth_1", "nu_1_MHz", "hwhm_1_MHz", "depth_2", "nu_2_MHz", "hwhm_2_MHz"};
    const Bounds width{1e-9, std::numeric_limits<double>::infinity()};
    m.bounds = {Bounds{}, Bounds::nonnegative(), Bounds{}, width, Bounds::nonnegative(), Bounds{}, width};
    m.eval = [](std::span<const double> p, double nu) {
        const double d1 = nu - p[2], d2 = nu - p[5];
        const double w1 = p[3] * p[3], w2 = p[6] * p[6];
        return p[0] - p[1] * w1 / (d1 * d1 + w1) - p[4] * w2 / (d2 * d2 + w2);
    };
    m.gradient = [](std::span<const double> p, double nu, std::span<double> out) {
        out[0] = 1.0;
        for (std::size_t k = 0; k < 2; ++k) {
            const double a = p[1 + 3 * k], nu0 = p[2 + 3 * k], w = p[3 + 3 * k];
            const double d = nu - nu0;
            const double den = d * d + w * w;
            out[1 + 3 * k] = -w * w / den;
            out[2 + 3 * k] = -a * 2.0 * w * w * d / (den * den);
            out[3 + 3 * k] = -a * 2.0 * w * d * d / (den * den);
        }
    };
    return m;
}

struct OdmrFit {
    /// Params ordered so that nu_1 < nu_2.
    FitResult fit;
    double center_mhz;
    double center_error_mhz;

    double nu1() const { return fit.params[2]; }
    double nu2() const { return fit.params[5]; }
};

namespace detail {

/// Half width at half depth of a dip, walked outward on the smoothed data.
inline double dip_half_width(std::span<const double> f, std::span<const double> s, std::size_t i, double baseline)
{
    const double half = baseline - 0.5 * (baseline - s[i]);
    double left = -1.0, right = -1.0;
    for (std::size_t j = i; j-- > 0;)
        if (s[j] >= half) {
            left = f[i] - f[j];
            break;
        }
    for (std::size_t j = i + 1; j < s.size(); ++j)
        if (s[j] >= half) {
            right = f[j] - f[i];
            break;
        }
    double w = left > 0.0 && right > 0.0 ? 0.5 * (left + right) : std::max(left, right);
    const double spacing = (f.back() - f.front()) / static_cast<double>(f.size() - 1);
    return std::max(w, spacing);
}

} // namespace detail

/// Minimum prominence of the second dip relative to the first for the
/// spectrum to count as showing two resolved dips.
inline constexpr double odmr_second_dip_ratio = 0.25;

/// Fits two Lorentzian dips. The starting point comes from the two most
/// prominent minima of the 5-point moving average. Without weights the
/// covariance is scaled by the reduced chi2.
inline OdmrFit fit_two_lorentzian(std::span<const SpectrumPoint> spectrum, FitOptions opt = {})
{
    if (spectrum.size() < 8)
        throw FitError(fmt::format("ODMR fit needs at least 8 points, got {}", spectrum.size()));
    std::vector<SpectrumPoint> pts(spectrum.begin(), spectrum.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.freq_mhz < b.freq_mhz; });
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].freq_mhz > pts[i - 1].freq_mhz))
            throw InvalidArgument(fmt::format("repeated frequency {} MHz", pts[i].freq_mhz));

    std::vector<double> f, c;
    for (const auto& p : pts) {
        f.push_back(p.freq_mhz);
        c.push_back(p.contrast);
    }
    const auto smooth = moving_average(c, 5);
    std::vector<double> neg(smooth.size());
    std::transform(smooth.begin(), smooth.end(), neg.begin(), [](double x) { return -x; });
    const auto dips = rank_by_prominence(find_peaks(neg));
    if (dips.size() < 2 || dips[1].prominence < odmr_second_dip_ratio * dips[0].prominence) {
        std::string found = dips.empty() ? std::string("none")
                                         : fmt::format("deepest at {} MHz (prominence {:.3g})", f[dips[0].index],
                                                       dips[0].prominence);
        if (dips.size() >= 2)
            found += fmt::format(", next at {} MHz (prominence {:.3g})", f[dips[1].index], dips[1].prominence);
        throw FitError("ODMR spectrum does not show two resolvable dips; found " + found);
    }

    std::size_t i1 = dips[0].index, i2 = dips[1].index;
    if (i1 > i2) std::swap(i1, i2);
    const double baseline = *std::max_element(smooth.begin(), smooth.end());
    const std::vector<double> init{
        baseline,
        std::max(baseline - smooth[i1], 0.0), f[i1], detail::dip_half_width(f, smooth, i1, baseline),
        std::max(baseline - smooth[i2], 0.0), f[i2], detail::dip_half_width(f, smooth, i2, baseline),
    };

    std::vector<DataPoint> data;
    for (const auto& p : pts) data.push_back({p.freq_mhz, p.contrast, 1.0});
    opt.covariance = CovarianceScaling::reduced_chi2;
    FitResult fit = levenberg_marquardt(two_lorentzian_model(), data, init, opt);

    if (fit.params[2] > fit.params[5]) {
        std::swap_ranges(fit.params.begin() + 1, fit.params.begin() + 4, fit.params.begin() + 4);
        std::swap_ranges(fit.errors.begin() + 1, fit.errors.begin() + 4, fit.errors.begin() + 4);
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
        perm.indices() << 0, 4, 5, 6, 1, 2, 3;
        fit.covariance = perm * fit.covariance * perm.transpose();
    }
    const auto& cov = fit.covariance;
    const double center = 0.5 * (fit.params[2] + fit.params[5]);
    const double var = 0.25 * (cov(2, 2) + cov(5, 5) + 2.0 * cov(2, 5));
    return {std::move(fit), center, std::sqrt(std::max(var, 0.0))};
}

} // namespace vbrelax
