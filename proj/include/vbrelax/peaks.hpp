// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Smoothing and prominence-ranked local maxima of sampled spectra.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace vbrelax {

/// Centered moving average; the window shrinks symmetrically at the edges.
inline std::vector<double> moving_average(std::span<const double> v, std::size_t window = 5)
{
    const std::size_t half = window / 2;
    const std::size_t n = v.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        double s = 0.0;
        for (std::size_t j = i - h; j <= i + h; ++j) s += v[j];
        out[i] = s / static_cast<double>(2 * h + 1);
    }
    return out;
}

struct Peak {
    std::size_t index;
    double height;
    /// Height above the higher of the two bases: the lowest points between
    /// the peak and the nearest strictly higher sample (or the edge) on
    /// each side.
    double prominence;
};

/// Interior local maxima. A flat top counts once, at its middle sample.
inline std::vector<Peak> find_peaks(std::span<const double> v)
{
    std::vector<Peak> peaks;
    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(v[i] > v[i - 1])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end + 1 < n && v[end + 1] == v[i]) ++end;
        if (end + 1 < n && v[end + 1] < v[i]) {
            const std::size_t mid = (i + end) / 2;
            const double h = v[mid];
            double left = h;
            for (std::size_t j = i; j-- > 0;) {
                if (v[j] > h) break;
                left = std::min(left, v[j]);
            }
            double right = h;
            for (std::size_t j = end + 1; j < n; ++j) {
                if (v[j] > h) break;
                right = std::min(right, v[j]);
            }
            peaks.push_back({mid, h, h - std::max(left, right)});
        }
        i = end + 1;
    }
    return peaks;
}

/// Peaks sorted by decreasing prominence; ties keep index order.
inline std::vector<Peak> rank_by_prominence(std::vector<Peak> peaks)
{
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    return peaks;
}

} // namespace vbrelax
