// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "vbrelax/peaks.hpp"

using namespace vbrelax;

TEST(MovingAverage, CenteredWindowShrinksAtEdges)
{
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7};
    const auto m = moving_average(v, 5);
    ASSERT_EQ(m.size(), v.size());
    EXPECT_DOUBLE_EQ(m[0], 1.0);
    EXPECT_DOUBLE_EQ(m[1], 2.0);
    EXPECT_DOUBLE_EQ(m[3], 4.0);
    EXPECT_DOUBLE_EQ(m[6], 7.0);
    const std::vector<double> spike{0, 0, 0, 5, 0, 0, 0};
    EXPECT_DOUBLE_EQ(moving_average(spike, 5)[3], 1.0);
    EXPECT_DOUBLE_EQ(moving_average(spike, 5)[2], 1.0);
}

TEST(MovingAverage, EmptyInput)
{
    EXPECT_TRUE(moving_average(std::vector<double>{}, 5).empty());
}

TEST(FindPeaks, InteriorMaximaWithProminence)
{
    const std::vector<double> v{0, 3, 1, 5, 2, 4, 0};
    const auto p = find_peaks(v);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].index, 1u);
    EXPECT_DOUBLE_EQ(p[0].prominence, 2.0);
    EXPECT_EQ(p[1].index, 3u);
    EXPECT_DOUBLE_EQ(p[1].prominence, 5.0);
    EXPECT_EQ(p[2].index, 5u);
    EXPECT_DOUBLE_EQ(p[2].prominence, 2.0);

    const auto r = rank_by_prominence(p);
    EXPECT_EQ(r[0].index, 3u);
    EXPECT_EQ(r[1].index, 1u);
    EXPECT_EQ(r[2].index, 5u);
}

TEST(FindPeaks, FlatTopCountsOnce)
{
    const std::vector<double> v{0, 1, 2, 2, 2, 2, 1, 0};
    const auto p = find_peaks(v);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].index, 3u);
}

TEST(FindPeaks, EdgesAndPlateausAreNotPeaks)
{
    EXPECT_TRUE(find_peaks(std::vector<double>{5, 4, 3, 2, 1}).empty());
    EXPECT_TRUE(find_peaks(std::vector<double>{1, 2, 3, 4, 5}).empty());
    EXPECT_TRUE(find_peaks(std::vector<double>{1, 2, 2, 2}).empty());
    EXPECT_TRUE(find_peaks(std::vector<double>{3, 3, 3}).empty());
}

TEST(FindPeaksProperties, AgreesWithBruteForceOnRandomSignals)
{
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> level(0, 6);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> v(3 + trial % 30);
        for (auto& x : v) x = level(rng);
        const auto peaks = find_peaks(v);
        const auto every = oracle::brute_force_maxima(v);
        // The brute-force list repeats flat tops at every sample; each peak
        // must be one of those samples and each plateau must yield one peak.
        for (const auto& p : peaks) {
            EXPECT_NE(std::find(every.begin(), every.end(), p.index), every.end());
            EXPECT_GT(p.prominence, 0.0);
            EXPECT_DOUBLE_EQ(p.height, v[p.index]);
        }
        std::size_t plateaus = 0;
        for (std::size_t i = 0; i < every.size(); ++i)
            if (i == 0 || every[i] != every[i - 1] + 1 || v[every[i]] != v[every[i - 1]]) ++plateaus;
        EXPECT_EQ(peaks.size(), plateaus);
    }
}
