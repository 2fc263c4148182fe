// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace vbrelax {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of an independent sub-stream `stream` derived from a root seed.
constexpr std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream) noexcept
{
    return mix64(root + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

inline Rng make_rng(std::uint64_t root, std::uint64_t stream) { return Rng(split_seed(root, stream)); }

} // namespace vbrelax
