// SPDX-License-Identifier: Apache-2.0
//
// mmbeam: beam training and allocation for multiuser mmWave massive MIMO
// Copyright (C) 2026 The mmbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMBEAM_RANDOM_HPP
#define MMBEAM_RANDOM_HPP

#include "core.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

namespace mmbeam
{

// The engine output sequence is fixed by the standard; the distributions below
// are written out by hand so that draws are identical across standard libraries.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent random streams of one trial.
enum class Stream : std::uint64_t
{
    channel = 1,   // per-user channel draw
    noise = 2,     // measurement noise fields
    selection = 3, // SP codeword sampling
    auxiliary = 4, // anything else (tests, conflict-probability draws)
};

// Counter-based seed split: seed = mix(mix(mix(mix(root) ^ trial) ^ user) ^ stream).
// Every (root, trial, user, stream) tuple owns an independent engine, so results do
// not depend on the order in which trials or users are processed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial, std::uint64_t user, Stream stream)
{
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ (user + 0x632BE59BD9B4E019ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return h;
}

inline Rng make_rng(std::uint64_t root, std::uint64_t trial, std::uint64_t user, Stream stream)
{
    return Rng(derive_seed(root, trial, user, stream));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng &rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n), rejection sampling (no modulo bias).
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do
        x = rng();
    while (x >= limit);
    return x % n;
}

// Standard normal pair via Box-Muller; returns one complex sample with unit variance
// per real dimension.
inline cd box_muller(Rng &rng)
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0)
        u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
}

// Circularly-symmetric complex Gaussian CN(0, variance).
inline cd complex_normal(Rng &rng, double variance)
{
    return box_muller(rng) * std::sqrt(variance / 2.0);
}

// Draws k distinct elements of `pool` uniformly (partial Fisher-Yates on a copy).
// Returns all of `pool` when k >= pool.size().
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, Rng &rng)
{
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i)
    {
        auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

// Samples an index from a discrete distribution; entries need not be normalized.
// Zero-weight entries are never returned.
inline std::size_t sample_discrete(const std::vector<double> &weights, Rng &rng)
{
    double total = 0.0;
    for (double w : weights)
        total += w;
    if (!(total > 0.0))
        throw NotFoundError("sample_discrete: no probability mass");
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        if (weights[i] <= 0.0)
            continue;
        last_positive = i;
        acc += weights[i];
        if (u < acc)
            return i;
    }
    return last_positive;
}

} // namespace mmbeam

#endif
