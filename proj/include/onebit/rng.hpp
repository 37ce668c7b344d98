// SPDX-License-Identifier: Apache-2.0
//
// onebit-mmse: MMSE channel estimation for one-bit quantized MIMO systems
// Copyright (C) 2026 The onebit-mmse authors
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

// Seed derivation and complex Gaussian sampling. Streams are derived from
// (master seed, index) pairs so results never depend on thread scheduling.

#pragma once

#include "onebit/numerics.hpp"

#include <cstdint>
#include <random>

namespace onebit
{

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent child seed for stream `index` of `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index)
{
    return Rng(derive_seed(master, index));
}

/// n i.i.d. CN(0,1) entries: real and imaginary parts each N(0, 1/2).
inline ComplexVector standard_cn(Index n, Rng &rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexVector w(n);
    for (Index i = 0; i < n; ++i)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        w(i) = cdouble(re, im);
    }
    return w;
}

} // namespace onebit
