/*
 * Copyright (C) 2026 The apkbayes Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// std::mt19937_64 output is fully specified by the standard, but the
// distributions and std::shuffle are not. These draw directly from the
// engine so seeded runs agree across standard libraries.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace apkbayes {

using Rng = std::mt19937_64;

/// Uniform integer in [0, n), n > 0, by rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n)
{
    const std::uint64_t limit = Rng::max() - (Rng::max() % n);
    for (;;) {
        auto x = rng();
        if (x < limit) {
            return x % n;
        }
    }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_below(rng, i)]);
    }
}

}  // namespace apkbayes
