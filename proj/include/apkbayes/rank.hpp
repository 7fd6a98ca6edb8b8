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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apkbayes/catalog.hpp"
#include "apkbayes/profile.hpp"

namespace apkbayes {

/// 2x2 contingency table of one binary feature against the class label.
/// n11 present & suspicious, n10 present & benign,
/// n01 absent & suspicious,  n00 absent & benign.
struct Contingency {
    std::uint64_t n11 = 0;
    std::uint64_t n10 = 0;
    std::uint64_t n01 = 0;
    std::uint64_t n00 = 0;

    std::uint64_t suspicious() const noexcept { return n11 + n01; }
    std::uint64_t benign() const noexcept { return n10 + n00; }
    std::uint64_t total() const noexcept { return n11 + n10 + n01 + n00; }

    friend bool operator==(const Contingency&, const Contingency&) = default;
};

struct FeatureTally {
    std::string id;
    Contingency counts;
};

struct FeatureCounts {
    std::vector<FeatureTally> features;  // catalog order
    std::uint64_t suspicious_total = 0;
    std::uint64_t benign_total = 0;

    FeatureCounts& operator+=(const FeatureCounts& other);
};

/// Exact contingency counts. Error{EmptyCorpus} on no profiles,
/// Error{UnlabeledSample} if any profile is unlabeled, Error{LengthMismatch}
/// if a profile's bits do not match the catalog length.
FeatureCounts tally(std::span<const AppProfile> profiles, const FeatureCatalog& catalog);

/// Plug-in mutual information between the feature and the class, in bits.
/// Terms with a zero joint count contribute nothing, so degenerate tables
/// score 0.
double mutual_information(const Contingency& counts);

struct RankedFeature {
    std::string id;
    double mi = 0;
    Contingency counts;
};

/// Scores every feature, orders by descending MI with ties broken by
/// ascending id, and returns the first k. With `drop_unobserved`, features
/// that never fired in either class are removed before selection (k is then
/// capped at what remains). Error{BadK} unless 1 <= k <= feature count.
std::vector<RankedFeature> rank_and_select(const FeatureCounts& counts, std::size_t k,
                                           bool drop_unobserved = false);

}  // namespace apkbayes
