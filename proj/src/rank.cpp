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

#include "apkbayes/rank.hpp"

#include <algorithm>
#include <cmath>

#include "apkbayes/error.hpp"

namespace apkbayes {

FeatureCounts& FeatureCounts::operator+=(const FeatureCounts& other)
{
    if (features.empty()) {
        features = other.features;
    } else {
        if (features.size() != other.features.size()) {
            throw std::logic_error("merging tallies over different catalogs");
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
            auto& c = features[i].counts;
            const auto& o = other.features[i].counts;
            c.n11 += o.n11;
            c.n10 += o.n10;
            c.n01 += o.n01;
            c.n00 += o.n00;
        }
    }
    suspicious_total += other.suspicious_total;
    benign_total += other.benign_total;
    return *this;
}

FeatureCounts tally(std::span<const AppProfile> profiles, const FeatureCatalog& catalog)
{
    if (profiles.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "no profiles to tally");
    }
    FeatureCounts out;
    out.features.reserve(catalog.size());
    for (const auto& f : catalog.features) {
        out.features.push_back({f.id, {}});
    }
    for (const auto& p : profiles) {
        if (p.label == Label::Unlabeled) {
            throw Error(ErrorKind::UnlabeledSample, "'" + p.source_id + "' has no label");
        }
        if (p.bits.size() != catalog.size()) {
            throw Error(ErrorKind::LengthMismatch,
                        "'" + p.source_id + "' has " + std::to_string(p.bits.size())
                            + " bits, catalog has " + std::to_string(catalog.size()));
        }
        bool suspicious = p.label == Label::Suspicious;
        (suspicious ? out.suspicious_total : out.benign_total) += 1;
        for (std::size_t i = 0; i < p.bits.size(); ++i) {
            auto& c = out.features[i].counts;
            if (p.bits[i]) {
                (suspicious ? c.n11 : c.n10) += 1;
            } else {
                (suspicious ? c.n01 : c.n00) += 1;
            }
        }
    }
    return out;
}

double mutual_information(const Contingency& counts)
{
    const double n = static_cast<double>(counts.total());
    if (n == 0) {
        return 0;
    }
    const double present = static_cast<double>(counts.n11 + counts.n10);
    const double absent = static_cast<double>(counts.n01 + counts.n00);
    const double sus = static_cast<double>(counts.suspicious());
    const double ben = static_cast<double>(counts.benign());

    auto term = [n](double joint, double row, double col) {
        if (joint == 0) {
            return 0.0;
        }
        return joint / n * std::log2(joint * n / (row * col));
    };
    double mi = term(static_cast<double>(counts.n11), present, sus)
        + term(static_cast<double>(counts.n10), present, ben)
        + term(static_cast<double>(counts.n01), absent, sus)
        + term(static_cast<double>(counts.n00), absent, ben);
    // Rounding can leave a hair below zero for independent tables.
    return std::max(mi, 0.0);
}

std::vector<RankedFeature> rank_and_select(const FeatureCounts& counts, std::size_t k,
                                           bool drop_unobserved)
{
    if (k < 1 || k > counts.features.size()) {
        throw Error(ErrorKind::BadK, "k=" + std::to_string(k) + " outside [1, "
                                         + std::to_string(counts.features.size()) + "]");
    }
    std::vector<RankedFeature> ranked;
    ranked.reserve(counts.features.size());
    for (const auto& f : counts.features) {
        if (drop_unobserved && f.counts.n11 + f.counts.n10 == 0) {
            continue;
        }
        ranked.push_back({f.id, mutual_information(f.counts), f.counts});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.mi != b.mi) {
            return a.mi > b.mi;
        }
        return a.id < b.id;
    });
    ranked.resize(std::min(k, ranked.size()));
    return ranked;
}

}  // namespace apkbayes
