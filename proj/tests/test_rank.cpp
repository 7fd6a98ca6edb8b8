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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "apkbayes/catalog.hpp"
#include "apkbayes/corpus.hpp"
#include "apkbayes/error.hpp"
#include "apkbayes/rank.hpp"
#include "support/oracles.hpp"

using namespace apkbayes;

namespace {

FeatureCatalog tiny_catalog(std::size_t n)
{
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        text += "f" + std::to_string(i) + "\tCommand\tp" + std::to_string(i) + "\n";
    }
    return load_catalog(text);
}

AppProfile labeled(Label l, FeatureBits bits)
{
    return {"x", l, std::nullopt, std::move(bits), {}};
}

}  // namespace

TEST_CASE("tally counts")
{
    auto cat = tiny_catalog(2);
    std::vector<AppProfile> ps{labeled(Label::Suspicious, {true, false}),
                               labeled(Label::Suspicious, {true, true}),
                               labeled(Label::Benign, {false, true})};
    auto c = tally(ps, cat);
    CHECK(c.features[0].counts == Contingency{2, 0, 0, 1});
    CHECK(c.features[1].counts == Contingency{1, 1, 1, 0});
    CHECK(c.suspicious_total == 2);
    CHECK(c.benign_total == 1);

    ps.push_back(labeled(Label::Unlabeled, {false, false}));
    CHECK_THROWS_AS(tally(ps, cat), Error);
    CHECK_THROWS_AS(tally(std::vector<AppProfile>{}, cat), Error);
    CHECK_THROWS_AS(tally(std::vector<AppProfile>{labeled(Label::Benign, {true})}, cat), Error);
}

TEST_CASE("mutual information cases")
{
    CHECK(mutual_information({30, 30, 70, 70}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mutual_information({100, 0, 0, 100}) == doctest::Approx(1.0));
    Contingency table2{742, 42, 258, 958};
    CHECK(std::abs(mutual_information(table2) - static_cast<double>(testsupport::mi_oracle(742, 42, 258, 958))) < 1e-12);
    CHECK(mutual_information({0, 0, 10, 10}) == 0.0);
}

TEST_CASE("mutual information properties")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        Contingency c{rng() % 50, rng() % 50, rng() % 50 + 1, rng() % 50 + 1};
        double mi = mutual_information(c);
        CHECK(mi >= 0);
        CHECK(mi <= 1 + 1e-12);
        Contingency swapped{c.n00, c.n01, c.n10, c.n11};
        CHECK(std::abs(mi - mutual_information(swapped)) < 1e-12);
        CHECK(std::abs(mi - static_cast<double>(testsupport::mi_oracle(c.n11, c.n10, c.n01, c.n00))) < 1e-12);
    }
}

TEST_CASE("ranking order, ties and bounds")
{
    FeatureCounts counts;
    counts.suspicious_total = 10;
    counts.benign_total = 10;
    counts.features = {{"b", {5, 5, 5, 5}}, {"a", {5, 5, 5, 5}}, {"c", {10, 0, 0, 10}}, {"z", {0, 0, 10, 10}}};
    auto all = rank_and_select(counts, 4);
    REQUIRE(all.size() == 4);
    CHECK(all[0].id == "c");
    CHECK(all[1].id == "a");
    CHECK(all[2].id == "b");
    CHECK(all[3].id == "z");
    CHECK(rank_and_select(counts, 1).size() == 1);
    CHECK_THROWS_AS(rank_and_select(counts, 0), Error);
    CHECK_THROWS_AS(rank_and_select(counts, 5), Error);
    auto observed = rank_and_select(counts, 4, true);
    CHECK(observed.size() == 3);
    CHECK(std::none_of(observed.begin(), observed.end(), [](const auto& f) { return f.id == "z"; }));
}

TEST_CASE("synthetic corpus counts and top five")
{
    auto cat = default_catalog();
    auto store = synth_generate(default_marginals(), cat, 1000, 1000, 42);
    auto counts = tally(store.profiles, cat);
    const auto& sub = counts.features[0].counts;
    // 99.9% two-sided binomial bands around 742 and 42.
    CHECK(std::abs(static_cast<double>(sub.n11) - 742) < 3.29 * std::sqrt(1000 * 0.742 * 0.258));
    CHECK(std::abs(static_cast<double>(sub.n10) - 42) < 3.29 * std::sqrt(1000 * 0.042 * 0.958));

    std::vector<std::pair<long double, std::string>> oracle;
    for (const auto& f : counts.features) {
        oracle.push_back({-testsupport::mi_oracle(f.counts.n11, f.counts.n10, f.counts.n01, f.counts.n00), f.id});
    }
    std::sort(oracle.begin(), oracle.end());
    auto top = rank_and_select(counts, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(top[i].id == oracle[i].second);
    }
    CHECK(rank_and_select(counts, 25).size() == 25);
}
