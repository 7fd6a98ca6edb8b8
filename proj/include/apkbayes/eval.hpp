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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apkbayes/catalog.hpp"
#include "apkbayes/profile.hpp"

namespace apkbayes {

/// n_xy counts samples whose truth is x and prediction is y
/// (b = benign, s = suspicious).
struct ConfusionCounts {
    std::uint64_t n_bb = 0;
    std::uint64_t n_bs = 0;
    std::uint64_t n_sb = 0;
    std::uint64_t n_ss = 0;

    std::uint64_t total() const noexcept { return n_bb + n_bs + n_sb + n_ss; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Rates are absent (not zero) whenever their denominator is zero.
struct EvalReport {
    std::optional<double> err;
    std::optional<double> acc;
    std::optional<double> tnr;
    std::optional<double> fpr;
    std::optional<double> tpr;
    std::optional<double> fnr;
    std::optional<double> precision;
    std::optional<double> auc;
    ConfusionCounts counts;

    std::vector<std::string> selected_features;  // per fold, or for a single fit
    std::vector<EvalReport> fold_reports;
};

/// Error{LengthMismatch}, Error{Empty}. Unlabeled entries are rejected
/// with Error{UnlabeledSample}.
ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths);

/// Accuracy, error and the four class rates plus precision; auc unset.
/// Error{Empty} for an all-zero table.
EvalReport metrics(const ConfusionCounts& counts);

/// Normalized Mann-Whitney statistic: the probability that a random
/// suspicious score exceeds a random benign one, ties counting one half.
/// Error{OneClassOnly}, Error{LengthMismatch}.
double roc_auc(std::span<const double> scores, std::span<const Label> truths);

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;  // predict suspicious when score >= threshold
};

/// One point per distinct score (descending), starting at (0, 0, +inf).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> truths);

struct Fold {
    std::vector<std::size_t> train;  // ascending indices
    std::vector<std::size_t> test;
};

/// Stratified k-fold partition of sample indices: each class is shuffled
/// with the seed and dealt round-robin across folds. Error{BadK} when
/// k < 2 or some class has fewer than k members.
std::vector<Fold> kfold_split(std::span<const Label> labels, std::size_t k, std::uint64_t seed);
std::vector<Fold> kfold_split(std::span<const AppProfile> profiles, std::size_t k,
                              std::uint64_t seed);

/// Which features a fold's classifier uses.
struct FeatureSpec {
    enum class Kind { TopK, RankRange, Explicit };

    Kind kind = Kind::TopK;
    std::size_t first_rank = 1;  // 1-based, inclusive
    std::size_t last_rank = 20;
    std::vector<std::string> ids;

    static FeatureSpec top(std::size_t k) { return {Kind::TopK, 1, k, {}}; }
    static FeatureSpec ranks(std::size_t first, std::size_t last)
    {
        return {Kind::RankRange, first, last, {}};
    }
    static FeatureSpec explicit_ids(std::vector<std::string> ids)
    {
        return {Kind::Explicit, 0, 0, std::move(ids)};
    }

    /// Row label in reports: "20f", "r16-20", "custom(3)".
    std::string label() const;
};

/// Selected ids for `spec` given MI-ranked candidates computed on some
/// training portion. Error{BadK} for ranks outside the catalog.
std::vector<std::string> select_features(std::span<const AppProfile> training,
                                         const FeatureCatalog& catalog, const FeatureSpec& spec,
                                         bool drop_unobserved = false);

struct FoldSelection {
    std::size_t fold;
    const Fold& split;
    const std::vector<std::string>& selected;
};

struct CvOptions {
    std::size_t folds = 5;
    FeatureSpec spec = FeatureSpec::top(20);
    double alpha = 1.0;
    std::uint64_t seed = 0;
    bool global_ranking = false;   // rank once on the full corpus before splitting
    bool pooled = false;           // metrics from summed confusion instead of fold means
    bool drop_unobserved = false;  // discard features that never fired before ranking
    std::function<void(const FoldSelection&)> on_fold_selection;
};

struct ScoredSample {
    std::size_t index;
    double score;  // posterior P(suspicious | r)
    Label truth;
    Label predicted;
};

struct CvResult {
    EvalReport report;
    std::vector<ScoredSample> scored;  // every test sample, in fold order
};

/// Stratified k-fold evaluation. Per fold: rank features on the training
/// portion only (unless global_ranking), train, classify the test portion.
/// The report carries fold means (or pooled metrics), summed confusion and
/// per-fold reports.
CvResult evaluate_cv(std::span<const AppProfile> profiles, const FeatureCatalog& catalog,
                     const CvOptions& options);

}  // namespace apkbayes
