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

#include "apkbayes/eval.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <mutex>
#include <numeric>

#include "apkbayes/bayes.hpp"
#include "apkbayes/error.hpp"
#include "apkbayes/random.hpp"
#include "apkbayes/rank.hpp"

namespace apkbayes {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den)
{
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::size_t a, std::size_t b)
{
    if (a != b) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(a) + " scores/predictions vs " + std::to_string(b) + " truths");
    }
}

std::optional<double> mean_of(const std::vector<EvalReport>& folds,
                              std::optional<double> EvalReport::*field)
{
    double sum = 0;
    std::size_t n = 0;
    for (const auto& f : folds) {
        if (f.*field) {
            sum += *(f.*field);
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o)
{
    n_bb += o.n_bb;
    n_bs += o.n_bs;
    n_sb += o.n_sb;
    n_ss += o.n_ss;
    return *this;
}

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths)
{
    check_lengths(predictions.size(), truths.size());
    if (truths.empty()) {
        throw Error(ErrorKind::Empty, "no samples");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] == Label::Unlabeled || predictions[i] == Label::Unlabeled) {
            throw Error(ErrorKind::UnlabeledSample, "sample " + std::to_string(i) + " is unlabeled");
        }
        bool truth_sus = truths[i] == Label::Suspicious;
        bool pred_sus = predictions[i] == Label::Suspicious;
        if (truth_sus) {
            (pred_sus ? c.n_ss : c.n_sb) += 1;
        } else {
            (pred_sus ? c.n_bs : c.n_bb) += 1;
        }
    }
    return c;
}

EvalReport metrics(const ConfusionCounts& c)
{
    if (c.total() == 0) {
        throw Error(ErrorKind::Empty, "empty confusion table");
    }
    EvalReport r;
    r.counts = c;
    r.acc = ratio(c.n_bb + c.n_ss, c.total());
    r.err = ratio(c.n_bs + c.n_sb, c.total());
    r.fpr = ratio(c.n_bs, c.n_bs + c.n_bb);
    r.fnr = ratio(c.n_sb, c.n_ss + c.n_sb);
    r.tpr = ratio(c.n_ss, c.n_sb + c.n_ss);
    r.tnr = ratio(c.n_bb, c.n_bs + c.n_bb);
    r.precision = ratio(c.n_ss, c.n_bs + c.n_ss);
    return r;
}

double roc_auc(std::span<const double> scores, std::span<const Label> truths)
{
    check_lengths(scores.size(), truths.size());
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of midranks of the suspicious samples.
    double rank_sum = 0;
    std::uint64_t n_sus = 0;
    std::uint64_t n_ben = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            switch (truths[order[t]]) {
            case Label::Suspicious:
                rank_sum += midrank;
                ++n_sus;
                break;
            case Label::Benign:
                ++n_ben;
                break;
            case Label::Unlabeled:
                throw Error(ErrorKind::UnlabeledSample, "unlabeled sample in ROC input");
            }
        }
        i = j;
    }
    if (n_sus == 0 || n_ben == 0) {
        throw Error(ErrorKind::OneClassOnly, "ROC needs both classes (suspicious="
                                                 + std::to_string(n_sus)
                                                 + ", benign=" + std::to_string(n_ben) + ")");
    }
    double s = static_cast<double>(n_sus);
    double u = rank_sum - s * (s + 1) / 2.0;
    return u / (s * static_cast<double>(n_ben));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> truths)
{
    check_lengths(scores.size(), truths.size());
    std::uint64_t n_sus = std::count(truths.begin(), truths.end(), Label::Suspicious);
    std::uint64_t n_ben = std::count(truths.begin(), truths.end(), Label::Benign);
    if (n_sus == 0 || n_ben == 0) {
        throw Error(ErrorKind::OneClassOnly, "ROC needs both classes");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (truths[order[i]] == Label::Suspicious ? tp : fp) += 1;
            ++i;
        }
        points.push_back({static_cast<double>(fp) / static_cast<double>(n_ben),
                          static_cast<double>(tp) / static_cast<double>(n_sus), threshold});
    }
    return points;
}

std::vector<Fold> kfold_split(std::span<const Label> labels, std::size_t k, std::uint64_t seed)
{
    if (k < 2) {
        throw Error(ErrorKind::BadK, "need at least 2 folds, got " + std::to_string(k));
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Label::Unlabeled) {
            throw Error(ErrorKind::UnlabeledSample, "sample " + std::to_string(i) + " is unlabeled");
        }
        by_class[labels[i] == Label::Suspicious ? 1 : 0].push_back(i);
    }
    for (const auto& members : by_class) {
        if (members.size() < k) {
            throw Error(ErrorKind::BadK, std::to_string(k) + " folds but a class has only "
                                             + std::to_string(members.size()) + " members");
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> fold_of(labels.size());
    for (auto& members : by_class) {
        shuffle(members, rng);
        for (std::size_t j = 0; j < members.size(); ++j) {
            fold_of[members[j]] = j % k;
        }
    }
    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t f = 0; f < k; ++f) {
            (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
        }
    }
    return folds;
}

std::vector<Fold> kfold_split(std::span<const AppProfile> profiles, std::size_t k,
                              std::uint64_t seed)
{
    std::vector<Label> labels;
    labels.reserve(profiles.size());
    for (const auto& p : profiles) {
        labels.push_back(p.label);
    }
    return kfold_split(labels, k, seed);
}

std::string FeatureSpec::label() const
{
    switch (kind) {
    case Kind::TopK: return std::to_string(last_rank) + "f";
    case Kind::RankRange:
        return "r" + std::to_string(first_rank) + "-" + std::to_string(last_rank);
    case Kind::Explicit: return "custom(" + std::to_string(ids.size()) + ")";
    }
    return "?";
}

std::vector<std::string> select_features(std::span<const AppProfile> training,
                                         const FeatureCatalog& catalog, const FeatureSpec& spec,
                                         bool drop_unobserved)
{
    if (spec.kind == FeatureSpec::Kind::Explicit) {
        if (spec.ids.empty()) {
            throw Error(ErrorKind::EmptyFeatureSet, "explicit feature list is empty");
        }
        for (const auto& id : spec.ids) {
            if (!catalog.index_of(id)) {
                throw Error(ErrorKind::BadCatalog, "unknown feature id '" + id + "'");
            }
        }
        return spec.ids;
    }
    if (spec.first_rank < 1 || spec.first_rank > spec.last_rank
        || spec.last_rank > catalog.size()) {
        throw Error(ErrorKind::BadK, "ranks " + std::to_string(spec.first_rank) + ".."
                                         + std::to_string(spec.last_rank) + " outside [1, "
                                         + std::to_string(catalog.size()) + "]");
    }
    auto ranked = rank_and_select(tally(training, catalog), spec.last_rank, drop_unobserved);
    std::vector<std::string> ids;
    for (std::size_t r = spec.first_rank - 1; r < ranked.size(); ++r) {
        ids.push_back(ranked[r].id);
    }
    if (ids.empty()) {
        throw Error(ErrorKind::EmptyFeatureSet, "no observed features at the requested ranks");
    }
    return ids;
}

CvResult evaluate_cv(std::span<const AppProfile> profiles, const FeatureCatalog& catalog,
                     const CvOptions& options)
{
    auto folds = kfold_split(profiles, options.folds, options.seed);

    std::optional<std::vector<std::string>> global_selection;
    if (options.global_ranking) {
        global_selection = select_features(profiles, catalog, options.spec, options.drop_unobserved);
    }

    struct FoldOutcome {
        EvalReport report;
        std::vector<ScoredSample> scored;
    };
    std::mutex hook_mutex;

    auto run_fold = [&](std::size_t f) {
        const auto& split = folds[f];
        std::vector<AppProfile> train_set;
        train_set.reserve(split.train.size());
        for (auto i : split.train) {
            train_set.push_back(profiles[i]);
        }
        auto selected = global_selection
            ? *global_selection
            : select_features(train_set, catalog, options.spec, options.drop_unobserved);
        if (options.on_fold_selection) {
            std::lock_guard lock(hook_mutex);
            options.on_fold_selection({f, split, selected});
        }
        auto model = train(train_set, catalog, selected, options.alpha);

        FoldOutcome out;
        std::vector<Label> predicted;
        std::vector<Label> truths;
        std::vector<double> scores;
        for (auto i : split.test) {
            auto verdict = classify(model, project(model, catalog, profiles[i].bits));
            predicted.push_back(verdict.label);
            truths.push_back(profiles[i].label);
            scores.push_back(verdict.posterior_suspicious);
            out.scored.push_back({i, verdict.posterior_suspicious, profiles[i].label, verdict.label});
        }
        out.report = metrics(confusion(predicted, truths));
        out.report.auc = roc_auc(scores, truths);
        out.report.selected_features = std::move(selected);
        return out;
    };

    std::vector<std::future<FoldOutcome>> pending;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        pending.push_back(std::async(std::launch::async, run_fold, f));
    }

    CvResult result;
    ConfusionCounts total;
    for (auto& p : pending) {
        auto outcome = p.get();
        total += outcome.report.counts;
        result.scored.insert(result.scored.end(), outcome.scored.begin(), outcome.scored.end());
        result.report.fold_reports.push_back(std::move(outcome.report));
    }

    auto& report = result.report;
    if (options.pooled) {
        auto pooled = metrics(total);
        std::vector<double> scores;
        std::vector<Label> truths;
        for (const auto& s : result.scored) {
            scores.push_back(s.score);
            truths.push_back(s.truth);
        }
        pooled.auc = roc_auc(scores, truths);
        pooled.fold_reports = std::move(report.fold_reports);
        report = std::move(pooled);
    } else {
        for (auto field : {&EvalReport::err, &EvalReport::acc, &EvalReport::tnr, &EvalReport::fpr,
                           &EvalReport::tpr, &EvalReport::fnr, &EvalReport::precision,
                           &EvalReport::auc}) {
            report.*field = mean_of(report.fold_reports, field);
        }
    }
    report.counts = total;
    if (global_selection) {
        report.selected_features = *global_selection;
    }
    return result;
}

}  // namespace apkbayes
