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

#include "apkbayes/bayes.hpp"

#include <cmath>
#include <limits>

#include "apkbayes/error.hpp"
#include "apkbayes/text.hpp"

namespace apkbayes {

namespace {

constexpr std::string_view kModelMagic = "apkbayes-model";
constexpr int kModelFormatVersion = 1;

[[noreturn]] void bad_model(const std::string& what)
{
    throw Error(ErrorKind::BadModel, what);
}

void validate(const BayesModel& m)
{
    auto in_open_unit = [](double p) { return p > 0 && p < 1; };
    if (!(m.prior_suspicious > 0) || !(m.prior_benign > 0)
        || std::abs(m.prior_suspicious + m.prior_benign - 1) > 1e-9) {
        bad_model("priors must be positive and sum to 1 (got "
                  + format_double(m.prior_suspicious) + " + " + format_double(m.prior_benign) + ")");
    }
    if (!(m.alpha >= 0) || !std::isfinite(m.alpha)) {
        bad_model("alpha must be a finite nonnegative number");
    }
    if (m.likelihood.size() != m.selected_features.size()) {
        bad_model("likelihood rows do not match the selected features");
    }
    for (std::size_t i = 0; i < m.likelihood.size(); ++i) {
        for (double p : {m.likelihood[i].benign, m.likelihood[i].suspicious}) {
            bool ok = m.alpha > 0 ? in_open_unit(p) : (p >= 0 && p <= 1);
            if (!ok) {
                bad_model("likelihood for '" + m.selected_features[i] + "' out of range: "
                          + format_double(p));
            }
        }
    }
}

// ln P(r_i | c) for a Bernoulli likelihood p = P(R_i = 1 | c).
double log_bernoulli(double p, bool bit)
{
    return bit ? std::log(p) : std::log1p(-p);
}

struct JointLogs {
    double suspicious;
    double benign;
};

JointLogs joint_logs(const BayesModel& model, const FeatureBits& bits)
{
    if (bits.size() != model.size()) {
        throw Error(ErrorKind::LengthMismatch, "vector has " + std::to_string(bits.size())
                                                   + " bits, model uses "
                                                   + std::to_string(model.size()) + " features");
    }
    JointLogs j{std::log(model.prior_suspicious), std::log(model.prior_benign)};
    for (std::size_t i = 0; i < bits.size(); ++i) {
        j.suspicious += log_bernoulli(model.likelihood[i].suspicious, bits[i]);
        j.benign += log_bernoulli(model.likelihood[i].benign, bits[i]);
    }
    return j;
}

double posterior_from_logs(const JointLogs& j)
{
    if (j.suspicious == j.benign) {
        // Includes the both-impossible case (-inf, -inf).
        return 0.5;
    }
    return 1.0 / (1.0 + std::exp(j.benign - j.suspicious));
}

}  // namespace

BayesModel train(std::span<const AppProfile> profiles, const FeatureCatalog& catalog,
                 std::span<const std::string> selected, double alpha)
{
    if (selected.empty()) {
        throw Error(ErrorKind::EmptyFeatureSet, "no features selected");
    }
    if (!(alpha >= 0) || !std::isfinite(alpha)) {
        bad_model("alpha must be a finite nonnegative number");
    }
    std::vector<std::size_t> columns;
    for (const auto& id : selected) {
        auto idx = catalog.index_of(id);
        if (!idx) {
            bad_model("feature '" + id + "' is not in catalog " + catalog.version);
        }
        columns.push_back(*idx);
    }

    std::uint64_t n_sus = 0;
    std::uint64_t n_ben = 0;
    std::vector<std::uint64_t> hits_sus(columns.size());
    std::vector<std::uint64_t> hits_ben(columns.size());
    for (const auto& p : profiles) {
        if (p.label == Label::Unlabeled) {
            throw Error(ErrorKind::UnlabeledSample, "'" + p.source_id + "' has no label");
        }
        if (p.bits.size() != catalog.size()) {
            throw Error(ErrorKind::LengthMismatch, "'" + p.source_id + "' is not aligned to the catalog");
        }
        bool sus = p.label == Label::Suspicious;
        (sus ? n_sus : n_ben) += 1;
        auto& hits = sus ? hits_sus : hits_ben;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (p.bits[columns[j]]) {
                ++hits[j];
            }
        }
    }
    if (n_sus == 0 || n_ben == 0) {
        throw Error(ErrorKind::MissingClass, "training needs both classes (suspicious="
                                                 + std::to_string(n_sus) + ", benign="
                                                 + std::to_string(n_ben) + ")");
    }

    BayesModel model;
    model.selected_features.assign(selected.begin(), selected.end());
    model.alpha = alpha;
    model.catalog_version = catalog.version;
    const double total = static_cast<double>(n_sus + n_ben);
    model.prior_suspicious = static_cast<double>(n_sus) / total;
    model.prior_benign = static_cast<double>(n_ben) / total;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        model.likelihood.push_back({
            (static_cast<double>(hits_ben[j]) + alpha) / (static_cast<double>(n_ben) + 2 * alpha),
            (static_cast<double>(hits_sus[j]) + alpha) / (static_cast<double>(n_sus) + 2 * alpha),
        });
    }
    return model;
}

FeatureBits project(const BayesModel& model, const FeatureCatalog& catalog,
                    const FeatureBits& catalog_bits)
{
    if (catalog_bits.size() != catalog.size()) {
        throw Error(ErrorKind::LengthMismatch, "vector is not aligned to the catalog");
    }
    FeatureBits out;
    out.reserve(model.size());
    for (const auto& id : model.selected_features) {
        auto idx = catalog.index_of(id);
        if (!idx) {
            bad_model("feature '" + id + "' is not in catalog " + catalog.version);
        }
        out.push_back(catalog_bits[*idx]);
    }
    return out;
}

double posterior(const BayesModel& model, const FeatureBits& bits)
{
    return posterior_from_logs(joint_logs(model, bits));
}

Verdict classify(const BayesModel& model, const FeatureBits& bits)
{
    auto j = joint_logs(model, bits);
    Verdict v;
    v.posterior_suspicious = posterior_from_logs(j);
    v.log_odds = j.suspicious == j.benign ? 0.0 : j.suspicious - j.benign;
    // Decided on the rounded posterior so that label and posterior never
    // disagree when the log joints differ by less than an ulp.
    v.label = v.posterior_suspicious >= 0.5 ? Label::Suspicious : Label::Benign;
    return v;
}

std::string save_model(const BayesModel& model)
{
    validate(model);
    std::string out;
    out += std::string(kModelMagic) + "\t" + std::to_string(kModelFormatVersion) + "\n";
    out += "catalog_version\t" + escape_field(model.catalog_version) + "\n";
    out += "alpha\t" + format_double(model.alpha) + "\n";
    out += "prior_suspicious\t" + format_double(model.prior_suspicious) + "\n";
    out += "prior_benign\t" + format_double(model.prior_benign) + "\n";
    out += "features\t" + std::to_string(model.size()) + "\n";
    out += "# id\tP(present|benign)\tP(present|suspicious)\n";
    for (std::size_t i = 0; i < model.size(); ++i) {
        out += escape_field(model.selected_features[i]) + "\t"
            + format_double(model.likelihood[i].benign) + "\t"
            + format_double(model.likelihood[i].suspicious) + "\n";
    }
    return out;
}

BayesModel load_model(std::string_view text)
{
    std::vector<std::string_view> lines;
    for (auto line : split_lines(text)) {
        if (!line.empty() && line.front() != '#') {
            lines.push_back(line);
        }
    }
    std::size_t at = 0;
    auto field = [&](std::string_view key) -> std::string_view {
        if (at >= lines.size()) {
            bad_model("missing '" + std::string(key) + "' line");
        }
        auto parts = split(lines[at++], '\t');
        if (parts.size() != 2 || parts[0] != key) {
            bad_model("expected '" + std::string(key) + "' on line " + std::to_string(at));
        }
        return parts[1];
    };
    auto number = [&](std::string_view key) {
        auto v = parse_double(field(key));
        if (!v) {
            bad_model("'" + std::string(key) + "' is not a number");
        }
        return *v;
    };

    auto version = field(kModelMagic);
    if (version != std::to_string(kModelFormatVersion)) {
        bad_model("unsupported model format version '" + std::string(version) + "'");
    }
    BayesModel m;
    auto catalog_version = unescape_field(field("catalog_version"));
    if (!catalog_version) {
        bad_model("bad catalog_version escape");
    }
    m.catalog_version = *catalog_version;
    m.alpha = number("alpha");
    m.prior_suspicious = number("prior_suspicious");
    m.prior_benign = number("prior_benign");
    auto n = parse_uint(field("features"));
    if (!n) {
        bad_model("'features' is not a count");
    }
    if (lines.size() - at != *n) {
        bad_model("declared " + std::to_string(*n) + " features, found "
                  + std::to_string(lines.size() - at));
    }
    for (; at < lines.size(); ++at) {
        auto parts = split(lines[at], '\t');
        auto id = parts.size() == 3 ? unescape_field(parts[0]) : std::nullopt;
        auto pb = parts.size() == 3 ? parse_double(parts[1]) : std::nullopt;
        auto ps = parts.size() == 3 ? parse_double(parts[2]) : std::nullopt;
        if (!id || !pb || !ps) {
            bad_model("malformed feature row " + std::to_string(at + 1));
        }
        m.selected_features.push_back(*id);
        m.likelihood.push_back({*pb, *ps});
    }
    validate(m);
    return m;
}

void check_model_catalog(const BayesModel& model, const FeatureCatalog& catalog)
{
    for (const auto& id : model.selected_features) {
        if (!catalog.index_of(id)) {
            bad_model("model feature '" + id + "' is absent from catalog " + catalog.version);
        }
    }
}

BayesModel load_model(std::string_view text, const FeatureCatalog& catalog)
{
    auto m = load_model(text);
    check_model_catalog(m, catalog);
    return m;
}

}  // namespace apkbayes
