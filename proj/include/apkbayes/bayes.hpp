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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apkbayes/catalog.hpp"
#include "apkbayes/profile.hpp"

namespace apkbayes {

/// P(R_i = 1 | C = c) for one selected feature.
struct FeatureLikelihood {
    double benign = 0.5;
    double suspicious = 0.5;

    friend bool operator==(const FeatureLikelihood&, const FeatureLikelihood&) = default;
};

/// Bernoulli naive-Bayes model over an ordered subset of catalog features.
struct BayesModel {
    std::vector<std::string> selected_features;
    double prior_suspicious = 0.5;
    double prior_benign = 0.5;
    std::vector<FeatureLikelihood> likelihood;  // parallel to selected_features
    double alpha = 1.0;
    std::string catalog_version;

    std::size_t size() const noexcept { return selected_features.size(); }

    friend bool operator==(const BayesModel&, const BayesModel&) = default;
};

struct Verdict {
    Label label = Label::Suspicious;
    double posterior_suspicious = 0.5;
    double log_odds = 0;  // ln P(sus, r) - ln P(ben, r)
};

/// Priors are class frequencies; likelihoods are
/// (count(R_i = 1, c) + alpha) / (N_c + 2 alpha).
/// Error{MissingClass} unless both classes are present,
/// Error{EmptyFeatureSet} for no selected features, Error{BadModel} for an
/// id missing from the catalog or a negative alpha.
BayesModel train(std::span<const AppProfile> profiles, const FeatureCatalog& catalog,
                 std::span<const std::string> selected, double alpha = 1.0);

/// Projects catalog-aligned bits onto the model's selected features.
FeatureBits project(const BayesModel& model, const FeatureCatalog& catalog,
                    const FeatureBits& catalog_bits);

/// P(C = suspicious | r), accumulated in log space and renormalized over
/// the two classes. Error{LengthMismatch} if bits.size() != model.size().
double posterior(const BayesModel& model, const FeatureBits& bits);

/// Benign only when P(benign | r) > P(suspicious | r); ties go to
/// Suspicious.
Verdict classify(const BayesModel& model, const FeatureBits& bits);

/// Versioned text serialization; doubles are written in shortest
/// round-trip form so save/load is lossless.
std::string save_model(const BayesModel& model);

/// Error{BadModel} on a malformed document, a format version mismatch or
/// an invariant violation (priors outside (0,1) or not summing to 1,
/// likelihoods outside [0,1], or outside (0,1) when alpha > 0).
BayesModel load_model(std::string_view text);

/// load_model plus a check that every selected feature exists in `catalog`;
/// the offending id is named in the Error{BadModel} message.
BayesModel load_model(std::string_view text, const FeatureCatalog& catalog);
void check_model_catalog(const BayesModel& model, const FeatureCatalog& catalog);

}  // namespace apkbayes
