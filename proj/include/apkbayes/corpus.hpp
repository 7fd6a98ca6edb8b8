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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apkbayes/catalog.hpp"
#include "apkbayes/profile.hpp"

namespace apkbayes {

struct CorpusRecord {
    std::string id;  // package path, resolved against the manifest's directory
    Label label = Label::Unlabeled;
    std::optional<std::string> family;
};

struct CorpusManifest {
    std::vector<CorpusRecord> records;
};

/// CSV with header `id,label,family`; labels are "benign" or "suspicious".
/// Error{BadStore} on a malformed file or duplicate id.
CorpusManifest parse_corpus_manifest(std::string_view text);

struct ProfileStore {
    std::string catalog_version;
    std::vector<AppProfile> profiles;

    friend bool operator==(const ProfileStore&, const ProfileStore&) = default;
};

struct ExtractResult {
    ProfileStore store;
    std::vector<std::string> diagnostics;  // one per skipped package
};

/// Profiles every manifest record, resolving relative ids against
/// `base_dir`. Packages that cannot be read or profiled are skipped with a
/// diagnostic. Error{NoReadableSamples} if nothing survives.
ExtractResult extract_corpus(const CorpusManifest& manifest, const FeatureCatalog& catalog,
                             const std::string& base_dir = ".");

/// Per-feature Bernoulli marginals, in catalog order.
struct MarginalSpec {
    struct Entry {
        std::string id;
        double p_benign = 0;
        double p_suspicious = 0;
    };
    std::vector<Entry> features;
};

/// Benign/malware frequencies per 1000 samples for the default catalog.
MarginalSpec default_marginals();

/// Lines of `id<TAB>p_benign<TAB>p_suspicious`; '#' comments. Error{BadSpec}.
MarginalSpec parse_marginals(std::string_view text);

/// Draws each bit independently from its class marginal. Benign samples
/// come first, ids "synth-b-000000" / "synth-s-000000". Deterministic for a
/// seed. Error{BadSpec} when the spec does not cover the catalog exactly in
/// order or a probability lies outside [0, 1].
ProfileStore synth_generate(const MarginalSpec& spec, const FeatureCatalog& catalog,
                            std::size_t n_benign, std::size_t n_suspicious, std::uint64_t seed);

/// Line-delimited text:
///
///     #apkbayes-store<TAB>1<TAB><catalog version>
///     id,label,family,bitstring[,diagnostic...]
///     #end<TAB><record count>
///
/// Text fields are percent-escaped, so ids may contain commas.
std::string save_store(const ProfileStore& store);

/// Error{BadStore} for malformed or truncated input; Error{CatalogMismatch}
/// when `expected_catalog_version` is given and differs from the header.
ProfileStore load_store(std::string_view text,
                        std::optional<std::string_view> expected_catalog_version = std::nullopt);

}  // namespace apkbayes
