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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apkbayes {

enum class DetectorKind { ApiCall, Command, Permission, PayloadEntry, ManifestAction };

std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> parse_detector_kind(std::string_view text);

struct FeatureDef {
    std::string id;
    DetectorKind kind = DetectorKind::ApiCall;
    std::string pattern;
    std::string description;

    friend bool operator==(const FeatureDef&, const FeatureDef&) = default;
};

/// Ordered feature definitions; the order is the canonical bit order of
/// every profile built against the catalog.
struct FeatureCatalog {
    std::vector<FeatureDef> features;
    std::string version;

    std::size_t size() const noexcept { return features.size(); }
    std::optional<std::size_t> index_of(std::string_view id) const;

    friend bool operator==(const FeatureCatalog&, const FeatureCatalog&) = default;
};

inline constexpr const char* kDefaultCatalogVersion = "default-25/1";

/// The 25 top-ranked malware indicators with their detector kinds.
FeatureCatalog default_catalog();

/// Parses the line format
///
///     # version: <name>
///     id<TAB>kind<TAB>pattern<TAB>description
///
/// '#' starts a comment line and blank lines are skipped. When no version
/// directive is present the version is derived from a hash of the
/// definitions. Throws Error{BadCatalog} on a duplicate id, unknown kind,
/// empty pattern or a line with fewer than three fields.
FeatureCatalog load_catalog(std::string_view text);
FeatureCatalog load_catalog_file(const std::string& path);

std::string save_catalog(const FeatureCatalog& catalog);

}  // namespace apkbayes
