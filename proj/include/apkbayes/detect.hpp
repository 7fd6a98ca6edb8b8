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

#include <optional>
#include <string>
#include <vector>

#include "apkbayes/catalog.hpp"
#include "apkbayes/container.hpp"
#include "apkbayes/manifest.hpp"
#include "apkbayes/profile.hpp"

namespace apkbayes {

/// Everything the detectors learned about one package. `locations[i]`
/// lists where feature i matched ("classes.dex:string-pool",
/// "assets/run.sh", ...); it is empty exactly when bit i is clear.
struct DetectionReport {
    AppProfile profile;
    std::vector<std::vector<std::string>> locations;
    std::optional<ManifestInfo> manifest;
    std::vector<std::string> dex_entries;
    std::vector<std::string> payload_entries;
};

/// Applies every catalog detector to the archive. A feature fires when any
/// location matches:
///   ApiCall        string pool (exact or substring) or "Lcls;->name" method refs
///   Command        dex string pools and raw resource/asset/native-lib bytes
///   Permission     manifest uses-permission set
///   PayloadEntry   embedded .apk/.jar entries ending with the pattern
///   ManifestAction manifest intent actions or dex string pools
/// Unreadable entries become diagnostics. Throws Error{NoDex} only when
/// neither a dex nor the manifest could be parsed.
DetectionReport analyze_archive(const ApkArchive& archive, const FeatureCatalog& catalog);

AppProfile run_detectors(const ApkArchive& archive, const FeatureCatalog& catalog);

}  // namespace apkbayes
