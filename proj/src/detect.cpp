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

#include "apkbayes/detect.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <utility>

#include "apkbayes/dex.hpp"
#include "apkbayes/error.hpp"

namespace apkbayes {

std::string_view to_string(Label label)
{
    switch (label) {
    case Label::Benign: return "benign";
    case Label::Suspicious: return "suspicious";
    case Label::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

std::optional<Label> parse_label(std::string_view text)
{
    if (text == "benign") return Label::Benign;
    if (text == "suspicious") return Label::Suspicious;
    if (text == "unlabeled" || text.empty()) return Label::Unlabeled;
    return std::nullopt;
}

namespace {

bool contains_bytes(const std::vector<std::uint8_t>& haystack, std::string_view needle)
{
    auto it = std::search(haystack.begin(), haystack.end(),
                          std::boyer_moore_horspool_searcher(needle.begin(), needle.end()));
    return it != haystack.end();
}

bool ends_with_icase(std::string_view s, std::string_view suffix)
{
    return suffix.size() <= s.size()
        && std::equal(suffix.begin(), suffix.end(), s.end() - static_cast<std::ptrdiff_t>(suffix.size()),
                      [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a))
                              == std::tolower(static_cast<unsigned char>(b));
                      });
}

bool scanned_as_raw(EntryKind kind)
{
    return kind == EntryKind::Resource || kind == EntryKind::Asset || kind == EntryKind::NativeLib;
}

}  // namespace

DetectionReport analyze_archive(const ApkArchive& archive, const FeatureCatalog& catalog)
{
    DetectionReport report;
    report.profile.source_id = archive.source_id();
    report.profile.bits.assign(catalog.size(), false);
    report.locations.assign(catalog.size(), {});
    report.payload_entries = archive.list_payload_entries();
    auto& diagnostics = report.profile.diagnostics;
    diagnostics = archive.diagnostics();

    std::vector<std::pair<std::string, DexIndex>> dexes;
    for (const auto& entry : archive.entries()) {
        try {
            if (entry.kind == EntryKind::Manifest) {
                auto info = parse_manifest(archive.read_entry(entry));
                if (!report.manifest) {
                    report.manifest = std::move(info);
                } else {
                    report.manifest->permissions.merge(info.permissions);
                    report.manifest->component_names.merge(info.component_names);
                    report.manifest->intent_actions.merge(info.intent_actions);
                }
            } else if (entry.kind == EntryKind::Dex) {
                auto index = parse_dex(archive.read_entry(entry));
                for (const auto& d : index.diagnostics) {
                    diagnostics.push_back(entry.name + ": " + d);
                }
                report.dex_entries.push_back(entry.name);
                dexes.emplace_back(entry.name, std::move(index));
            }
        } catch (const Error& e) {
            diagnostics.push_back(entry.name + ": " + e.what());
        }
    }
    if (dexes.empty() && !report.manifest) {
        throw Error(ErrorKind::NoDex, "'" + archive.source_id()
                                          + "' has neither a parseable dex nor a manifest");
    }

    auto hit = [&report](std::size_t i, std::string where) {
        report.profile.bits[i] = true;
        report.locations[i].push_back(std::move(where));
    };

    std::vector<std::size_t> command_features;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& f = catalog.features[i];
        switch (f.kind) {
        case DetectorKind::ApiCall:
            for (const auto& [name, index] : dexes) {
                if (contains_pattern(index, f.pattern, MatchMode::Exact)) {
                    hit(i, name + ":exact");
                } else if (contains_pattern(index, f.pattern, MatchMode::Substring)) {
                    hit(i, name + ":string-pool");
                } else if (contains_method_ref(index, f.pattern)) {
                    hit(i, name + ":method-ref");
                }
            }
            break;
        case DetectorKind::Command:
            for (const auto& [name, index] : dexes) {
                if (contains_pattern(index, f.pattern, MatchMode::Substring)) {
                    hit(i, name + ":string-pool");
                }
            }
            command_features.push_back(i);
            break;
        case DetectorKind::Permission:
            if (report.manifest && report.manifest->permissions.contains(f.pattern)) {
                hit(i, "AndroidManifest.xml:uses-permission");
            }
            break;
        case DetectorKind::PayloadEntry:
            for (const auto& name : report.payload_entries) {
                if (ends_with_icase(name, f.pattern)) {
                    hit(i, name);
                }
            }
            break;
        case DetectorKind::ManifestAction:
            if (report.manifest && report.manifest->intent_actions.contains(f.pattern)) {
                hit(i, "AndroidManifest.xml:action");
            }
            for (const auto& [name, index] : dexes) {
                if (contains_pattern(index, f.pattern, MatchMode::Substring)) {
                    hit(i, name + ":string-pool");
                }
            }
            break;
        }
    }

    if (!command_features.empty()) {
        for (const auto& entry : archive.entries()) {
            if (!scanned_as_raw(entry.kind)) {
                continue;
            }
            std::vector<std::uint8_t> bytes;
            try {
                bytes = archive.read_entry(entry);
            } catch (const Error& e) {
                diagnostics.push_back(entry.name + ": " + e.what());
                continue;
            }
            for (auto i : command_features) {
                if (contains_bytes(bytes, catalog.features[i].pattern)) {
                    hit(i, entry.name);
                }
            }
        }
    }
    return report;
}

AppProfile run_detectors(const ApkArchive& archive, const FeatureCatalog& catalog)
{
    return analyze_archive(archive, catalog).profile;
}

}  // namespace apkbayes
