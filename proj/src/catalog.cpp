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

#include "apkbayes/catalog.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include "apkbayes/error.hpp"
#include "apkbayes/text.hpp"

namespace apkbayes {

namespace {

struct KindName {
    DetectorKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {DetectorKind::ApiCall, "ApiCall"},
    {DetectorKind::Command, "Command"},
    {DetectorKind::Permission, "Permission"},
    {DetectorKind::PayloadEntry, "PayloadEntry"},
    {DetectorKind::ManifestAction, "ManifestAction"},
};

std::string definitions_text(const FeatureCatalog& catalog)
{
    std::string out;
    for (const auto& f : catalog.features) {
        out += f.id;
        out += '\t';
        out += to_string(f.kind);
        out += '\t';
        out += f.pattern;
        out += '\t';
        out += f.description;
        out += '\n';
    }
    return out;
}

std::string content_version(const FeatureCatalog& catalog)
{
    // FNV-1a, so the derived version is stable across platforms.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : definitions_text(catalog)) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "custom-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::string_view to_string(DetectorKind kind)
{
    for (const auto& k : kKindNames) {
        if (k.kind == kind) {
            return k.name;
        }
    }
    return "?";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view text)
{
    for (const auto& k : kKindNames) {
        if (k.name == text) {
            return k.kind;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view id) const
{
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

FeatureCatalog default_catalog()
{
    using K = DetectorKind;
    FeatureCatalog c;
    c.version = kDefaultCatalogVersion;
    c.features = {
        {"getSubscriberId", K::ApiCall, "getSubscriberId", "TelephonyManager subscriber id"},
        {"getDeviceId", K::ApiCall, "getDeviceId", "TelephonyManager device id"},
        {"getSimSerialNumber", K::ApiCall, "getSimSerialNumber", "TelephonyManager SIM serial"},
        {"apk_payload", K::PayloadEntry, ".apk", "secondary .apk payload"},
        {"BOOT_COMPLETED", K::ManifestAction, "android.intent.action.BOOT_COMPLETED",
         "starts on boot"},
        {"chmod", K::Command, "chmod", "system command"},
        {"Runtime.exec", K::ApiCall, "Ljava/lang/Runtime;->exec", "executing a process"},
        {"abortBroadcast", K::ApiCall, "abortBroadcast", "intercepting broadcast notifications"},
        {"getLineNumber", K::ApiCall, "getLine1Number", "TelephonyManager line number"},
        {"system_app", K::Command, "/system/app", "system app directory"},
        {"system_bin", K::Command, "/system/bin", "system binaries directory"},
        {"createSubprocess", K::ApiCall, "createSubprocess", "creating a child process"},
        {"getSimOperator", K::ApiCall, "getSimOperator", "TelephonyManager SIM operator"},
        {"remount", K::Command, "remount", "system command"},
        {"DexClassLoader", K::ApiCall, "DexClassLoader", "dynamic class loading"},
        {"pm_install", K::Command, "pm install", "installing additional packages"},
        {"getCallState", K::ApiCall, "getCallState", "TelephonyManager call state"},
        {"chown", K::Command, "chown", "system command"},
        {"jar_payload", K::PayloadEntry, ".jar", "secondary .jar payload"},
        {"mount", K::Command, "mount", "system command"},
        {"KeySpec", K::ApiCall, "KeySpec", "code encryption"},
        {"system_bin_sh", K::Command, "/system/bin/sh", "system shell"},
        {"SMSReceiver", K::ApiCall, "SMSReceiver", "SMS receiver"},
        {"getNetworkOperator", K::ApiCall, "getNetworkOperator",
         "TelephonyManager network operator"},
        {"SecretKey", K::ApiCall, "SecretKey", "code encryption"},
    };
    return c;
}

FeatureCatalog load_catalog(std::string_view text)
{
    FeatureCatalog catalog;
    std::optional<std::string> version;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto where = "line " + std::to_string(line_no) + ": ";
        if (trim(line).empty()) {
            continue;
        }
        if (line.front() == '#') {
            auto body = trim(line.substr(1));
            if (body.starts_with("version:")) {
                version = std::string(trim(body.substr(8)));
            }
            continue;
        }
        auto fields = split(line, '\t');
        if (fields.size() < 3 || fields.size() > 4) {
            throw Error(ErrorKind::BadCatalog, where + "expected id, kind, pattern[, description]");
        }
        FeatureDef def;
        def.id = std::string(trim(fields[0]));
        auto kind = parse_detector_kind(trim(fields[1]));
        def.pattern = std::string(fields[2]);
        if (fields.size() == 4) {
            def.description = std::string(fields[3]);
        }
        if (def.id.empty()) {
            throw Error(ErrorKind::BadCatalog, where + "empty id");
        }
        if (!kind) {
            throw Error(ErrorKind::BadCatalog,
                        where + "unknown kind '" + std::string(fields[1]) + "'");
        }
        def.kind = *kind;
        if (def.pattern.empty()) {
            throw Error(ErrorKind::BadCatalog, where + "empty pattern for '" + def.id + "'");
        }
        if (!ids.insert(def.id).second) {
            throw Error(ErrorKind::BadCatalog, where + "duplicate id '" + def.id + "'");
        }
        catalog.features.push_back(std::move(def));
    }
    catalog.version = version && !version->empty() ? *version : content_version(catalog);
    return catalog;
}

FeatureCatalog load_catalog_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open catalog '" + path + "'");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_catalog(text);
}

std::string save_catalog(const FeatureCatalog& catalog)
{
    return "# version: " + catalog.version + "\n# id\tkind\tpattern\tdescription\n"
        + definitions_text(catalog);
}

}  // namespace apkbayes
