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

#include "apkbayes/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <set>
#include <thread>
#include <variant>

#include "apkbayes/container.hpp"
#include "apkbayes/detect.hpp"
#include "apkbayes/error.hpp"
#include "apkbayes/random.hpp"
#include "apkbayes/text.hpp"

namespace apkbayes {

namespace {

constexpr std::string_view kStoreMagic = "#apkbayes-store";
constexpr std::string_view kStoreEnd = "#end";
constexpr int kStoreFormatVersion = 1;

[[noreturn]] void bad_store(const std::string& what)
{
    throw Error(ErrorKind::BadStore, what);
}

// RFC 4180-style field split: quoted fields may hold commas and "" escapes.
std::optional<std::vector<std::string>> split_csv(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        return std::nullopt;
    }
    fields.push_back(std::move(cur));
    return fields;
}

// Per-feature frequencies in 1000 benign / 1000 malware samples, default
// catalog order.
struct Frequency {
    const char* id;
    int benign;
    int malware;
};

constexpr Frequency kDefaultFrequencies[] = {
    {"getSubscriberId", 42, 742},  {"getDeviceId", 316, 854},     {"getSimSerialNumber", 35, 455},
    {"apk_payload", 89, 537},      {"BOOT_COMPLETED", 69, 482},   {"chmod", 19, 389},
    {"Runtime.exec", 62, 458},     {"abortBroadcast", 4, 328},    {"getLineNumber", 111, 491},
    {"system_app", 4, 292},        {"system_bin", 45, 368},       {"createSubprocess", 0, 169},
    {"getSimOperator", 37, 196},   {"remount", 3, 122},           {"DexClassLoader", 16, 152},
    {"pm_install", 0, 98},         {"getCallState", 10, 119},     {"chown", 5, 107},
    {"jar_payload", 87, 252},      {"mount", 29, 152},            {"KeySpec", 99, 254},
    {"system_bin_sh", 4, 90},      {"SMSReceiver", 3, 66},        {"getNetworkOperator", 202, 353},
    {"SecretKey", 119, 248},
};

std::string bitstring(const FeatureBits& bits)
{
    std::string s;
    s.reserve(bits.size());
    for (bool b : bits) {
        s += b ? '1' : '0';
    }
    return s;
}

}  // namespace

CorpusManifest parse_corpus_manifest(std::string_view text)
{
    auto lines = split_lines(text);
    std::size_t at = 0;
    while (at < lines.size() && trim(lines[at]).empty()) {
        ++at;
    }
    if (at == lines.size() || trim(lines[at]) != "id,label,family") {
        bad_store("corpus manifest must start with the header 'id,label,family'");
    }
    CorpusManifest manifest;
    std::set<std::string> seen;
    for (++at; at < lines.size(); ++at) {
        if (trim(lines[at]).empty()) {
            continue;
        }
        auto where = "manifest line " + std::to_string(at + 1) + ": ";
        auto fields = split_csv(lines[at]);
        if (!fields || fields->size() < 2 || fields->size() > 3) {
            bad_store(where + "expected id,label,family");
        }
        CorpusRecord rec;
        rec.id = (*fields)[0];
        auto label = parse_label(trim((*fields)[1]));
        if (rec.id.empty() || !label || *label == Label::Unlabeled) {
            bad_store(where + "needs an id and a benign/suspicious label");
        }
        rec.label = *label;
        if (fields->size() == 3 && !trim((*fields)[2]).empty()) {
            rec.family = std::string(trim((*fields)[2]));
        }
        if (!seen.insert(rec.id).second) {
            bad_store(where + "duplicate id '" + rec.id + "'");
        }
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

ExtractResult extract_corpus(const CorpusManifest& manifest, const FeatureCatalog& catalog,
                             const std::string& base_dir)
{
    using Outcome = std::variant<AppProfile, std::string>;
    auto profile_one = [&](const CorpusRecord& rec) -> Outcome {
        std::filesystem::path path(rec.id);
        if (path.is_relative()) {
            path = std::filesystem::path(base_dir) / path;
        }
        try {
            auto profile = run_detectors(ApkArchive::open_file(path.string()), catalog);
            profile.source_id = rec.id;
            profile.label = rec.label;
            profile.family = rec.family;
            return profile;
        } catch (const Error& e) {
            return rec.id + ": " + e.what();
        }
    };

    // Packages are independent; profile them in parallel batches and keep
    // manifest order in the output.
    std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    std::vector<Outcome> outcomes;
    outcomes.reserve(manifest.records.size());
    for (std::size_t start = 0; start < manifest.records.size(); start += width) {
        std::vector<std::future<Outcome>> batch;
        auto end = std::min(start + width, manifest.records.size());
        for (auto i = start; i < end; ++i) {
            batch.push_back(std::async(std::launch::async, profile_one, std::cref(manifest.records[i])));
        }
        for (auto& f : batch) {
            outcomes.push_back(f.get());
        }
    }

    ExtractResult result;
    result.store.catalog_version = catalog.version;
    for (auto& o : outcomes) {
        if (auto* p = std::get_if<AppProfile>(&o)) {
            result.store.profiles.push_back(std::move(*p));
        } else {
            result.diagnostics.push_back(std::get<std::string>(std::move(o)));
        }
    }
    if (result.store.profiles.empty()) {
        throw Error(ErrorKind::NoReadableSamples,
                    "none of " + std::to_string(manifest.records.size()) + " packages could be profiled");
    }
    return result;
}

MarginalSpec default_marginals()
{
    MarginalSpec spec;
    for (const auto& f : kDefaultFrequencies) {
        spec.features.push_back({f.id, f.benign / 1000.0, f.malware / 1000.0});
    }
    return spec;
}

MarginalSpec parse_marginals(std::string_view text)
{
    MarginalSpec spec;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty() || line.front() == '#') {
            continue;
        }
        auto parts = split(line, '\t');
        std::optional<double> pb;
        std::optional<double> ps;
        if (parts.size() == 3) {
            pb = parse_double(trim(parts[1]));
            ps = parse_double(trim(parts[2]));
        }
        if (!pb || !ps) {
            throw Error(ErrorKind::BadSpec, "marginals line " + std::to_string(line_no)
                                                + ": expected id<TAB>p_benign<TAB>p_suspicious");
        }
        spec.features.push_back({std::string(trim(parts[0])), *pb, *ps});
    }
    return spec;
}

ProfileStore synth_generate(const MarginalSpec& spec, const FeatureCatalog& catalog,
                            std::size_t n_benign, std::size_t n_suspicious, std::uint64_t seed)
{
    if (spec.features.size() != catalog.size()) {
        throw Error(ErrorKind::BadSpec, "spec has " + std::to_string(spec.features.size())
                                            + " features, catalog has "
                                            + std::to_string(catalog.size()));
    }
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& e = spec.features[i];
        if (e.id != catalog.features[i].id) {
            throw Error(ErrorKind::BadSpec, "spec feature " + std::to_string(i) + " is '" + e.id
                                                + "', catalog has '" + catalog.features[i].id + "'");
        }
        auto valid = [](double p) { return p >= 0 && p <= 1; };  // false for NaN
        if (!valid(e.p_benign) || !valid(e.p_suspicious)) {
            throw Error(ErrorKind::BadSpec, "probabilities for '" + e.id + "' outside [0, 1]");
        }
    }

    Rng rng(seed);
    ProfileStore store;
    store.catalog_version = catalog.version;
    store.profiles.reserve(n_benign + n_suspicious);
    auto emit = [&](Label label, std::size_t n, const char* prefix) {
        for (std::size_t s = 0; s < n; ++s) {
            AppProfile p;
            char id[32];
            std::snprintf(id, sizeof id, "%s%06zu", prefix, s);
            p.source_id = id;
            p.label = label;
            p.bits.resize(catalog.size());
            for (std::size_t i = 0; i < catalog.size(); ++i) {
                double prob = label == Label::Suspicious ? spec.features[i].p_suspicious
                                                         : spec.features[i].p_benign;
                p.bits[i] = uniform01(rng) < prob;
            }
            store.profiles.push_back(std::move(p));
        }
    };
    emit(Label::Benign, n_benign, "synth-b-");
    emit(Label::Suspicious, n_suspicious, "synth-s-");
    return store;
}

std::string save_store(const ProfileStore& store)
{
    std::string out;
    out += std::string(kStoreMagic) + "\t" + std::to_string(kStoreFormatVersion) + "\t"
        + escape_field(store.catalog_version) + "\n";
    for (const auto& p : store.profiles) {
        out += escape_field(p.source_id);
        out += ',';
        out += to_string(p.label);
        out += ',';
        // An empty family and an absent one are the same thing.
        if (p.family) {
            out += escape_field(*p.family);
        }
        out += ',';
        out += bitstring(p.bits);
        for (const auto& d : p.diagnostics) {
            out += ',';
            out += escape_field(d);
        }
        out += '\n';
    }
    out += std::string(kStoreEnd) + "\t" + std::to_string(store.profiles.size()) + "\n";
    return out;
}

ProfileStore load_store(std::string_view text, std::optional<std::string_view> expected_catalog_version)
{
    auto lines = split_lines(text);
    if (lines.empty()) {
        bad_store("empty store");
    }
    auto header = split(lines[0], '\t');
    if (header.size() != 3 || header[0] != kStoreMagic) {
        bad_store("missing store header");
    }
    if (header[1] != std::to_string(kStoreFormatVersion)) {
        bad_store("unsupported store format version '" + std::string(header[1]) + "'");
    }
    ProfileStore store;
    auto version = unescape_field(header[2]);
    if (!version) {
        bad_store("bad catalog version escape");
    }
    store.catalog_version = *version;
    if (expected_catalog_version && *expected_catalog_version != store.catalog_version) {
        throw Error(ErrorKind::CatalogMismatch, "store was built with catalog '"
                                                    + store.catalog_version + "', active catalog is '"
                                                    + std::string(*expected_catalog_version) + "'");
    }

    bool ended = false;
    std::optional<std::size_t> width;
    for (std::size_t at = 1; at < lines.size(); ++at) {
        auto where = "store line " + std::to_string(at + 1) + ": ";
        if (ended) {
            if (!trim(lines[at]).empty()) {
                bad_store(where + "data after end marker");
            }
            continue;
        }
        if (lines[at].starts_with(kStoreEnd)) {
            auto parts = split(lines[at], '\t');
            auto count = parts.size() == 2 ? parse_uint(parts[1]) : std::nullopt;
            if (parts[0] != kStoreEnd || !count || *count != store.profiles.size()) {
                bad_store(where + "end marker does not match the record count");
            }
            ended = true;
            continue;
        }
        auto fields = split(lines[at], ',');
        if (fields.size() < 4) {
            bad_store(where + "expected id,label,family,bitstring");
        }
        AppProfile p;
        auto id = unescape_field(fields[0]);
        auto label = parse_label(fields[1]);
        if (!id || id->empty() || !label || fields[1].empty()) {
            bad_store(where + "bad id or label");
        }
        p.source_id = *id;
        p.label = *label;
        if (!fields[2].empty()) {
            auto family = unescape_field(fields[2]);
            if (!family) {
                bad_store(where + "bad family field");
            }
            p.family = *family;
        }
        for (char c : fields[3]) {
            if (c != '0' && c != '1') {
                bad_store(where + "bitstring holds '" + std::string(1, c) + "'");
            }
            p.bits.push_back(c == '1');
        }
        if (width && *width != p.bits.size()) {
            bad_store(where + "bitstring length differs from earlier records");
        }
        width = p.bits.size();
        for (std::size_t d = 4; d < fields.size(); ++d) {
            auto diag = unescape_field(fields[d]);
            if (!diag) {
                bad_store(where + "bad diagnostic escape");
            }
            p.diagnostics.push_back(std::move(*diag));
        }
        store.profiles.push_back(std::move(p));
    }
    if (!ended) {
        bad_store("store is truncated (no end marker)");
    }
    return store;
}

}  // namespace apkbayes
