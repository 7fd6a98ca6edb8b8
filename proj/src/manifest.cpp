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

#include "apkbayes/manifest.hpp"

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "apkbayes/byte_reader.hpp"
#include "apkbayes/error.hpp"

namespace apkbayes {

namespace {

constexpr std::uint16_t kResXmlType = 0x0003;
constexpr std::uint16_t kResStringPoolType = 0x0001;
constexpr std::uint16_t kResXmlStartElementType = 0x0102;
constexpr std::uint16_t kResXmlResourceMapType = 0x0180;

constexpr std::uint32_t kNoIndex = 0xffffffff;
constexpr std::uint32_t kUtf8Flag = 1u << 8;

constexpr std::uint8_t kTypeReference = 0x01;
constexpr std::uint8_t kTypeString = 0x03;
constexpr std::uint8_t kTypeDynamicReference = 0x07;

[[noreturn]] void bad(const std::string& what)
{
    throw Error(ErrorKind::BadManifest, what);
}

/// Routes a decoded (element, attribute-role, value) triple into the
/// ManifestInfo. Shared by the binary and plaintext paths so both apply
/// identical extraction rules.
class Collector {
public:
    void on_attribute(std::string_view element, bool is_android_name, bool is_package,
                      const std::string& value)
    {
        if (element == "manifest" && is_package) {
            info.package_name = value;
            return;
        }
        if (!is_android_name) {
            return;
        }
        if (element == "uses-permission" || element == "uses-permission-sdk-23") {
            info.permissions.insert(value);
        } else if (element == "activity" || element == "activity-alias" || element == "service"
                   || element == "receiver" || element == "provider") {
            info.component_names.insert(value);
        } else if (element == "action") {
            info.intent_actions.insert(value);
        }
    }

    ManifestInfo info;
};

std::string ref_string(std::uint32_t id)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "@ref:0x%08x", id);
    return buf;
}

void append_utf16_as_utf8(std::string& out, const std::vector<std::uint16_t>& units)
{
    for (std::size_t i = 0; i < units.size(); ++i) {
        std::uint32_t cp = units[i];
        if (cp >= 0xd800 && cp <= 0xdbff && i + 1 < units.size() && units[i + 1] >= 0xdc00
            && units[i + 1] <= 0xdfff) {
            cp = 0x10000 + ((cp - 0xd800) << 10) + (units[i + 1] - 0xdc00);
            ++i;
        } else if (cp >= 0xd800 && cp <= 0xdfff) {
            cp = 0xfffd;
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
}

std::vector<std::string> read_string_pool(ByteView chunk, std::uint16_t header_size)
{
    ByteReader r(chunk, ErrorKind::BadManifest);
    r.seek(8);
    auto string_count = r.u32();
    r.u32();  // style count
    auto flags = r.u32();
    auto strings_start = r.u32();
    if (std::uint64_t{header_size} + std::uint64_t{string_count} * 4 > chunk.size()) {
        bad("string pool offsets exceed chunk");
    }
    bool utf8 = (flags & kUtf8Flag) != 0;

    std::vector<std::string> pool;
    pool.reserve(string_count);
    for (std::uint32_t i = 0; i < string_count; ++i) {
        r.seek(header_size + std::size_t{i} * 4);
        std::uint64_t at = std::uint64_t{strings_start} + r.u32();
        if (at >= chunk.size()) {
            bad("string " + std::to_string(i) + " starts outside its pool");
        }
        r.seek(static_cast<std::size_t>(at));
        std::string s;
        if (utf8) {
            auto len_prefix = [&r] {
                std::size_t n = r.u8();
                if (n & 0x80) {
                    n = ((n & 0x7f) << 8) | r.u8();
                }
                return n;
            };
            len_prefix();  // UTF-16 length, unused
            auto n = len_prefix();
            auto raw = r.bytes(n);
            s.assign(reinterpret_cast<const char*>(raw.data()), raw.size());
        } else {
            std::size_t n = r.u16();
            if (n & 0x8000) {
                n = ((n & 0x7fff) << 16) | r.u16();
            }
            if (n > r.remaining() / 2) {
                bad("string " + std::to_string(i) + " runs past its pool");
            }
            std::vector<std::uint16_t> units(n);
            for (auto& u : units) {
                u = r.u16();
            }
            append_utf16_as_utf8(s, units);
        }
        pool.push_back(std::move(s));
    }
    return pool;
}

ManifestInfo parse_binary(ByteView bytes)
{
    ByteReader top(bytes, ErrorKind::BadManifest);
    top.u16();
    auto doc_header = top.u16();
    auto doc_size = top.u32();
    if (doc_header != 8 || doc_size < 8 || doc_size > bytes.size()) {
        bad("document chunk size " + std::to_string(doc_size) + " does not fit input of "
            + std::to_string(bytes.size()) + " bytes");
    }

    std::vector<std::string> pool;
    std::vector<std::uint32_t> resource_ids;
    Collector collect;

    auto lookup = [&pool](std::uint32_t idx) -> const std::string* {
        if (idx == kNoIndex) {
            return nullptr;
        }
        if (idx >= pool.size()) {
            bad("string index " + std::to_string(idx) + " outside pool of "
                + std::to_string(pool.size()));
        }
        return &pool[idx];
    };

    std::size_t pos = 8;
    while (pos < doc_size) {
        top.seek(pos);
        if (doc_size - pos < 8) {
            bad("trailing bytes shorter than a chunk header");
        }
        auto type = top.u16();
        auto header_size = top.u16();
        auto size = top.u32();
        if (header_size < 8 || size < header_size || size > doc_size - pos) {
            bad("chunk at offset " + std::to_string(pos) + " has invalid size");
        }
        auto chunk = bytes.subspan(pos, size);
        ByteReader r(chunk, ErrorKind::BadManifest);

        switch (type) {
        case kResStringPoolType:
            if (header_size < 28) {
                bad("string pool header too small");
            }
            pool = read_string_pool(chunk, header_size);
            break;
        case kResXmlResourceMapType:
            resource_ids.clear();
            r.seek(header_size);
            while (r.remaining() >= 4) {
                resource_ids.push_back(r.u32());
            }
            break;
        case kResXmlStartElementType: {
            r.seek(header_size);
            r.u32();  // element namespace
            const auto* element = lookup(r.u32());
            auto attr_start = r.u16();
            auto attr_size = r.u16();
            auto attr_count = r.u16();
            if (attr_count > 0 && attr_size < 20) {
                bad("attribute record too small");
            }
            if (element == nullptr) {
                bad("element without a name");
            }
            for (std::size_t a = 0; a < attr_count; ++a) {
                r.seek(std::size_t{header_size} + attr_start + a * attr_size);
                auto ns_idx = r.u32();
                auto name_idx = r.u32();
                auto raw_value = r.u32();
                r.u16();  // Res_value.size
                r.u8();   // res0
                auto data_type = r.u8();
                auto data = r.u32();

                const auto* ns = lookup(ns_idx);
                const auto* name = lookup(name_idx);
                bool android_ns = ns != nullptr && *ns == kAndroidNamespace;
                bool is_android_name =
                    (name_idx < resource_ids.size() && resource_ids[name_idx] == kAndroidNameAttrId)
                    || (android_ns && name != nullptr && *name == "name");
                bool is_package = ns == nullptr && name != nullptr && *name == "package";

                std::optional<std::string> value;
                if (raw_value != kNoIndex) {
                    value = *lookup(raw_value);
                } else if (data_type == kTypeString) {
                    value = *lookup(data);
                } else if (data_type == kTypeReference || data_type == kTypeDynamicReference) {
                    value = ref_string(data);
                }
                if (value) {
                    collect.on_attribute(*element, is_android_name, is_package, *value);
                }
            }
            break;
        }
        default:
            // Namespace, end-element and CDATA chunks carry nothing we extract.
            break;
        }
        pos += size;
    }
    return std::move(collect.info);
}

using boost::property_tree::ptree;

void walk_plaintext(const std::string& element, const ptree& node,
                    std::map<std::string, std::string> prefixes, Collector& collect)
{
    if (auto attrs = node.get_child_optional("<xmlattr>")) {
        for (const auto& [key, value] : *attrs) {
            if (key == "xmlns") {
                prefixes[""] = value.data();
            } else if (key.starts_with("xmlns:")) {
                prefixes[key.substr(6)] = value.data();
            }
        }
        for (const auto& [key, value] : *attrs) {
            auto colon = key.find(':');
            std::string prefix = colon == std::string::npos ? "" : key.substr(0, colon);
            std::string local = colon == std::string::npos ? key : key.substr(colon + 1);
            if (prefix == "xmlns" || key == "xmlns") {
                continue;
            }
            bool android_ns = false;
            if (!prefix.empty()) {
                auto it = prefixes.find(prefix);
                android_ns = it != prefixes.end() ? it->second == kAndroidNamespace
                                                  : prefix == "android";
            }
            collect.on_attribute(element, android_ns && local == "name",
                                 prefix.empty() && local == "package", value.data());
        }
    }
    for (const auto& [key, child] : node) {
        if (!key.empty() && key.front() != '<') {
            walk_plaintext(key, child, prefixes, collect);
        }
    }
}

ManifestInfo parse_plaintext(ByteView bytes)
{
    std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.erase(0, 3);
    }
    std::istringstream in(text);
    ptree tree;
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        bad(std::string("not a binary chunk stream and not well-formed XML: ") + e.what());
    }
    const ptree* root = nullptr;
    for (const auto& [key, child] : tree) {
        if (key == "manifest") {
            root = &child;
        } else if (!key.empty() && key.front() != '<') {
            bad("root element is <" + key + ">, expected <manifest>");
        }
    }
    if (root == nullptr) {
        bad("no <manifest> root element");
    }
    Collector collect;
    walk_plaintext("manifest", *root, {}, collect);
    return std::move(collect.info);
}

}  // namespace

ManifestInfo parse_manifest(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 4 && bytes[0] == (kResXmlType & 0xff) && bytes[1] == (kResXmlType >> 8)
        && bytes[2] == 8 && bytes[3] == 0) {
        return parse_binary(bytes);
    }
    return parse_plaintext(bytes);
}

}  // namespace apkbayes
