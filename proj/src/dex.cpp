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

#include "apkbayes/dex.hpp"

#include <algorithm>
#include <cstring>

#include "apkbayes/byte_reader.hpp"
#include "apkbayes/error.hpp"

namespace apkbayes {

namespace {

constexpr std::uint32_t kEndianConstant = 0x12345678;

// Header field offsets.
constexpr std::size_t kEndianTagOff = 0x28;
constexpr std::size_t kStringIdsOff = 0x38;
constexpr std::size_t kTypeIdsOff = 0x40;
constexpr std::size_t kMethodIdsOff = 0x58;

constexpr std::size_t kStringIdItemSize = 4;
constexpr std::size_t kTypeIdItemSize = 4;
constexpr std::size_t kMethodIdItemSize = 8;

void append_utf8(std::string& out, std::uint32_t cp)
{
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

struct Table {
    std::uint32_t size;
    std::uint32_t offset;
};

Table read_table(ByteReader& header, std::size_t field_off, std::size_t item_size,
                 std::size_t file_size, const char* what)
{
    header.seek(field_off);
    Table t{header.u32(), header.u32()};
    if (t.size == 0) {
        return t;
    }
    std::uint64_t end = std::uint64_t{t.offset} + std::uint64_t{t.size} * item_size;
    if (end > file_size) {
        throw Error(ErrorKind::Truncated,
                    std::string(what) + " table [" + std::to_string(t.offset) + ", "
                        + std::to_string(end) + ") exceeds file size "
                        + std::to_string(file_size));
    }
    return t;
}

}  // namespace

bool decode_mutf8(std::span<const std::uint8_t> in, std::string& out, std::size_t& utf16_units)
{
    std::vector<std::uint16_t> units;
    units.reserve(in.size());
    for (std::size_t i = 0; i < in.size();) {
        std::uint8_t b0 = in[i];
        if (b0 < 0x80) {
            if (b0 == 0) {
                return false;
            }
            units.push_back(b0);
            i += 1;
        } else if ((b0 & 0xe0) == 0xc0) {
            if (i + 1 >= in.size() || (in[i + 1] & 0xc0) != 0x80) {
                return false;
            }
            units.push_back(static_cast<std::uint16_t>(((b0 & 0x1f) << 6) | (in[i + 1] & 0x3f)));
            i += 2;
        } else if ((b0 & 0xf0) == 0xe0) {
            if (i + 2 >= in.size() || (in[i + 1] & 0xc0) != 0x80 || (in[i + 2] & 0xc0) != 0x80) {
                return false;
            }
            units.push_back(static_cast<std::uint16_t>(((b0 & 0x0f) << 12)
                                                       | ((in[i + 1] & 0x3f) << 6)
                                                       | (in[i + 2] & 0x3f)));
            i += 3;
        } else {
            return false;
        }
    }

    utf16_units = units.size();
    out.clear();
    out.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        std::uint32_t u = units[i];
        if (u >= 0xd800 && u <= 0xdbff) {
            if (i + 1 < units.size() && units[i + 1] >= 0xdc00 && units[i + 1] <= 0xdfff) {
                append_utf8(out, 0x10000 + ((u - 0xd800) << 10) + (units[i + 1] - 0xdc00));
                ++i;
                continue;
            }
            u = 0xfffd;
        } else if (u >= 0xdc00 && u <= 0xdfff) {
            u = 0xfffd;
        }
        append_utf8(out, u);
    }
    return true;
}

DexIndex parse_dex(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kDexHeaderSize) {
        throw Error(ErrorKind::Truncated, "input of " + std::to_string(bytes.size())
                                              + " bytes is shorter than the dex header");
    }
    static constexpr std::uint8_t kMagicPrefix[4] = {'d', 'e', 'x', '\n'};
    if (!std::equal(std::begin(kMagicPrefix), std::end(kMagicPrefix), bytes.begin())
        || bytes[4] != '0' || bytes[5] != '3' || bytes[6] < '5' || bytes[6] > '9'
        || bytes[7] != 0) {
        throw Error(ErrorKind::BadMagic, "not a dex 035-039 file");
    }

    DexIndex index;
    index.version.assign(reinterpret_cast<const char*>(bytes.data()) + 4, 3);

    ByteReader header(bytes.first(kDexHeaderSize), ErrorKind::Truncated);
    header.seek(kEndianTagOff);
    if (header.u32() != kEndianConstant) {
        throw Error(ErrorKind::BadMagic, "unsupported endian tag");
    }
    auto string_ids = read_table(header, kStringIdsOff, kStringIdItemSize, bytes.size(), "string_ids");
    auto type_ids = read_table(header, kTypeIdsOff, kTypeIdItemSize, bytes.size(), "type_ids");
    auto method_ids = read_table(header, kMethodIdsOff, kMethodIdItemSize, bytes.size(), "method_ids");

    ByteReader file(bytes, ErrorKind::Truncated);

    index.strings.resize(string_ids.size);
    for (std::uint32_t i = 0; i < string_ids.size; ++i) {
        file.seek(string_ids.offset + std::size_t{i} * kStringIdItemSize);
        file.seek(file.u32());
        auto declared_units = file.uleb128();
        auto rest = bytes.subspan(file.pos());
        const auto* nul = static_cast<const std::uint8_t*>(std::memchr(rest.data(), 0, rest.size()));
        if (nul == nullptr) {
            throw Error(ErrorKind::Truncated,
                        "string " + std::to_string(i) + " runs past end of file");
        }
        auto body = rest.first(static_cast<std::size_t>(nul - rest.data()));
        std::string decoded;
        std::size_t units = 0;
        if (!decode_mutf8(body, decoded, units)) {
            index.diagnostics.push_back("BadStringEncoding: string " + std::to_string(i)
                                        + " is not valid MUTF-8; skipped");
        } else if (units != declared_units) {
            index.diagnostics.push_back("BadStringEncoding: string " + std::to_string(i)
                                        + " declares " + std::to_string(declared_units)
                                        + " UTF-16 units but holds " + std::to_string(units)
                                        + "; skipped");
        } else {
            index.strings[i] = std::move(decoded);
        }
    }

    index.type_names.reserve(type_ids.size);
    for (std::uint32_t i = 0; i < type_ids.size; ++i) {
        file.seek(type_ids.offset + std::size_t{i} * kTypeIdItemSize);
        auto descriptor_idx = file.u32();
        if (descriptor_idx >= index.strings.size()) {
            throw Error(ErrorKind::Truncated, "type " + std::to_string(i)
                                                  + " references string "
                                                  + std::to_string(descriptor_idx)
                                                  + " outside the pool");
        }
        index.type_names.push_back(index.strings[descriptor_idx]);
    }

    index.method_refs.reserve(method_ids.size);
    for (std::uint32_t i = 0; i < method_ids.size; ++i) {
        file.seek(method_ids.offset + std::size_t{i} * kMethodIdItemSize);
        auto class_idx = file.u16();
        file.skip(2);  // proto_idx
        auto name_idx = file.u32();
        if (class_idx >= index.type_names.size() || name_idx >= index.strings.size()) {
            throw Error(ErrorKind::Truncated, "method " + std::to_string(i)
                                                  + " references an id outside its table");
        }
        index.method_refs.push_back({index.type_names[class_idx], index.strings[name_idx]});
    }
    return index;
}

bool contains_pattern(const DexIndex& index, std::string_view pattern, MatchMode mode)
{
    if (pattern.empty()) {
        return false;
    }
    if (mode == MatchMode::Exact) {
        return std::any_of(index.strings.begin(), index.strings.end(),
                           [&](const std::string& s) { return s == pattern; })
            || std::any_of(index.method_refs.begin(), index.method_refs.end(),
                           [&](const MethodRef& m) { return m.name == pattern; });
    }
    return std::any_of(index.strings.begin(), index.strings.end(), [&](const std::string& s) {
        return s.find(pattern) != std::string::npos;
    });
}

bool contains_method_ref(const DexIndex& index, std::string_view pattern)
{
    if (pattern.empty()) {
        return false;
    }
    return std::any_of(index.method_refs.begin(), index.method_refs.end(),
                       [&](const MethodRef& m) {
                           return m.qualified().find(pattern) != std::string::npos;
                       });
}

}  // namespace apkbayes
