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

#include "apkbayes/container.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_map>

#include <zlib.h>

#include "apkbayes/byte_reader.hpp"
#include "apkbayes/error.hpp"

namespace apkbayes {

namespace {

constexpr std::uint32_t kEndOfCentralDirSig = 0x06054b50;
constexpr std::uint32_t kCentralDirSig = 0x02014b50;
constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::size_t kEndOfCentralDirSize = 22;
constexpr std::size_t kCentralDirFixedSize = 46;
constexpr std::size_t kLocalHeaderFixedSize = 30;
constexpr std::size_t kMaxCommentSize = 0xffff;

constexpr std::uint16_t kMethodStored = 0;
constexpr std::uint16_t kMethodDeflate = 8;

// Deflate cannot expand better than ~1032:1; anything claiming more is lying.
constexpr std::uint64_t kMaxDeflateRatio = 1100;

bool ends_with_icase(std::string_view s, std::string_view suffix)
{
    if (suffix.size() > s.size()) {
        return false;
    }
    return std::equal(suffix.begin(), suffix.end(), s.end() - static_cast<std::ptrdiff_t>(suffix.size()),
                      [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a))
                              == std::tolower(static_cast<unsigned char>(b));
                      });
}

bool starts_with_icase(std::string_view s, std::string_view prefix)
{
    return prefix.size() <= s.size()
        && ends_with_icase(s.substr(0, prefix.size()), prefix);
}

bool equals_icase(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && ends_with_icase(a, b);
}

std::size_t find_end_record(ByteView data)
{
    if (data.size() < kEndOfCentralDirSize) {
        throw Error(ErrorKind::BadContainer, "input shorter than an end-of-directory record");
    }
    std::size_t last = data.size() - kEndOfCentralDirSize;
    std::size_t first = last > kMaxCommentSize ? last - kMaxCommentSize : 0;
    for (std::size_t pos = last + 1; pos-- > first;) {
        if (data[pos] == 0x50 && data[pos + 1] == 0x4b && data[pos + 2] == 0x05
            && data[pos + 3] == 0x06) {
            std::size_t comment_len = data[pos + 20] | (data[pos + 21] << 8);
            if (pos + kEndOfCentralDirSize + comment_len <= data.size()) {
                return pos;
            }
        }
    }
    throw Error(ErrorKind::BadContainer, "end-of-central-directory signature not found");
}

}  // namespace

std::string_view to_string(EntryKind kind)
{
    switch (kind) {
    case EntryKind::Dex: return "dex";
    case EntryKind::Manifest: return "manifest";
    case EntryKind::Resource: return "resource";
    case EntryKind::Asset: return "asset";
    case EntryKind::NativeLib: return "native-lib";
    case EntryKind::EmbeddedPackage: return "embedded-package";
    case EntryKind::Other: return "other";
    }
    return "other";
}

std::string normalize_entry_name(std::string_view name)
{
    std::string out(name);
    std::replace(out.begin(), out.end(), '\\', '/');
    for (;;) {
        if (out.starts_with("./")) {
            out.erase(0, 2);
        } else if (out.starts_with("/")) {
            out.erase(0, 1);
        } else {
            break;
        }
    }
    return out;
}

EntryKind classify_entry(std::string_view name)
{
    if (equals_icase(name, "AndroidManifest.xml")) {
        return EntryKind::Manifest;
    }
    if (ends_with_icase(name, ".dex")) {
        return EntryKind::Dex;
    }
    if (ends_with_icase(name, ".apk") || ends_with_icase(name, ".jar")) {
        return EntryKind::EmbeddedPackage;
    }
    if (starts_with_icase(name, "lib/") || ends_with_icase(name, ".so")) {
        return EntryKind::NativeLib;
    }
    if (starts_with_icase(name, "assets/")) {
        return EntryKind::Asset;
    }
    if (starts_with_icase(name, "res/") || equals_icase(name, "resources.arsc")) {
        return EntryKind::Resource;
    }
    return EntryKind::Other;
}

ApkArchive ApkArchive::open(std::vector<std::uint8_t> bytes, std::string source_id)
{
    ApkArchive archive;
    archive.source_id_ = std::move(source_id);
    archive.data_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
    ByteView data(*archive.data_);

    auto eocd_pos = find_end_record(data);
    ByteReader eocd(data.subspan(eocd_pos), ErrorKind::BadContainer);
    eocd.skip(4);
    auto disk = eocd.u16();
    auto cd_disk = eocd.u16();
    auto entries_on_disk = eocd.u16();
    auto entry_count = eocd.u16();
    auto cd_size = eocd.u32();
    auto cd_offset = eocd.u32();
    if (disk != 0 || cd_disk != 0 || entries_on_disk != entry_count) {
        throw Error(ErrorKind::BadContainer, "multi-disk archives are not supported");
    }
    if (entry_count == 0xffff || cd_size == 0xffffffff || cd_offset == 0xffffffff) {
        throw Error(ErrorKind::BadContainer, "zip64 archives are not supported");
    }
    if (std::uint64_t{cd_offset} + cd_size > eocd_pos) {
        throw Error(ErrorKind::BadContainer, "central directory overlaps end record");
    }

    ByteReader cd(data.subspan(cd_offset, cd_size), ErrorKind::BadContainer);
    std::unordered_map<std::string, std::size_t> by_name;
    std::vector<ArchiveEntry> entries;
    entries.reserve(entry_count);
    for (std::size_t i = 0; i < entry_count; ++i) {
        if (cd.remaining() < kCentralDirFixedSize) {
            throw Error(ErrorKind::BadContainer,
                        "central directory truncated at record " + std::to_string(i));
        }
        if (cd.u32() != kCentralDirSig) {
            throw Error(ErrorKind::BadContainer,
                        "bad central directory signature at record " + std::to_string(i));
        }
        cd.skip(2 + 2 + 2);  // version made by, version needed, flags
        ArchiveEntry entry;
        entry.method = cd.u16();
        cd.skip(2 + 2);  // mtime, mdate
        entry.crc32 = cd.u32();
        entry.compressed_size = cd.u32();
        entry.uncompressed_size = cd.u32();
        auto name_len = cd.u16();
        auto extra_len = cd.u16();
        auto comment_len = cd.u16();
        cd.skip(2 + 2 + 4);  // disk start, internal attrs, external attrs
        entry.local_header_offset = cd.u32();
        auto raw_name = cd.bytes(name_len);
        cd.skip(std::size_t{extra_len} + comment_len);

        if (entry.method != kMethodStored && entry.method != kMethodDeflate) {
            throw Error(ErrorKind::UnsupportedCompression,
                        "entry " + std::to_string(i) + " uses compression method "
                            + std::to_string(entry.method));
        }
        entry.name = normalize_entry_name(
            std::string_view(reinterpret_cast<const char*>(raw_name.data()), raw_name.size()));
        entry.kind = classify_entry(entry.name);

        auto it = by_name.find(entry.name);
        if (it != by_name.end()) {
            archive.diagnostics_.push_back("duplicate entry '" + entry.name
                                           + "'; keeping the last occurrence");
            entries[it->second].name.clear();
        }
        by_name[entry.name] = entries.size();
        entries.push_back(std::move(entry));
    }

    // Drop entries shadowed by a later duplicate, preserving order.
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto it = by_name.find(entries[i].name);
        if (it != by_name.end() && it->second == i) {
            archive.entries_.push_back(std::move(entries[i]));
        }
    }
    return archive;
}

ApkArchive ApkArchive::open_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorKind::Io, "read error on '" + path + "'");
    }
    return open(std::move(bytes), path);
}

const ArchiveEntry* ApkArchive::find(std::string_view name) const
{
    auto normalized = normalize_entry_name(name);
    for (const auto& entry : entries_) {
        if (entry.name == normalized) {
            return &entry;
        }
    }
    return nullptr;
}

std::vector<std::uint8_t> ApkArchive::read_entry(std::string_view name) const
{
    const auto* entry = find(name);
    if (entry == nullptr) {
        throw Error(ErrorKind::EntryNotFound, "no entry named '" + std::string(name) + "'");
    }
    return read_entry(*entry);
}

std::vector<std::uint8_t> ApkArchive::read_entry(const ArchiveEntry& entry) const
{
    ByteReader reader(ByteView(*data_), ErrorKind::CorruptEntry);
    reader.seek(entry.local_header_offset);
    if (reader.remaining() < kLocalHeaderFixedSize || reader.u32() != kLocalHeaderSig) {
        throw Error(ErrorKind::CorruptEntry, "bad local header for '" + entry.name + "'");
    }
    reader.skip(22);
    auto name_len = reader.u16();
    auto extra_len = reader.u16();
    reader.skip(std::size_t{name_len} + extra_len);
    auto payload = reader.bytes(entry.compressed_size);

    std::vector<std::uint8_t> out;
    if (entry.method == kMethodStored) {
        if (entry.compressed_size != entry.uncompressed_size) {
            throw Error(ErrorKind::CorruptEntry,
                        "stored entry '" + entry.name + "' has mismatched sizes");
        }
        out.assign(payload.begin(), payload.end());
    } else {
        if (entry.uncompressed_size > entry.compressed_size * kMaxDeflateRatio + 1024) {
            throw Error(ErrorKind::CorruptEntry,
                        "implausible expansion ratio for '" + entry.name + "'");
        }
        out.resize(entry.uncompressed_size);
        z_stream zs{};
        if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
            throw std::runtime_error("inflateInit2 failed");
        }
        zs.next_in = const_cast<Bytef*>(payload.data());
        zs.avail_in = static_cast<uInt>(payload.size());
        zs.next_out = out.data();
        zs.avail_out = static_cast<uInt>(out.size());
        int rc = inflate(&zs, Z_FINISH);
        auto produced = zs.total_out;
        inflateEnd(&zs);
        if (rc != Z_STREAM_END || produced != entry.uncompressed_size) {
            throw Error(ErrorKind::CorruptEntry,
                        "deflate stream for '" + entry.name + "' is damaged");
        }
    }

    auto crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, out.data(), static_cast<uInt>(out.size()));
    if (crc != entry.crc32) {
        throw Error(ErrorKind::CorruptEntry, "checksum mismatch for '" + entry.name + "'");
    }
    return out;
}

std::vector<std::string> ApkArchive::list_payload_entries() const
{
    std::vector<std::string> names;
    for (const auto& entry : entries_) {
        if (entry.kind == EntryKind::EmbeddedPackage) {
            names.push_back(entry.name);
        }
    }
    return names;
}

}  // namespace apkbayes
