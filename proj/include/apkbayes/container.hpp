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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace apkbayes {

enum class EntryKind { Dex, Manifest, Resource, Asset, NativeLib, EmbeddedPackage, Other };

std::string_view to_string(EntryKind kind);

/// Classifies an entry by its (normalized) path. Total: every name gets
/// exactly one kind. Extension checks are case-insensitive.
EntryKind classify_entry(std::string_view name);

/// Normalizes a stored entry name: backslashes become '/', leading "./" and
/// "/" are dropped.
std::string normalize_entry_name(std::string_view name);

struct ArchiveEntry {
    std::string name;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    EntryKind kind = EntryKind::Other;
    std::uint16_t method = 0;
    std::uint32_t crc32 = 0;
    std::uint64_t local_header_offset = 0;
};

/// A ZIP container (APK) indexed from its central directory. Entry payloads
/// are only touched by `read_entry`; opening parses the directory alone.
/// Immutable after construction and cheap to copy (the bytes are shared).
class ApkArchive {
public:
    /// Throws Error{BadContainer} for a missing or malformed end record or
    /// central directory, Error{UnsupportedCompression} for any entry whose
    /// method is neither stored (0) nor deflate (8).
    static ApkArchive open(std::vector<std::uint8_t> bytes, std::string source_id);

    /// Reads the whole file at `path`; Error{Io} if it cannot be read.
    static ApkArchive open_file(const std::string& path);

    const std::string& source_id() const noexcept { return source_id_; }
    const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

    const ArchiveEntry* find(std::string_view name) const;

    /// Decompresses one entry and verifies its CRC-32 and size.
    /// Error{EntryNotFound} or Error{CorruptEntry}.
    std::vector<std::uint8_t> read_entry(std::string_view name) const;
    std::vector<std::uint8_t> read_entry(const ArchiveEntry& entry) const;

    /// Names of EmbeddedPackage entries in archive order.
    std::vector<std::string> list_payload_entries() const;

private:
    ApkArchive() = default;

    std::shared_ptr<const std::vector<std::uint8_t>> data_;
    std::string source_id_;
    std::vector<ArchiveEntry> entries_;
    std::vector<std::string> diagnostics_;
};

}  // namespace apkbayes
