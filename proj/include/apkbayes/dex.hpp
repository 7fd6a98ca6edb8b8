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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apkbayes {

constexpr std::size_t kDexHeaderSize = 0x70;

struct MethodRef {
    std::string class_descriptor;  // e.g. "Landroid/telephony/TelephonyManager;"
    std::string name;

    /// Smali-style rendering, "Lpkg/Class;->name".
    std::string qualified() const { return class_descriptor + "->" + name; }

    friend bool operator==(const MethodRef&, const MethodRef&) = default;
};

/// Table-level view of a DEX file: the string pool plus the type and
/// method id tables resolved through it. Table lengths always equal the
/// header counts; a string that fails to decode is kept as "" at its slot
/// and reported in `diagnostics`.
struct DexIndex {
    std::string version;  // "035" .. "039"
    std::vector<std::string> strings;
    std::vector<std::string> type_names;
    std::vector<MethodRef> method_refs;
    std::vector<std::string> diagnostics;

    friend bool operator==(const DexIndex&, const DexIndex&) = default;
};

/// Error{Truncated} when the input is shorter than a header or any table
/// (or referenced string) lies outside it; Error{BadMagic} for an unknown
/// magic, version or endian tag. Checksum and signature are not verified.
DexIndex parse_dex(std::span<const std::uint8_t> bytes);

enum class MatchMode { Exact, Substring };

/// Exact: `pattern` equals a string-pool entry or a method name.
/// Substring: `pattern` occurs inside some string-pool entry.
bool contains_pattern(const DexIndex& index, std::string_view pattern, MatchMode mode);

/// True when `pattern` occurs in some method reference rendered as
/// "Lpkg/Class;->name".
bool contains_method_ref(const DexIndex& index, std::string_view pattern);

/// Decodes one MUTF-8 string body (no length prefix, no terminator) into
/// UTF-8. Unpaired surrogates become U+FFFD. Returns false on a malformed
/// byte sequence.
bool decode_mutf8(std::span<const std::uint8_t> in, std::string& out, std::size_t& utf16_units);

}  // namespace apkbayes
