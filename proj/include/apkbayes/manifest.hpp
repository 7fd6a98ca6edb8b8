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
#include <set>
#include <span>
#include <string>

namespace apkbayes {

inline constexpr const char* kAndroidNamespace = "http://schemas.android.com/apk/res/android";

/// Resource id of the framework attribute android:name.
inline constexpr std::uint32_t kAndroidNameAttrId = 0x01010003;

struct ManifestInfo {
    std::string package_name;
    std::set<std::string> permissions;
    std::set<std::string> component_names;  // activity, activity-alias, service, receiver, provider
    std::set<std::string> intent_actions;

    friend bool operator==(const ManifestInfo&, const ManifestInfo&) = default;
};

/// Decodes AndroidManifest.xml. Input starting with the binary XML chunk
/// header (type 0x0003, header size 8) is walked as a chunk stream;
/// anything else is parsed as plaintext XML with a <manifest> root.
/// Attribute values held as resource references come out as "@ref:0x%08x".
/// Throws Error{BadManifest} for anything that is neither.
ManifestInfo parse_manifest(std::span<const std::uint8_t> bytes);

}  // namespace apkbayes
