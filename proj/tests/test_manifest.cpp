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

#include <doctest.h>

#include <fstream>
#include <iterator>

#include "apkbayes/error.hpp"
#include "apkbayes/manifest.hpp"
#include "support/builders.hpp"

using namespace apkbayes;
using namespace testsupport;

namespace {

const std::vector<std::string> kPerms{"android.permission.READ_PHONE_STATE",
                                      "android.permission.RECEIVE_BOOT_COMPLETED"};
const std::vector<std::string> kActions{"android.intent.action.BOOT_COMPLETED"};

bool is_bad_manifest(const Bytes& b)
{
    try {
        parse_manifest(b);
    } catch (const Error& e) {
        return e.kind() == ErrorKind::BadManifest;
    }
    return false;
}

}  // namespace

TEST_CASE("plaintext manifest permissions")
{
    auto info = parse_manifest(to_bytes(manifest_plaintext("com.x", kPerms, {})));
    CHECK(info.package_name == "com.x");
    CHECK(info.permissions.count("android.permission.READ_PHONE_STATE") == 1);
    CHECK(info.component_names == std::set<std::string>{".BootReceiver"});
}

TEST_CASE("binary manifest intent action")
{
    auto info = parse_manifest(AxmlWriter().write(manifest_tree("com.x", {}, kActions)));
    CHECK(info.intent_actions.count("android.intent.action.BOOT_COMPLETED") == 1);
    CHECK(info.package_name == "com.x");
}

TEST_CASE("binary manifest from the Python fixture")
{
    std::ifstream in(APKBAYES_FIXTURE_DIR "/e2e_manifest.bin", std::ios::binary);
    Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto info = parse_manifest(b);
    CHECK(info.package_name == "com.example.fixture");
    CHECK(info.intent_actions == std::set<std::string>{"android.intent.action.BOOT_COMPLETED"});
}

TEST_CASE("garbage is BadManifest")
{
    CHECK(is_bad_manifest(to_bytes("garbage")));
    CHECK(is_bad_manifest({}));
    CHECK(is_bad_manifest(to_bytes("<other/>")));
}

TEST_CASE("binary and plaintext encodings agree")
{
    auto plain = parse_manifest(to_bytes(manifest_plaintext("com.pair", kPerms, kActions)));
    auto utf16 = parse_manifest(AxmlWriter(false).write(manifest_tree("com.pair", kPerms, kActions)));
    auto utf8 = parse_manifest(AxmlWriter(true).write(manifest_tree("com.pair", kPerms, kActions)));
    CHECK(plain == utf16);
    CHECK(plain == utf8);
}

TEST_CASE("truncated binary manifests never parse")
{
    auto full = AxmlWriter().write(manifest_tree("com.t", kPerms, kActions));
    for (std::size_t n = 0; n < full.size(); ++n) {
        Bytes cut(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
        CHECK(is_bad_manifest(cut));
    }
}

TEST_CASE("chunk size beyond document is rejected")
{
    auto b = AxmlWriter().write(manifest_tree("com.t", {}, kActions));
    set32(b, 8 + 4, 0x7fffffff);
    CHECK(is_bad_manifest(b));
}
