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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apkbayes {

enum class Label { Benign, Suspicious, Unlabeled };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

/// One bit per catalog feature, in catalog order.
using FeatureBits = std::vector<bool>;

struct AppProfile {
    std::string source_id;
    Label label = Label::Unlabeled;
    std::optional<std::string> family;
    FeatureBits bits;
    std::vector<std::string> diagnostics;

    friend bool operator==(const AppProfile&, const AppProfile&) = default;
};

}  // namespace apkbayes
