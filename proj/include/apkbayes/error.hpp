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

#include <stdexcept>
#include <string>
#include <string_view>

namespace apkbayes {

/// Every recoverable failure in the pipeline carries one of these kinds.
/// Malformed input is always reported through `Error`; anything else that
/// escapes (std::logic_error and friends) is an internal bug.
enum class ErrorKind {
    // container
    BadContainer,
    UnsupportedCompression,
    EntryNotFound,
    CorruptEntry,
    // dex
    BadMagic,
    Truncated,
    BadStringEncoding,
    // manifest
    BadManifest,
    // detect
    BadCatalog,
    NoDex,
    // rank
    EmptyCorpus,
    UnlabeledSample,
    BadK,
    // bayes
    MissingClass,
    EmptyFeatureSet,
    LengthMismatch,
    BadModel,
    // eval
    Empty,
    OneClassOnly,
    // corpus
    NoReadableSamples,
    BadSpec,
    BadStore,
    CatalogMismatch,
    // host
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace apkbayes
