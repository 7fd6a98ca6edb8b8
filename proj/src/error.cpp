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

#include "apkbayes/error.hpp"

namespace apkbayes {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::BadContainer: return "BadContainer";
    case ErrorKind::UnsupportedCompression: return "UnsupportedCompression";
    case ErrorKind::EntryNotFound: return "EntryNotFound";
    case ErrorKind::CorruptEntry: return "CorruptEntry";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::BadStringEncoding: return "BadStringEncoding";
    case ErrorKind::BadManifest: return "BadManifest";
    case ErrorKind::BadCatalog: return "BadCatalog";
    case ErrorKind::NoDex: return "NoDex";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::UnlabeledSample: return "UnlabeledSample";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::BadModel: return "BadModel";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::OneClassOnly: return "OneClassOnly";
    case ErrorKind::NoReadableSamples: return "NoReadableSamples";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::BadStore: return "BadStore";
    case ErrorKind::CatalogMismatch: return "CatalogMismatch";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message)
    , kind_(kind)
{
}

}  // namespace apkbayes
