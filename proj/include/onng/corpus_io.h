//
// Copyright 2026 The ONNG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef ONNG_CORPUS_IO_H_
#define ONNG_CORPUS_IO_H_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "onng/corpus.h"

namespace onng {

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never observe
// a partial file.
void write_file(const std::filesystem::path& path, std::string_view content);

// Loads a corpus directory described by its `corpus.toml`.
Corpus load_corpus_dir(const std::filesystem::path& dir);

// Writes module files plus a `corpus.toml` that load_corpus_dir accepts.
void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);

// Canonical structured dump with stable field order.
nlohmann::ordered_json corpus_to_json(const Corpus& corpus);
// Rebuilds a corpus from the module sources recorded by corpus_to_json.
Corpus corpus_from_json(const nlohmann::json& doc);

// Accepts a corpus directory or a corpus.json file.
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace onng

#endif  // ONNG_CORPUS_IO_H_
