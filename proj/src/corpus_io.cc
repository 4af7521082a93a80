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

#include "onng/corpus_io.h"

#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "onng/error.h"
#include "onng/tactics.h"

namespace onng {

namespace fs = std::filesystem;

namespace {

constexpr int kCorpusSchema = 1;

struct ModuleSpec {
  std::string label;
  std::string file;
  std::string source;
};

Corpus build(const std::vector<ModuleSpec>& modules,
             const std::string& toolchain,
             const std::set<std::string>& tactics) {
  std::vector<Declaration> all;
  for (const ModuleSpec& m : modules) {
    const auto tokens = tokenize(m.source);
    auto decls = parse_declarations(tokens, m.label);
    for (auto& d : decls) all.push_back(std::move(d));
  }
  Corpus corpus = order_by_dependency(std::move(all));
  corpus.toolchain = toolchain;
  if (!tactics.empty()) corpus.tactic_whitelist = tactics;
  for (const std::string& t : corpus.tactic_whitelist) {
    if (forbidden_tactic_names().count(t)) {
      throw Error(ErrorCode::kConfigError,
                  "tactic whitelist contains forbidden tactic `" + t + "`");
    }
  }
  // Keep the declared module order and file names, including modules that
  // ordering did not touch.
  corpus.module_labels.clear();
  for (const ModuleSpec& m : modules) {
    corpus.module_labels.push_back(m.label);
    corpus.module_files.push_back(m.file);
  }
  return corpus;
}

std::string toml_quote(const std::string& text) {
  std::ostringstream out;
  out << toml::value<std::string>(text);
  return out.str();
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write " + tmp.string());
  }
  fs::rename(tmp, path);
}

Corpus load_corpus_dir(const fs::path& dir) {
  const fs::path manifest = dir / "corpus.toml";
  toml::table doc;
  try {
    doc = toml::parse_file(manifest.string());
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::kConfigError,
                manifest.string() + ": " + std::string(e.description()));
  }
  const std::string toolchain = doc["toolchain"].value_or(std::string("v4.27.0"));
  std::set<std::string> tactics;
  if (const auto* arr = doc["tactics"].as_array()) {
    for (const auto& v : *arr) {
      if (auto s = v.value<std::string>()) tactics.insert(*s);
    }
  }
  std::vector<ModuleSpec> modules;
  const auto* mods = doc["module"].as_array();
  if (mods == nullptr || mods->empty()) {
    throw Error(ErrorCode::kConfigError, manifest.string() + ": no [[module]]");
  }
  for (const auto& node : *mods) {
    const auto* t = node.as_table();
    if (t == nullptr) continue;
    ModuleSpec m;
    m.label = (*t)["label"].value_or(std::string());
    m.file = (*t)["file"].value_or(std::string());
    if (m.label.empty() || m.file.empty()) {
      throw Error(ErrorCode::kConfigError,
                  manifest.string() + ": module needs label and file");
    }
    m.source = read_file(dir / m.file);
    modules.push_back(std::move(m));
  }
  return build(modules, toolchain, tactics);
}

void write_corpus_dir(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::string manifest =
      "toolchain = " + toml_quote(corpus.toolchain) + "\ntactics = [";
  bool first = true;
  for (const std::string& t : corpus.tactic_whitelist) {
    manifest += (first ? "" : ", ") + toml_quote(t);
    first = false;
  }
  manifest += "]\n";
  for (std::size_t i = 0; i < corpus.module_labels.size(); ++i) {
    const std::string& label = corpus.module_labels[i];
    const std::string file = i < corpus.module_files.size()
                                 ? corpus.module_files[i]
                                 : "module_" + std::to_string(i + 1) + ".lean";
    write_file(dir / file, corpus.module_source(label));
    manifest += "\n[[module]]\nlabel = " + toml_quote(label) + "\n";
    manifest += "file = " + toml_quote(file) + "\n";
  }
  write_file(dir / "corpus.toml", manifest);
}

nlohmann::ordered_json corpus_to_json(const Corpus& corpus) {
  nlohmann::ordered_json doc;
  doc["schema"] = kCorpusSchema;
  doc["toolchain"] = corpus.toolchain;
  doc["tactic_whitelist"] = corpus.tactic_whitelist;
  doc["theorem_count"] = corpus.theorem_count();
  auto modules = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < corpus.module_labels.size(); ++i) {
    nlohmann::ordered_json m;
    m["label"] = corpus.module_labels[i];
    m["file"] = i < corpus.module_files.size() ? corpus.module_files[i] : "";
    m["source"] = corpus.module_source(corpus.module_labels[i]);
    modules.push_back(std::move(m));
  }
  doc["modules"] = std::move(modules);
  auto decls = nlohmann::ordered_json::array();
  for (const Declaration& d : corpus.declarations) {
    nlohmann::ordered_json j;
    j["index"] = d.index;
    j["kind"] = decl_kind_name(d.kind);
    j["name"] = d.name;
    j["module"] = d.module_label;
    if (!d.constructors.empty()) j["constructors"] = d.constructors;
    j["statement"] = render(d.statement());
    j["proof_body"] = render(d.proof_body());
    j["referenced_names"] = d.referenced_names;
    decls.push_back(std::move(j));
  }
  doc["declarations"] = std::move(decls);
  return doc;
}

Corpus corpus_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", 0) != kCorpusSchema) {
    throw Error(ErrorCode::kConfigError, "unsupported corpus.json schema");
  }
  std::vector<ModuleSpec> modules;
  for (const auto& m : doc.at("modules")) {
    modules.push_back({m.at("label").get<std::string>(),
                       m.at("file").get<std::string>(),
                       m.at("source").get<std::string>()});
  }
  return build(modules, doc.value("toolchain", std::string("v4.27.0")),
               doc.value("tactic_whitelist", std::set<std::string>{}));
}

Corpus load_corpus(const fs::path& path) {
  if (fs::is_directory(path)) return load_corpus_dir(path);
  try {
    return corpus_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace onng
