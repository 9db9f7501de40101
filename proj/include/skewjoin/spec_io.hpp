/*
 * Copyright 2026 The skewjoin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tsv_io.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

// {"relations": [{"name": "R", "attributes": ["A", "B"], "size": 100, "file": "R.tsv"}, ...]}
// "size" and "file" are optional; files default to <name>.tsv next to the spec.

struct SpecFile {
  JoinSpec spec;
  std::map<std::string, std::string> files;  // relation -> data file as written
};

inline SpecFile spec_from_json(const nlohmann::json& j) {
  try {
    SpecFile out;
    std::vector<RelationSchema> relations;
    for (const auto& r : j.at("relations")) {
      RelationSchema schema;
      schema.name = r.at("name").get<std::string>();
      schema.attributes = r.at("attributes").get<std::vector<std::string>>();
      if (r.contains("size") && !r.at("size").is_null()) schema.declared_size = r.at("size").get<std::size_t>();
      if (r.contains("file")) out.files[schema.name] = r.at("file").get<std::string>();
      relations.push_back(std::move(schema));
    }
    out.spec = validate_spec(JoinSpec(std::move(relations)));
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed join spec: ") + e.what());
  }
}

inline nlohmann::json spec_to_json(const JoinSpec& spec, const std::map<std::string, std::string>& files = {}) {
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& r : spec.relations()) {
    nlohmann::json entry = {{"name", r.name}, {"attributes", r.attributes}};
    if (r.declared_size) entry["size"] = *r.declared_size;
    auto it = files.find(r.name);
    if (it != files.end()) entry["file"] = it->second;
    relations.push_back(std::move(entry));
  }
  return {{"relations", relations}};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline SpecFile load_spec_file(const std::filesystem::path& path) { return spec_from_json(read_json_file(path)); }

/// Loads every relation of a spec file; relative data paths resolve against
/// the spec's directory. Declared sizes are cross-checked.
inline std::pair<SpecFile, TupleStore> load_dataset(const std::filesystem::path& spec_path) {
  SpecFile file = load_spec_file(spec_path);
  TupleStore store(file.spec);
  const auto base = spec_path.parent_path();
  for (const auto& r : file.spec.relations()) {
    auto it = file.files.find(r.name);
    std::filesystem::path data = it != file.files.end() ? std::filesystem::path(it->second) : std::filesystem::path(r.name + ".tsv");
    if (data.is_relative()) data = base / data;
    read_relation_file(data, file.spec, store);
  }
  store.check_declared_sizes(file.spec);
  return {std::move(file), std::move(store)};
}

/// Writes <dir>/spec.json plus one <name>.tsv per relation; declared sizes
/// are set to the stored counts.
inline void save_dataset(const std::filesystem::path& dir, const JoinSpec& spec, const TupleStore& store) {
  std::filesystem::create_directories(dir);
  std::vector<RelationSchema> relations = spec.relations();
  std::map<std::string, std::string> files;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    relations[r].declared_size = store.size(r);
    files[relations[r].name] = relations[r].name + ".tsv";
    write_relation_file(dir / files[relations[r].name], relations[r], store.rows(r));
  }
  write_json_file(dir / "spec.json", spec_to_json(JoinSpec(relations), files));
}

}  // namespace skewjoin
