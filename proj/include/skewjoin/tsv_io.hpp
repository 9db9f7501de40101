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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

// Relation file layout:
//   #relation<TAB>R
//   #attrs<TAB>A<TAB>B
//   1<TAB>2
//   ...

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

inline void check_token(const std::string& token) {
  if (token.find_first_of("\t\n\r") != std::string::npos) {
    fail(ErrorKind::kInvalidArgument, "value token contains a tab or newline");
  }
}

}  // namespace detail

inline void write_relation_tsv(std::ostream& out, const RelationSchema& schema, const std::vector<Row>& rows) {
  out << "#relation\t" << schema.name << '\n' << "#attrs";
  for (const auto& a : schema.attributes) out << '\t' << a;
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      detail::check_token(row[i]);
      if (i > 0) out << '\t';
      out << row[i];
    }
    out << '\n';
  }
}

/// Reads one relation file into `store`. The header must name a relation of
/// `spec` and repeat its attribute list. `source` labels error messages.
inline std::size_t read_relation_tsv(std::istream& in, const JoinSpec& spec, TupleStore& store,
                                     const std::string& source = "<stream>") {
  auto where = [&](std::size_t line) { return source + ":" + std::to_string(line) + ": "; };
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kParse, where(1) + "missing #relation header");
  auto header = detail::split_tabs(line);
  if (header.size() != 2 || header[0] != "#relation") fail(ErrorKind::kParse, where(1) + "expected '#relation<TAB>name'");
  const auto relation = spec.relation_index(header[1]);
  if (!relation) fail(ErrorKind::kParse, where(1) + "unknown relation '" + header[1] + "'");
  const auto& schema = spec.relations()[*relation];

  if (!std::getline(in, line)) fail(ErrorKind::kParse, where(2) + "missing #attrs header");
  auto attrs = detail::split_tabs(line);
  if (attrs.empty() || attrs[0] != "#attrs") fail(ErrorKind::kParse, where(2) + "expected '#attrs<TAB>...'");
  attrs.erase(attrs.begin());
  if (attrs != schema.attributes) {
    fail(ErrorKind::kParse, where(2) + "attributes do not match relation '" + schema.name + "'");
  }

  std::size_t count = 0;
  for (std::size_t number = 3; std::getline(in, line); ++number) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto values = detail::split_tabs(line);
    if (values.size() != schema.arity()) {
      fail(ErrorKind::kParse, where(number) + "expected " + std::to_string(schema.arity()) + " values, found " +
                                  std::to_string(values.size()));
    }
    store.add(*relation, std::move(values));
    ++count;
  }
  return count;
}

inline void write_relation_file(const std::filesystem::path& path, const RelationSchema& schema,
                                const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  write_relation_tsv(out, schema, rows);
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline std::size_t read_relation_file(const std::filesystem::path& path, const JoinSpec& spec, TupleStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return read_relation_tsv(in, spec, store, path.string());
}

}  // namespace skewjoin
