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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "skewjoin/error.hpp"

namespace skewjoin {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// One seeded hash function per attribute. The attribute seed is derived from
/// the master seed and the attribute name, so hash functions of different
/// attributes are independent while staying reproducible.
class HashFamily {
 public:
  explicit HashFamily(std::uint64_t master_seed = 0) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const { return master_seed_; }

  std::uint64_t seed_for(std::string_view attribute) const {
    return splitmix64(master_seed_ ^ splitmix64(fnv1a64(attribute)));
  }

  std::uint64_t hash(std::string_view attribute, std::string_view value) const {
    return splitmix64(fnv1a64(value, seed_for(attribute)));
  }

  std::uint64_t bucket(std::string_view attribute, std::string_view value, std::uint64_t share) const {
    if (share == 0) fail(ErrorKind::kInvalidArgument, "share must be >= 1");
    return hash(attribute, value) % share;
  }

 private:
  std::uint64_t master_seed_;
};

}  // namespace skewjoin
