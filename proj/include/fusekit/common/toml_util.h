// Copyright 2026 The fusekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// common/toml_util.h
// Small typed accessors over toml++ tables; all failures are kParse errors.

#ifndef FUSEKIT_COMMON_TOML_UTIL_H_
#define FUSEKIT_COMMON_TOML_UTIL_H_

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <toml.hpp>

#include "fusekit/common/error.h"

namespace fusekit::tomlu {

/// Parses TOML text; `what` prefixes error messages.
toml::table Parse(const std::string &text, const std::string &what);

/// Overwrites `out` when `key` is present; type mismatches throw.
template <typename T>
void Read(const toml::table &tbl, const char *key, T &out) {
  const auto *node = tbl.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    auto v = node->value<bool>();
    Check(v.has_value(), Errc::kParse, std::string("expected bool: ") + key);
    out = *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    auto v = node->value<std::string>();
    Check(v.has_value(), Errc::kParse, std::string("expected string: ") + key);
    out = *v;
  } else if constexpr (std::is_integral_v<T>) {
    auto v = node->value<int64_t>();
    Check(v.has_value(), Errc::kParse, std::string("expected integer: ") + key);
    Check(!std::is_unsigned_v<T> || *v >= 0, Errc::kParse,
          std::string("expected non-negative integer: ") + key);
    out = static_cast<T>(*v);
  } else {
    auto v = node->value<double>();
    Check(v.has_value(), Errc::kParse, std::string("expected number: ") + key);
    out = *v;
  }
}

/// Reads an array of numbers (or strings) into `out` when present.
template <typename T>
void ReadArray(const toml::table &tbl, const char *key, std::vector<T> &out) {
  const auto *node = tbl.get(key);
  if (!node) return;
  const auto *arr = node->as_array();
  Check(arr != nullptr, Errc::kParse, std::string("expected array: ") + key);
  out.clear();
  for (const auto &el : *arr) {
    std::optional<T> v;
    if constexpr (std::is_same_v<T, std::string>) {
      v = el.value<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (auto i = el.value<int64_t>()) v = static_cast<T>(*i);
    } else {
      v = el.value<double>();
    }
    Check(v.has_value(), Errc::kParse,
          std::string("unexpected element type in ") + key);
    out.push_back(*v);
  }
}

/// Reads a two-element [lo, hi] array when present.
void ReadRange(const toml::table &tbl, const char *key, double &lo, double &hi);

}  // namespace fusekit::tomlu

#endif  // FUSEKIT_COMMON_TOML_UTIL_H_
