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

#include "fusekit/common/toml_util.h"

#include <sstream>

namespace fusekit::tomlu {

toml::table Parse(const std::string &text, const std::string &what) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error &e) {
    std::ostringstream msg;
    msg << what << ": " << e.description() << " at line "
        << e.source().begin.line;
    Fail(Errc::kParse, msg.str());
  }
}

void ReadRange(const toml::table &tbl, const char *key, double &lo,
               double &hi) {
  std::vector<double> v;
  ReadArray(tbl, key, v);
  if (!tbl.get(key)) return;
  Check(v.size() == 2, Errc::kParse,
        std::string("expected [lo, hi] array: ") + key);
  lo = v[0];
  hi = v[1];
}

}  // namespace fusekit::tomlu
