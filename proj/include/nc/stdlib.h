// Copyright 2026 The nc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NC_STDLIB_H_
#define NC_STDLIB_H_

#include <string>
#include <string_view>
#include <vector>

#include "nc/parser.h"

namespace nc {

// The shipped .nc library, in load order.
const std::vector<SourceFile>& stdlib_sources();

// Parses a user program with the library loaded first.
Program parse_with_stdlib(std::string_view source,
                          const std::string& file = "<input>",
                          const Builtins* builtins = nullptr);

struct StdlibEntry {
  std::string name;
  std::string file;
  std::string scheme;      // inferred
  std::string restricted;  // restricted scheme, or the diagnostic
  bool in_fragment = false;
};

std::vector<StdlibEntry> stdlib_catalog();

// `p` restricted to `name` and the declarations it depends on.
Program dependency_closure(const Program& p, Symbol name);

}  // namespace nc

#endif  // NC_STDLIB_H_
