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

#include "nc/stdlib.h"

#include <set>

#include "nc/restricted.h"
#include "nc/types.h"

namespace nc {

Program parse_with_stdlib(std::string_view source, const std::string& file,
                          const Builtins* builtins) {
  ParseOptions options;
  options.builtins = builtins;
  options.prelude = stdlib_sources();
  return parse_program(source, options, file);
}

namespace {

void referenced(const ExprPtr& e, std::set<Symbol>* out) {
  if (e->kind() == Expression::Kind::kValue &&
      e->value().kind() == Value::Kind::kDefined) {
    out->insert(e->value().as_defined());
  }
  for (const ExprPtr& c : e->children()) referenced(c, out);
}

}  // namespace

Program dependency_closure(const Program& p, Symbol name) {
  std::set<Symbol> needed = {name};
  std::vector<Symbol> todo = {name};
  while (!todo.empty()) {
    Symbol f = todo.back();
    todo.pop_back();
    const FunctionDecl* d = p.find(f);
    if (d == nullptr) continue;
    std::set<Symbol> refs;
    referenced(d->body, &refs);
    for (Symbol r : refs) {
      if (needed.insert(r).second) todo.push_back(r);
    }
  }
  Program out;
  out.id = p.id;
  for (const FunctionDecl& f : p.functions) {
    if (needed.count(f.name) != 0) out.functions.push_back(f);
  }
  out.main = Expression::value(Value::number(0));
  return out;
}

std::vector<StdlibEntry> stdlib_catalog() {
  Program p = parse_with_stdlib("0", "<catalog>");
  ProgramTypes types = infer_program(p);
  std::vector<StdlibEntry> out;
  for (const FunctionDecl& f : p.functions) {
    StdlibEntry e;
    e.name = f.name.str();
    e.file = f.span.file.str();
    e.scheme = to_string(*types.find(f.name));
    try {
      RestrictedProgramTypes r =
          check_restricted_program(dependency_closure(p, f.name));
      for (const auto& [name, scheme] : r.functions) {
        if (name == f.name) e.restricted = to_string(scheme);
      }
      e.in_fragment = true;
    } catch (const TypeError& err) {
      e.restricted = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace nc
