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

#ifndef NC_PARSER_H_
#define NC_PARSER_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nc/ast.h"
#include "nc/builtins.h"

namespace nc {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const SourceSpan& span, std::vector<std::string> expected,
              const std::string& message);
  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  SourceSpan span_;
  std::vector<std::string> expected_;
};

struct SourceFile {
  std::string name;
  std::string text;
};

struct ParseOptions {
  std::string program_id = "main";
  const Builtins* builtins = nullptr;  // defaults to Builtins::standard()
  // Declaration-only sources loaded before the main source.
  std::vector<SourceFile> prelude;
  bool desugar = true;
  bool tag = true;
};

Program parse_program(std::string_view source, const ParseOptions& options = {},
                      const std::string& file = "<input>");

// A single expression; identifiers resolve against `context`'s functions and
// the built-ins. Not tagged.
ExprPtr parse_expression(std::string_view source,
                         const Program* context = nullptr,
                         const Builtins* builtins = nullptr);

// Replaces If and Let nodes by their lambda encodings.
ExprPtr desugar(const ExprPtr& e);

std::string pretty_print(const Program& p);
std::string pretty_print(const ExprPtr& e);

}  // namespace nc

#endif  // NC_PARSER_H_
