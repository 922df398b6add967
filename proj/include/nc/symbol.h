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

#ifndef NC_SYMBOL_H_
#define NC_SYMBOL_H_

#include <functional>
#include <string>
#include <string_view>

namespace nc {

// Interned identifier. Two symbols are equal iff they point at the same
// interned string.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view text);

  const std::string& str() const;
  bool empty() const { return text_ == nullptr; }

  bool operator==(const Symbol& other) const { return text_ == other.text_; }
  bool operator!=(const Symbol& other) const { return text_ != other.text_; }
  // Lexicographic, so that ordered containers iterate deterministically.
  bool operator<(const Symbol& other) const { return str() < other.str(); }

  std::size_t hash() const { return std::hash<const void*>()(text_); }

 private:
  const std::string* text_ = nullptr;
};

}  // namespace nc

template <>
struct std::hash<nc::Symbol> {
  std::size_t operator()(const nc::Symbol& s) const { return s.hash(); }
};

#endif  // NC_SYMBOL_H_
