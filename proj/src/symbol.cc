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

#include "nc/symbol.h"

#include <memory>
#include <mutex>
#include <unordered_map>

namespace nc {
namespace {

struct Interner {
  std::mutex mu;
  std::unordered_map<std::string_view, std::unique_ptr<std::string>> table;
};

Interner& interner() {
  static Interner* instance = new Interner;
  return *instance;
}

const std::string& empty_string() {
  static const std::string* s = new std::string;
  return *s;
}

}  // namespace

Symbol::Symbol(std::string_view text) {
  Interner& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.table.find(text);
  if (it == in.table.end()) {
    auto owned = std::make_unique<std::string>(text);
    std::string_view key = *owned;
    it = in.table.emplace(key, std::move(owned)).first;
  }
  text_ = it->second.get();
}

const std::string& Symbol::str() const {
  return text_ == nullptr ? empty_string() : *text_;
}

}  // namespace nc
