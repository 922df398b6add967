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

#include "nc/value_tree.h"

#include <algorithm>

namespace nc {

TreePtr leaf(Value v) {
  return std::make_shared<const ValueTree>(ValueTree{std::move(v), {}});
}

TreePtr node(Value v, std::vector<TreePtr> children) {
  return std::make_shared<const ValueTree>(
      ValueTree{std::move(v), std::move(children)});
}

TreeEnv::TreeEnv(std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (Entry& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back() = std::move(e);
    } else {
      entries_.push_back(std::move(e));
    }
  }
}

TreeEnv TreeEnv::from_sorted(std::vector<Entry> entries) {
  TreeEnv out;
  out.entries_ = std::move(entries);
  return out;
}

const TreePtr* TreeEnv::find(DeviceId d) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), d,
      [](const Entry& e, DeviceId id) { return e.first < id; });
  if (it == entries_.end() || it->first != d) return nullptr;
  return &it->second;
}

std::vector<DeviceId> TreeEnv::domain() const {
  std::vector<DeviceId> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.first);
  return out;
}

TreeEnv TreeEnv::with(DeviceId d, TreePtr t) const {
  TreeEnv out;
  out.entries_.reserve(entries_.size() + 1);
  bool placed = false;
  for (const Entry& e : entries_) {
    if (!placed && e.first >= d) {
      out.entries_.emplace_back(d, t);
      placed = true;
      if (e.first == d) continue;
    }
    out.entries_.push_back(e);
  }
  if (!placed) out.entries_.emplace_back(d, std::move(t));
  return out;
}

TreeEnv TreeEnv::without(DeviceId d) const {
  TreeEnv out;
  for (const Entry& e : entries_) {
    if (e.first != d) out.entries_.push_back(e);
  }
  return out;
}

bool TreeEnv::operator==(const TreeEnv& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first ||
        !trees_equal(entries_[i].second, other.entries_[i].second)) {
      return false;
    }
  }
  return true;
}

TreePtr subtree_i(const TreePtr& t, std::size_t i) {
  if (i == 0 || i > t->children.size()) return nullptr;
  return t->children[i - 1];
}

TreePtr subtree_f(const TreePtr& t, const Value& f) {
  if (t->children.empty()) return nullptr;
  const Value& head = t->children.front()->root;
  if (!head.is_function() || head.function_name() != f.function_name()) {
    return nullptr;
  }
  return t->children.back();
}

TreeEnv project_i(const TreeEnv& env, std::size_t i) {
  std::vector<TreeEnv::Entry> out;
  out.reserve(env.size());
  for (const auto& [d, t] : env) {
    if (i > 0 && i <= t->children.size()) out.emplace_back(d, t->children[i - 1]);
  }
  return TreeEnv::from_sorted(std::move(out));
}

TreeEnv project_f(const TreeEnv& env, const Value& f) {
  std::vector<TreeEnv::Entry> out;
  out.reserve(env.size());
  for (const auto& [d, t] : env) {
    if (TreePtr s = subtree_f(t, f)) out.emplace_back(d, std::move(s));
  }
  return TreeEnv::from_sorted(std::move(out));
}

namespace {

void serialize_into(const TreePtr& t, std::string* out) {
  if (t->children.empty()) {
    *out += to_string(t->root);
    return;
  }
  *out += "<" + to_string(t->root) + ">(";
  for (std::size_t i = 0; i < t->children.size(); ++i) {
    if (i > 0) *out += ", ";
    serialize_into(t->children[i], out);
  }
  *out += ")";
}

}  // namespace

std::string serialize(const TreePtr& t) {
  std::string out;
  serialize_into(t, &out);
  return out;
}

std::string serialize(const TreeEnv& env) {
  std::string out = "{";
  bool first = true;
  for (const auto& [d, t] : env) {
    if (!first) out += ", ";
    first = false;
    out += std::to_string(d) + " -> " + serialize(t);
  }
  return out + "}";
}

bool trees_equal(const TreePtr& a, const TreePtr& b) {
  if (a == b) return true;
  if (a->root != b->root || a->children.size() != b->children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!trees_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

}  // namespace nc
