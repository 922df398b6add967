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

#ifndef NC_VALUE_TREE_H_
#define NC_VALUE_TREE_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nc/ast.h"

namespace nc {

struct ValueTree;
using TreePtr = std::shared_ptr<const ValueTree>;

struct ValueTree {
  Value root;
  std::vector<TreePtr> children;
};

TreePtr leaf(Value v);
TreePtr node(Value v, std::vector<TreePtr> children);

// Theta: device id -> value-tree, ordered by id.
class TreeEnv {
 public:
  using Entry = std::pair<DeviceId, TreePtr>;

  TreeEnv() = default;
  // Later entries win on duplicate ids.
  explicit TreeEnv(std::vector<Entry> entries);

  const TreePtr* find(DeviceId d) const;
  bool contains(DeviceId d) const { return find(d) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }
  std::vector<DeviceId> domain() const;

  TreeEnv with(DeviceId d, TreePtr t) const;
  TreeEnv without(DeviceId d) const;

  bool operator==(const TreeEnv& other) const;

  // Entries already sorted by id without duplicates.
  static TreeEnv from_sorted(std::vector<Entry> entries);

 private:
  std::vector<Entry> entries_;
};

// pi_i, 1-based; null when absent.
TreePtr subtree_i(const TreePtr& t, std::size_t i);
// pi^f: the last child when the first child's root has the name of f.
TreePtr subtree_f(const TreePtr& t, const Value& f);
TreeEnv project_i(const TreeEnv& env, std::size_t i);
TreeEnv project_f(const TreeEnv& env, const Value& f);

// `<v>(c1, c2)` for internal nodes, the bare value for leaves.
std::string serialize(const TreePtr& t);
std::string serialize(const TreeEnv& env);
bool trees_equal(const TreePtr& a, const TreePtr& b);

}  // namespace nc

#endif  // NC_VALUE_TREE_H_
