#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cql/dataset.hpp"

namespace cql {

// Binary test: does the item have value `value` for `feature`?
struct SplitTest {
  std::int32_t feature = 0;
  std::int32_t value = 0;

  bool operator==(const SplitTest&) const = default;
};

enum class LeafLabel { positive, negative, mixed };

// A fitted leaf. `members` are indices into the training sequence the tree
// was fit on (positives first, then negatives); `path` lists the tests from
// the root with the branch taken (true = test passed).
struct LeafInfo {
  int id = 0;
  LeafLabel label = LeafLabel::negative;
  std::vector<std::int32_t> members;
  std::vector<std::pair<SplitTest, bool>> path;
};

struct TreeNode {
  SplitTest test;
  std::int32_t pass_child = -1;  // left
  std::int32_t fail_child = -1;  // right
  std::int32_t leaf = -1;        // index into leaves when this node is a leaf
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<LeafInfo> leaves;

  std::size_t node_count() const { return nodes.size(); }
};

// Grows a binary CART on one-hot (feature = value) tests with Gini impurity,
// no depth limit, no pruning, no minimum leaf size, down to pure leaves.
// Split scores are compared with exact integer arithmetic; ties prefer the
// lowest (feature, value). Impure nodes keep splitting even through zero-gain
// plateaus as long as some test separates the items, so with conflict-free
// input every leaf ends pure. Throws LabelConflictError when an identical
// value-vector appears in both classes. `seed` is reserved; growth is fully
// deterministic.
DecisionTree fit_tree(std::span<const Item> positives, std::span<const Item> negatives,
                      const Schema& schema, std::uint64_t seed = 0);

// Positive leaves in left-to-right order (pass branch first).
std::vector<LeafInfo> positive_leaves(const DecisionTree& tree);

std::string dump_tree(const DecisionTree& tree, const Schema& schema);

}  // namespace cql
