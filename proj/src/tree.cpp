#include "cql/tree.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "cql/error.hpp"

namespace cql {

namespace {

// Weighted child impurity of a binary split as an exact rational. For a child
// with p positives and q negatives (c = p + q), c * gini = (c^2 - p^2 - q^2)/c,
// so the split score is A1/c1 + A0/c0 = (A1*c0 + A0*c1) / (c1*c0). Lower is
// better; comparisons cross-multiply in 128 bits, so equal scores tie exactly.
struct SplitScore {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

SplitScore score_split(std::int64_t p1, std::int64_t q1, std::int64_t p0, std::int64_t q0) {
  const std::int64_t c1 = p1 + q1;
  const std::int64_t c0 = p0 + q0;
  const std::int64_t a1 = c1 * c1 - p1 * p1 - q1 * q1;
  const std::int64_t a0 = c0 * c0 - p0 * p0 - q0 * q0;
  return SplitScore{a1 * c0 + a0 * c1, c1 * c0};
}

int compare(const SplitScore& a, const SplitScore& b) {
  const __int128 lhs = static_cast<__int128>(a.num) * b.den;
  const __int128 rhs = static_cast<__int128>(b.num) * a.den;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

struct Fitter {
  const Schema& schema;
  std::vector<const Item*> items;   // positives first
  std::vector<std::uint8_t> label;  // 1 = positive
  std::vector<std::int32_t> order;  // permutation partitioned in place
  DecisionTree tree;
  std::vector<std::pair<SplitTest, bool>> path;
  std::vector<std::int64_t> total_count;  // scratch, schema.binary_width()
  std::vector<std::int64_t> pos_count;

  explicit Fitter(const Schema& s) : schema(s) {
    total_count.assign(static_cast<std::size_t>(s.binary_width()), 0);
    pos_count.assign(static_cast<std::size_t>(s.binary_width()), 0);
  }

  std::int32_t make_leaf(std::int32_t lo, std::int32_t hi, LeafLabel lbl) {
    LeafInfo leaf;
    leaf.id = static_cast<int>(tree.leaves.size());
    leaf.label = lbl;
    leaf.members.assign(order.begin() + lo, order.begin() + hi);
    std::sort(leaf.members.begin(), leaf.members.end());
    leaf.path = path;
    tree.leaves.push_back(std::move(leaf));
    TreeNode node;
    node.leaf = static_cast<std::int32_t>(tree.leaves.size()) - 1;
    tree.nodes.push_back(node);
    return static_cast<std::int32_t>(tree.nodes.size()) - 1;
  }

  std::int32_t grow(std::int32_t lo, std::int32_t hi) {
    const std::int64_t n = hi - lo;
    std::int64_t pos = 0;
    for (std::int32_t i = lo; i < hi; ++i) pos += label[static_cast<std::size_t>(order[i])];
    const std::int64_t neg = n - pos;
    if (pos == 0) return make_leaf(lo, hi, LeafLabel::negative);
    if (neg == 0) return make_leaf(lo, hi, LeafLabel::positive);

    for (std::int32_t i = lo; i < hi; ++i) {
      const Item& item = *items[static_cast<std::size_t>(order[i])];
      const std::uint8_t lbl = label[static_cast<std::size_t>(order[i])];
      for (int f = 0; f < schema.feature_count(); ++f) {
        const std::size_t idx = static_cast<std::size_t>(
            schema.block_offset(f) + item.values[static_cast<std::size_t>(f)]);
        ++total_count[idx];
        pos_count[idx] += lbl;
      }
    }

    bool found = false;
    SplitTest best_test;
    SplitScore best_score;
    for (int f = 0; f < schema.feature_count(); ++f) {
      const std::size_t off = static_cast<std::size_t>(schema.block_offset(f));
      for (int v = 0; v < schema.domain_size(f); ++v) {
        const std::int64_t c1 = total_count[off + static_cast<std::size_t>(v)];
        if (c1 == 0 || c1 == n) continue;  // a valid test must split the node
        const std::int64_t p1 = pos_count[off + static_cast<std::size_t>(v)];
        const SplitScore s = score_split(p1, c1 - p1, pos - p1, neg - (c1 - p1));
        if (!found || compare(s, best_score) < 0) {
          found = true;
          best_test = SplitTest{f, v};
          best_score = s;
        }
      }
    }

    // reset scratch for the block we touched
    for (std::int32_t i = lo; i < hi; ++i) {
      const Item& item = *items[static_cast<std::size_t>(order[i])];
      for (int f = 0; f < schema.feature_count(); ++f) {
        const std::size_t idx = static_cast<std::size_t>(
            schema.block_offset(f) + item.values[static_cast<std::size_t>(f)]);
        total_count[idx] = 0;
        pos_count[idx] = 0;
      }
    }

    // No test separates the node: every item carries the same value-vector,
    // so an impure node here means label-conflicting duplicates.
    if (!found) return make_leaf(lo, hi, LeafLabel::mixed);

    auto mid_it = std::stable_partition(
        order.begin() + lo, order.begin() + hi, [&](std::int32_t idx) {
          return items[static_cast<std::size_t>(idx)]
                     ->values[static_cast<std::size_t>(best_test.feature)] == best_test.value;
        });
    const auto mid = static_cast<std::int32_t>(mid_it - order.begin());

    const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(node_index)].test = best_test;

    path.emplace_back(best_test, true);
    const std::int32_t pass = grow(lo, mid);
    path.back().second = false;
    const std::int32_t fail = grow(mid, hi);
    path.pop_back();

    tree.nodes[static_cast<std::size_t>(node_index)].pass_child = pass;
    tree.nodes[static_cast<std::size_t>(node_index)].fail_child = fail;
    return node_index;
  }
};

}  // namespace

DecisionTree fit_tree(std::span<const Item> positives, std::span<const Item> negatives,
                      const Schema& schema, std::uint64_t /*seed*/) {
  if (positives.empty()) throw Error("fit_tree: no positive training items");
  if (negatives.empty()) throw Error("fit_tree: no negative training items");

  std::unordered_set<std::vector<std::int32_t>, ValueVectorHash> positive_values;
  for (const Item& item : positives) {
    validate_item(item, schema);
    positive_values.insert(item.values);
  }
  std::size_t conflicts = 0;
  for (const Item& item : negatives) {
    validate_item(item, schema);
    if (positive_values.count(item.values)) ++conflicts;
  }
  if (conflicts > 0)
    throw LabelConflictError(
        std::to_string(conflicts) + " negative item(s) share a value-vector with a positive item",
        conflicts);

  Fitter fitter(schema);
  fitter.items.reserve(positives.size() + negatives.size());
  for (const Item& item : positives) fitter.items.push_back(&item);
  for (const Item& item : negatives) fitter.items.push_back(&item);
  fitter.label.assign(positives.size(), 1);
  fitter.label.resize(positives.size() + negatives.size(), 0);
  fitter.order.resize(fitter.items.size());
  for (std::size_t i = 0; i < fitter.order.size(); ++i)
    fitter.order[i] = static_cast<std::int32_t>(i);

  // nodes[0] must be the root: grow() appends the root node first
  fitter.grow(0, static_cast<std::int32_t>(fitter.order.size()));
  return std::move(fitter.tree);
}

std::vector<LeafInfo> positive_leaves(const DecisionTree& tree) {
  std::vector<LeafInfo> out;
  for (const LeafInfo& leaf : tree.leaves)
    if (leaf.label == LeafLabel::positive) out.push_back(leaf);
  return out;
}

namespace {

void dump_node(const DecisionTree& tree, const Schema& schema, std::int32_t node,
               int indent, std::ostringstream& out) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (n.leaf >= 0) {
    const LeafInfo& leaf = tree.leaves[static_cast<std::size_t>(n.leaf)];
    const char* lbl = leaf.label == LeafLabel::positive   ? "positive"
                      : leaf.label == LeafLabel::negative ? "negative"
                                                          : "mixed";
    out << pad << "leaf " << lbl << " (" << leaf.members.size() << " items)\n";
    return;
  }
  out << pad << "[" << schema.feature(n.test.feature).name << " = "
      << schema.feature(n.test.feature).values[static_cast<std::size_t>(n.test.value)] << "]\n";
  out << pad << "yes:\n";
  dump_node(tree, schema, n.pass_child, indent + 1, out);
  out << pad << "no:\n";
  dump_node(tree, schema, n.fail_child, indent + 1, out);
}

}  // namespace

std::string dump_tree(const DecisionTree& tree, const Schema& schema) {
  std::ostringstream out;
  if (!tree.nodes.empty()) dump_node(tree, schema, 0, 0, out);
  return out.str();
}

}  // namespace cql
