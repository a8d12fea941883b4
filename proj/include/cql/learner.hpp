#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cql/dataset.hpp"
#include "cql/query.hpp"
#include "cql/tree.hpp"

namespace cql {

enum class NegativeMethod { likelihood, rocchio };
enum class QueryType { dt, items };

std::string to_string(NegativeMethod m);
std::string to_string(QueryType t);
NegativeMethod parse_negative_method(std::string_view s);
QueryType parse_query_type(std::string_view s);

struct LearnerConfig {
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  double discard = 0.0;  // leaf kept iff members >= discard * |S|
  std::uint64_t seed = 0;
};

struct LearnReport {
  std::size_t n_positives = 0;
  std::size_t n_negatives = 0;          // used for fitting, after conflict drop
  std::size_t dropped_conflicts = 0;    // negatives discarded for duplicating a positive
  std::size_t tree_nodes = 0;
  std::size_t tree_leaves = 0;
  std::size_t kept_leaves = 0;
  std::size_t discarded_leaves = 0;
  bool empty_query = false;  // every positive leaf fell under the discard threshold
};

struct LearnOutcome {
  ConceptQuery query;
  LearnReport report;
};

// Disjunct for a positive leaf from its root path: a passed test pins the
// feature to that value, a failed test removes the value from the feature's
// remaining domain. Features never tested stay unconstrained.
ConjunctiveQuery leaf_to_dt_query(const LeafInfo& leaf, const Schema& schema);

// Disjunct from the leaf's member items: their most specific query. Members
// must index into `positives` (true for pure positive leaves, which are the
// only ones extracted).
ConjunctiveQuery leaf_to_items_query(const LeafInfo& leaf, std::span<const Item> positives,
                                     const Schema& schema);

// Removes negatives whose value-vector also appears among the positives, so
// the tree can separate the classes. Returns how many were dropped.
std::size_t drop_conflicting_negatives(std::span<const Item> positives,
                                       std::vector<Item>& negatives);

bool keep_leaf(std::size_t leaf_size, std::size_t sample_size, double discard);

// Positive-only concept learning: derive reliable negatives from the catalog,
// fit a tree, and assemble one disjunct per sufficiently large positive leaf.
// Throws EmptyNegativesError when no usable negatives exist.
LearnOutcome learn_concept_query(std::span<const Item> s, const Dataset& data,
                                 const LearnerConfig& config);

}  // namespace cql
