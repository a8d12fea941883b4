#include "cql/learner.hpp"

#include <algorithm>
#include <unordered_set>

#include "cql/error.hpp"
#include "cql/negatives.hpp"

namespace cql {

std::string to_string(NegativeMethod m) {
  return m == NegativeMethod::likelihood ? "likelihood" : "rocchio";
}

std::string to_string(QueryType t) { return t == QueryType::dt ? "dt" : "items"; }

NegativeMethod parse_negative_method(std::string_view s) {
  if (s == "likelihood") return NegativeMethod::likelihood;
  if (s == "rocchio") return NegativeMethod::rocchio;
  throw Error("unknown negative method '" + std::string(s) + "' (expected likelihood|rocchio)");
}

QueryType parse_query_type(std::string_view s) {
  if (s == "dt") return QueryType::dt;
  if (s == "items") return QueryType::items;
  throw Error("unknown query type '" + std::string(s) + "' (expected dt|items)");
}

ConjunctiveQuery leaf_to_dt_query(const LeafInfo& leaf, const Schema& schema) {
  // allowed[f] empty marker means "unconstrained"; a real empty set is an error
  std::vector<std::vector<char>> allowed(static_cast<std::size_t>(schema.feature_count()));
  for (const auto& [test, passed] : leaf.path) {
    if (test.feature < 0 || test.feature >= schema.feature_count())
      throw Error("leaf_to_dt_query: test feature out of schema range");
    auto& dom = allowed[static_cast<std::size_t>(test.feature)];
    if (dom.empty()) dom.assign(static_cast<std::size_t>(schema.domain_size(test.feature)), 1);
    if (passed) {
      for (std::size_t v = 0; v < dom.size(); ++v)
        dom[v] = (static_cast<std::int32_t>(v) == test.value) ? dom[v] : 0;
    } else {
      dom[static_cast<std::size_t>(test.value)] = 0;
    }
  }
  ConjunctiveQuery q;
  for (int f = 0; f < schema.feature_count(); ++f) {
    const auto& dom = allowed[static_cast<std::size_t>(f)];
    if (dom.empty()) continue;  // never tested on the path
    Clause clause;
    clause.feature = f;
    for (std::size_t v = 0; v < dom.size(); ++v)
      if (dom[v]) clause.values.push_back(static_cast<std::int32_t>(v));
    if (clause.values.empty())
      throw Error("leaf_to_dt_query: contradictory path constraints for feature '" +
                  schema.feature(f).name + "'");
    q.clauses.push_back(std::move(clause));
  }
  return normalized(std::move(q), schema);
}

ConjunctiveQuery leaf_to_items_query(const LeafInfo& leaf, std::span<const Item> positives,
                                     const Schema& schema) {
  std::vector<Item> members;
  members.reserve(leaf.members.size());
  for (std::int32_t idx : leaf.members) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= positives.size())
      throw Error("leaf_to_items_query: member index " + std::to_string(idx) +
                  " is not a positive training item");
    members.push_back(positives[static_cast<std::size_t>(idx)]);
  }
  return most_specific_query(members, schema);
}

std::size_t drop_conflicting_negatives(std::span<const Item> positives,
                                       std::vector<Item>& negatives) {
  std::unordered_set<std::vector<std::int32_t>, ValueVectorHash> positive_values;
  for (const Item& item : positives) positive_values.insert(item.values);
  const std::size_t before = negatives.size();
  std::erase_if(negatives,
                [&](const Item& item) { return positive_values.count(item.values) > 0; });
  return before - negatives.size();
}

bool keep_leaf(std::size_t leaf_size, std::size_t sample_size, double discard) {
  // inclusive threshold; the epsilon absorbs binary rounding in d * |S|
  return static_cast<double>(leaf_size) >=
         discard * static_cast<double>(sample_size) - 1e-9;
}

LearnOutcome learn_concept_query(std::span<const Item> s, const Dataset& data,
                                 const LearnerConfig& config) {
  if (s.empty()) throw Error("learn_concept_query: empty positive set");
  if (config.discard < 0.0 || config.discard > 1.0)
    throw Error("learn_concept_query: discard threshold must be in [0, 1]");

  std::vector<ItemId> negative_ids = config.method == NegativeMethod::likelihood
                                         ? likelihood_negatives(s, data)
                                         : rocchio_negatives(s, data);
  if (negative_ids.empty())
    throw EmptyNegativesError("no reliable negatives found with the " +
                              to_string(config.method) + " method");
  std::vector<Item> negatives = data.items_by_ids(negative_ids);

  LearnReport report;
  report.n_positives = s.size();
  report.dropped_conflicts = drop_conflicting_negatives(s, negatives);
  if (negatives.empty())
    throw EmptyNegativesError("all reliable negatives duplicate positive value-vectors");
  report.n_negatives = negatives.size();

  DecisionTree tree = fit_tree(s, negatives, data.schema, config.seed);
  report.tree_nodes = tree.node_count();
  report.tree_leaves = tree.leaves.size();

  ConceptQuery query;
  for (const LeafInfo& leaf : positive_leaves(tree)) {
    if (!keep_leaf(leaf.members.size(), s.size(), config.discard)) {
      ++report.discarded_leaves;
      continue;
    }
    ++report.kept_leaves;
    query.disjuncts.push_back(config.type == QueryType::dt
                                  ? leaf_to_dt_query(leaf, data.schema)
                                  : leaf_to_items_query(leaf, s, data.schema));
  }
  report.empty_query = query.disjuncts.empty();
  return LearnOutcome{std::move(query), report};
}

}  // namespace cql
