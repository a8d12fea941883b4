#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cql/dataset.hpp"

namespace cql {

// One conjunctive filter clause: the item's value for `feature` must be one
// of `values`. Values are sorted ascending and non-empty; a clause covering
// the whole domain is dropped during normalization, and negated conditions
// are expressed as the complement value set.
struct Clause {
  std::int32_t feature = 0;
  std::vector<std::int32_t> values;

  bool operator==(const Clause&) const = default;
};

// Conjunction over distinct features; an empty clause list matches every item.
struct ConjunctiveQuery {
  std::vector<Clause> clauses;  // sorted by feature, at most one per feature

  bool operator==(const ConjunctiveQuery&) const = default;
};

// Disjunction of conjunctive queries; an empty disjunct list matches nothing.
struct ConceptQuery {
  std::vector<ConjunctiveQuery> disjuncts;

  bool operator==(const ConceptQuery&) const = default;
};

// Canonical form: clauses sorted by feature, duplicate features intersected,
// values sorted and deduplicated, full-domain clauses dropped. Throws when a
// clause is out of schema bounds or becomes empty.
ConjunctiveQuery normalized(ConjunctiveQuery q, const Schema& schema);
ConceptQuery normalized(ConceptQuery q, const Schema& schema);

bool satisfies(const Item& item, const ConjunctiveQuery& q);
bool satisfies(const Item& item, const ConceptQuery& q);

// Extension of the query over the dataset, as ascending item ids.
std::vector<ItemId> evaluate(const ConceptQuery& q, const Dataset& data);

// Tightest conjunctive query covering every given item: one clause per
// feature listing exactly the values that occur, full-domain clauses dropped.
ConjunctiveQuery most_specific_query(std::span<const Item> items, const Schema& schema);

// Canonical JSON: {"disjuncts":[{feature:[values,...],...},...]} with feature
// names and value names sorted lexicographically, so equal queries serialize
// to identical bytes.
std::string serialize_query(const ConceptQuery& q, const Schema& schema);
ConceptQuery parse_query(std::string_view text, const Schema& schema);

}  // namespace cql
