#pragma once

#include <span>
#include <vector>

#include "cql/dataset.hpp"

namespace cql {

// Per-feature empirical marginals over a positive sample S:
// probs[f][v] = |{s in S : s_f = v}| / |S|.
struct MarginalTable {
  std::vector<std::vector<double>> probs;
  std::size_t support_size = 0;
};

MarginalTable build_marginals(std::span<const Item> s, const Schema& schema);

enum class PrototypeSource { labelled, unlabelled };

// Mean of the one-hot encodings of a non-empty item list.
struct Prototype {
  std::vector<double> center;
  PrototypeSource source = PrototypeSource::labelled;
};

Prototype make_prototype(std::span<const Item> items, const Schema& schema,
                         PrototypeSource source);

// D \ S under value identity: each member of s consumes one dataset instance
// with an equal value-vector (so duplicated values in the catalog stay in the
// pool). Throws when some member of s has no remaining match, since the
// positive sample is required to come from the catalog.
std::vector<ItemId> unlabelled_pool(std::span<const Item> s, const Dataset& data);

// Items of D \ S with at least one feature value of empirical probability
// zero in S; under the naive product model their likelihood is zero, which
// makes them reliable negatives. Ascending ids.
std::vector<ItemId> likelihood_negatives(std::span<const Item> s, const Dataset& data);

// Items of D \ S strictly closer (Euclidean, on one-hot encodings) to the
// unlabelled prototype than to the labelled one. Ties are not negatives.
// Ascending ids.
std::vector<ItemId> rocchio_negatives(std::span<const Item> s, const Dataset& data);

}  // namespace cql
