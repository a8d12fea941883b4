// Test-side reference implementations, written straight from the definitions
// and kept structurally independent of the library code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cql/dataset.hpp"
#include "cql/negatives.hpp"
#include "cql/query.hpp"
#include "cql/rng.hpp"

namespace oracle {

// --- query semantics ---------------------------------------------------------

inline bool satisfies_clause(const cql::Item& item, const cql::Clause& clause) {
  for (std::int32_t v : clause.values)
    if (item.values[static_cast<std::size_t>(clause.feature)] == v) return true;
  return false;
}

inline bool satisfies(const cql::Item& item, const cql::ConjunctiveQuery& q) {
  for (const cql::Clause& clause : q.clauses)
    if (!oracle::satisfies_clause(item, clause)) return false;
  return true;
}

inline bool satisfies(const cql::Item& item, const cql::ConceptQuery& q) {
  for (const cql::ConjunctiveQuery& d : q.disjuncts)
    if (oracle::satisfies(item, d)) return true;
  return false;
}

inline std::vector<cql::ItemId> evaluate(const cql::ConceptQuery& q, const cql::Dataset& data) {
  std::vector<cql::ItemId> out;
  for (const cql::Item& item : data.items)
    if (oracle::satisfies(item, q)) out.push_back(item.id);
  std::sort(out.begin(), out.end());
  return out;
}

// Most-specific conjunctive query: per feature, the set of values observed in
// the sample; features whose observed set spans the whole domain stay
// unconstrained.
inline cql::ConjunctiveQuery most_specific(const std::vector<cql::Item>& sample,
                                           const cql::Schema& schema) {
  cql::ConjunctiveQuery q;
  for (int f = 0; f < schema.feature_count(); ++f) {
    std::set<std::int32_t> seen;
    for (const cql::Item& item : sample) seen.insert(item.values[static_cast<std::size_t>(f)]);
    if (static_cast<int>(seen.size()) == schema.domain_size(f)) continue;
    cql::Clause clause;
    clause.feature = f;
    clause.values.assign(seen.begin(), seen.end());
    q.clauses.push_back(std::move(clause));
  }
  return q;
}

// --- reliable negatives ------------------------------------------------------

// The unlabelled pool under multiset matching: each sample member consumes one
// value-equal dataset row (lowest id first); everything left over is the pool.
inline std::vector<cql::ItemId> pool_ids(const std::vector<cql::Item>& sample,
                                         const cql::Dataset& data) {
  std::vector<bool> consumed(data.items.size(), false);
  for (const cql::Item& s : sample) {
    bool matched = false;
    for (std::size_t i = 0; i < data.items.size(); ++i) {
      if (!consumed[i] && data.items[i].values == s.values) {
        consumed[i] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return {};  // callers only use this on valid inputs
  }
  std::vector<cql::ItemId> out;
  for (std::size_t i = 0; i < data.items.size(); ++i)
    if (!consumed[i]) out.push_back(data.items[i].id);
  return out;
}

// Zero-marginal rule, computed by rescanning the sample for every candidate.
inline std::vector<cql::ItemId> likelihood_negatives(const std::vector<cql::Item>& sample,
                                                     const cql::Dataset& data) {
  std::vector<cql::ItemId> out;
  for (cql::ItemId id : pool_ids(sample, data)) {
    const cql::Item& item = data.items[static_cast<std::size_t>(id)];
    bool zero = false;
    for (std::size_t f = 0; f < item.values.size() && !zero; ++f) {
      int count = 0;
      for (const cql::Item& s : sample)
        if (s.values[f] == item.values[f]) ++count;
      if (count == 0) zero = true;
    }
    if (zero) out.push_back(id);
  }
  return out;
}

// Equivalent reading of the same rule: a pool item is a reliable negative iff
// it falls outside the most-specific query of the sample.
inline std::vector<cql::ItemId> msq_complement_negatives(const std::vector<cql::Item>& sample,
                                                         const cql::Dataset& data) {
  const cql::ConjunctiveQuery msq = most_specific(sample, data.schema);
  std::vector<cql::ItemId> out;
  for (cql::ItemId id : pool_ids(sample, data))
    if (!oracle::satisfies(data.items[static_cast<std::size_t>(id)], msq)) out.push_back(id);
  return out;
}

// One-hot prototype as per-feature value frequencies.
inline std::vector<std::vector<double>> prototype(const std::vector<cql::Item>& members,
                                                  const cql::Schema& schema) {
  std::vector<std::vector<double>> center(static_cast<std::size_t>(schema.feature_count()));
  for (int f = 0; f < schema.feature_count(); ++f)
    center[static_cast<std::size_t>(f)].assign(static_cast<std::size_t>(schema.domain_size(f)),
                                               0.0);
  for (const cql::Item& item : members)
    for (std::size_t f = 0; f < item.values.size(); ++f)
      center[f][static_cast<std::size_t>(item.values[f])] += 1.0;
  for (auto& block : center)
    for (double& x : block) x /= static_cast<double>(members.size());
  return center;
}

inline double dist2(const cql::Item& item, const std::vector<std::vector<double>>& center) {
  double total = 0.0;
  for (std::size_t f = 0; f < item.values.size(); ++f) {
    for (std::size_t v = 0; v < center[f].size(); ++v) {
      const double bit = (static_cast<std::size_t>(item.values[f]) == v) ? 1.0 : 0.0;
      const double d = bit - center[f][v];
      total += d * d;
    }
  }
  return total;
}

// Rocchio rule: strictly closer to the unlabelled prototype than to the
// labelled one. Ties are not negatives.
inline std::vector<cql::ItemId> rocchio_negatives(const std::vector<cql::Item>& sample,
                                                  const cql::Dataset& data) {
  const std::vector<cql::ItemId> pool = pool_ids(sample, data);
  std::vector<cql::Item> pool_items;
  for (cql::ItemId id : pool) pool_items.push_back(data.items[static_cast<std::size_t>(id)]);
  if (pool_items.empty()) return {};
  const auto labelled = prototype(sample, data.schema);
  const auto unlabelled = prototype(pool_items, data.schema);
  std::vector<cql::ItemId> out;
  for (std::size_t i = 0; i < pool_items.size(); ++i)
    if (dist2(pool_items[i], unlabelled) < dist2(pool_items[i], labelled)) out.push_back(pool[i]);
  return out;
}

// --- set metrics -------------------------------------------------------------

struct Prf {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

inline Prf prf(std::vector<cql::ItemId> predicted, std::vector<cql::ItemId> truth) {
  std::sort(predicted.begin(), predicted.end());
  std::sort(truth.begin(), truth.end());
  std::vector<cql::ItemId> both;
  std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(),
                        std::back_inserter(both));
  Prf m;
  if (!predicted.empty()) m.precision = static_cast<double>(both.size()) / predicted.size();
  if (!truth.empty()) m.recall = static_cast<double>(both.size()) / truth.size();
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

// --- random instance generators ----------------------------------------------

inline cql::Schema random_schema(cql::Rng& rng, int max_features = 5, int max_domain = 6) {
  const int n_features = static_cast<int>(rng.uniform_int(1, max_features));
  std::vector<cql::FeatureDomain> features;
  for (int f = 0; f < n_features; ++f) {
    cql::FeatureDomain fd;
    fd.name = "f" + std::to_string(f);
    const int domain = static_cast<int>(rng.uniform_int(2, max_domain));
    for (int v = 0; v < domain; ++v) fd.values.push_back("v" + std::to_string(v));
    features.push_back(std::move(fd));
  }
  return cql::Schema(features);
}

inline cql::Dataset random_dataset(cql::Rng& rng, const cql::Schema& schema, int n_items) {
  cql::Dataset data;
  data.schema = schema;
  for (int i = 0; i < n_items; ++i) {
    cql::Item item;
    item.id = i;
    for (int f = 0; f < schema.feature_count(); ++f)
      item.values.push_back(
          static_cast<std::int32_t>(rng.uniform_int(0, schema.domain_size(f) - 1)));
    data.items.push_back(std::move(item));
  }
  return data;
}

inline cql::ConceptQuery random_query(cql::Rng& rng, const cql::Schema& schema) {
  cql::ConceptQuery q;
  const int n_disjuncts = static_cast<int>(rng.uniform_int(1, 3));
  for (int d = 0; d < n_disjuncts; ++d) {
    cql::ConjunctiveQuery conj;
    const int constrained =
        static_cast<int>(rng.uniform_int(0, schema.feature_count()));
    std::vector<std::int64_t> features(static_cast<std::size_t>(schema.feature_count()));
    for (std::size_t f = 0; f < features.size(); ++f) features[f] = static_cast<std::int64_t>(f);
    const std::vector<std::int64_t> chosen = rng.sample(features, constrained);
    for (std::int64_t f : chosen) {
      cql::Clause clause;
      clause.feature = static_cast<int>(f);
      const int domain = schema.domain_size(static_cast<int>(f));
      const int n_values = static_cast<int>(rng.uniform_int(1, domain - 1));
      std::vector<std::int64_t> values(static_cast<std::size_t>(domain));
      for (std::size_t v = 0; v < values.size(); ++v) values[v] = static_cast<std::int64_t>(v);
      for (std::int64_t v : rng.sample(values, n_values))
        clause.values.push_back(static_cast<std::int32_t>(v));
      std::sort(clause.values.begin(), clause.values.end());
      conj.clauses.push_back(std::move(clause));
    }
    q.disjuncts.push_back(std::move(conj));
  }
  return normalized(q, schema);
}

// Convenience builders for hand cases.
inline cql::Schema make_schema(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& spec) {
  std::vector<cql::FeatureDomain> features;
  for (const auto& [name, values] : spec) features.push_back(cql::FeatureDomain{name, values});
  return cql::Schema(features);
}

inline cql::Item make_item(cql::ItemId id, const std::vector<std::int32_t>& values) {
  cql::Item item;
  item.id = id;
  item.values = values;
  return item;
}

inline cql::Dataset make_dataset(const cql::Schema& schema,
                                 const std::vector<std::vector<std::int32_t>>& rows) {
  cql::Dataset data;
  data.schema = schema;
  for (std::size_t i = 0; i < rows.size(); ++i)
    data.items.push_back(make_item(static_cast<cql::ItemId>(i), rows[i]));
  return data;
}

}  // namespace oracle
