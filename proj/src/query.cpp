#include "cql/query.hpp"

#include <algorithm>
#include <map>

#include "cql/error.hpp"
#include "json.hpp"

namespace cql {

ConjunctiveQuery normalized(ConjunctiveQuery q, const Schema& schema) {
  std::map<std::int32_t, std::vector<std::int32_t>> by_feature;
  for (auto& clause : q.clauses) {
    if (clause.feature < 0 || clause.feature >= schema.feature_count())
      throw Error("query: feature index " + std::to_string(clause.feature) + " out of range");
    const int domain = schema.domain_size(clause.feature);
    std::sort(clause.values.begin(), clause.values.end());
    clause.values.erase(std::unique(clause.values.begin(), clause.values.end()),
                        clause.values.end());
    if (clause.values.empty())
      throw Error("query: empty value set for feature '" + schema.feature(clause.feature).name +
                  "'");
    if (clause.values.front() < 0 || clause.values.back() >= domain)
      throw Error("query: value index out of range for feature '" +
                  schema.feature(clause.feature).name + "'");
    auto [it, inserted] = by_feature.emplace(clause.feature, clause.values);
    if (!inserted) {
      // conjunction: repeated features intersect
      std::vector<std::int32_t> merged;
      std::set_intersection(it->second.begin(), it->second.end(), clause.values.begin(),
                            clause.values.end(), std::back_inserter(merged));
      if (merged.empty())
        throw Error("query: contradictory clauses for feature '" +
                    schema.feature(clause.feature).name + "'");
      it->second = std::move(merged);
    }
  }
  ConjunctiveQuery out;
  for (auto& [f, values] : by_feature) {
    if (static_cast<int>(values.size()) == schema.domain_size(f)) continue;  // full domain
    out.clauses.push_back(Clause{f, std::move(values)});
  }
  return out;
}

ConceptQuery normalized(ConceptQuery q, const Schema& schema) {
  ConceptQuery out;
  out.disjuncts.reserve(q.disjuncts.size());
  for (auto& d : q.disjuncts) out.disjuncts.push_back(normalized(std::move(d), schema));
  return out;
}

bool satisfies(const Item& item, const ConjunctiveQuery& q) {
  for (const auto& clause : q.clauses) {
    if (clause.feature < 0 || static_cast<std::size_t>(clause.feature) >= item.values.size())
      throw Error("query does not match item: feature index " + std::to_string(clause.feature) +
                  " out of range");
    if (!std::binary_search(clause.values.begin(), clause.values.end(),
                            item.values[static_cast<std::size_t>(clause.feature)]))
      return false;
  }
  return true;
}

bool satisfies(const Item& item, const ConceptQuery& q) {
  for (const auto& d : q.disjuncts)
    if (satisfies(item, d)) return true;
  return false;
}

namespace {

// Flattened mask form of a query for scanning a whole dataset: one word-packed
// value mask per (disjunct, feature) pair.
struct CompiledClause {
  std::int32_t feature;
  std::uint32_t mask_offset;  // into mask words, units of words_per_mask
};

struct CompiledQuery {
  std::vector<CompiledClause> clauses;
  std::vector<std::uint32_t> disjunct_end;  // exclusive clause index per disjunct
  std::vector<std::uint64_t> masks;
  std::uint32_t words_per_mask = 1;
};

CompiledQuery compile(const ConceptQuery& q, const Schema& schema) {
  CompiledQuery c;
  int max_domain = 0;
  for (int f = 0; f < schema.feature_count(); ++f)
    max_domain = std::max(max_domain, schema.domain_size(f));
  c.words_per_mask = static_cast<std::uint32_t>((max_domain + 63) / 64);
  for (const auto& d : q.disjuncts) {
    for (const auto& clause : d.clauses) {
      if (clause.feature < 0 || clause.feature >= schema.feature_count())
        throw Error("query does not match schema: feature index out of range");
      CompiledClause cc;
      cc.feature = clause.feature;
      cc.mask_offset = static_cast<std::uint32_t>(c.masks.size());
      c.masks.resize(c.masks.size() + c.words_per_mask, 0);
      for (std::int32_t v : clause.values) {
        if (v < 0 || v >= schema.domain_size(clause.feature))
          throw Error("query does not match schema: value index out of range");
        c.masks[cc.mask_offset + static_cast<std::uint32_t>(v / 64)] |= 1ull << (v % 64);
      }
      c.clauses.push_back(cc);
    }
    c.disjunct_end.push_back(static_cast<std::uint32_t>(c.clauses.size()));
  }
  return c;
}

}  // namespace

std::vector<ItemId> evaluate(const ConceptQuery& q, const Dataset& data) {
  const CompiledQuery c = compile(q, data.schema);
  std::vector<ItemId> out;
  for (const Item& item : data.items) {
    bool any = false;
    std::uint32_t begin = 0;
    for (std::uint32_t di = 0; di < c.disjunct_end.size() && !any; ++di) {
      const std::uint32_t end = c.disjunct_end[di];
      bool all = true;
      for (std::uint32_t ci = begin; ci < end; ++ci) {
        const auto& cc = c.clauses[ci];
        const auto v =
            static_cast<std::uint32_t>(item.values[static_cast<std::size_t>(cc.feature)]);
        if (!(c.masks[cc.mask_offset + v / 64] >> (v % 64) & 1ull)) {
          all = false;
          break;
        }
      }
      any = all;
      begin = end;
    }
    if (any) out.push_back(item.id);
  }
  return out;
}

ConjunctiveQuery most_specific_query(std::span<const Item> items, const Schema& schema) {
  if (items.empty()) throw Error("most_specific_query: empty item list");
  std::vector<std::vector<char>> seen(static_cast<std::size_t>(schema.feature_count()));
  for (int f = 0; f < schema.feature_count(); ++f)
    seen[static_cast<std::size_t>(f)].assign(static_cast<std::size_t>(schema.domain_size(f)), 0);
  for (const Item& item : items) {
    validate_item(item, schema);
    for (int f = 0; f < schema.feature_count(); ++f)
      seen[static_cast<std::size_t>(f)]
          [static_cast<std::size_t>(item.values[static_cast<std::size_t>(f)])] = 1;
  }
  ConjunctiveQuery q;
  for (int f = 0; f < schema.feature_count(); ++f) {
    Clause clause;
    clause.feature = f;
    for (int v = 0; v < schema.domain_size(f); ++v)
      if (seen[static_cast<std::size_t>(f)][static_cast<std::size_t>(v)])
        clause.values.push_back(v);
    if (static_cast<int>(clause.values.size()) == schema.domain_size(f)) continue;
    q.clauses.push_back(std::move(clause));
  }
  return q;
}

std::string serialize_query(const ConceptQuery& q, const Schema& schema) {
  nlohmann::json disjuncts = nlohmann::json::array();
  for (const auto& d : q.disjuncts) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& clause : d.clauses) {
      if (clause.feature < 0 || clause.feature >= schema.feature_count())
        throw Error("serialize_query: feature index out of range");
      std::vector<std::string> names;
      names.reserve(clause.values.size());
      for (std::int32_t v : clause.values) {
        if (v < 0 || v >= schema.domain_size(clause.feature))
          throw Error("serialize_query: value index out of range");
        names.push_back(schema.feature(clause.feature).values[static_cast<std::size_t>(v)]);
      }
      std::sort(names.begin(), names.end());
      obj[schema.feature(clause.feature).name] = names;
    }
    disjuncts.push_back(std::move(obj));
  }
  nlohmann::json root;
  root["disjuncts"] = std::move(disjuncts);
  return root.dump(2) + "\n";
}

ConceptQuery parse_query(std::string_view text, const Schema& schema) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("query JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("disjuncts"))
    throw Error("query JSON: expected an object with a 'disjuncts' array");
  for (auto it = root.begin(); it != root.end(); ++it)
    if (it.key() != "disjuncts") throw Error("query JSON: unknown key '" + it.key() + "'");
  const auto& disjuncts = root["disjuncts"];
  if (!disjuncts.is_array()) throw Error("query JSON: 'disjuncts' must be an array");

  ConceptQuery q;
  for (const auto& dj : disjuncts) {
    if (!dj.is_object()) throw Error("query JSON: each disjunct must be an object");
    ConjunctiveQuery d;
    for (auto it = dj.begin(); it != dj.end(); ++it) {
      int f = schema.feature_index(it.key());
      if (f < 0) throw Error("query JSON: unknown feature '" + it.key() + "'");
      if (!it.value().is_array())
        throw Error("query JSON: values of '" + it.key() + "' must be an array");
      Clause clause;
      clause.feature = f;
      for (const auto& v : it.value()) {
        if (!v.is_string())
          throw Error("query JSON: values of '" + it.key() + "' must be strings");
        int vi = schema.value_index(f, v.get<std::string>());
        if (vi < 0)
          throw Error("query JSON: unknown value '" + v.get<std::string>() + "' for feature '" +
                      it.key() + "'");
        clause.values.push_back(vi);
      }
      if (clause.values.empty())
        throw Error("query JSON: empty value set for feature '" + it.key() + "'");
      d.clauses.push_back(std::move(clause));
    }
    q.disjuncts.push_back(std::move(d));
  }
  return normalized(std::move(q), schema);
}

}  // namespace cql
