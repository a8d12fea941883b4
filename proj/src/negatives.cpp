#include "cql/negatives.hpp"

#include <unordered_map>

#include "cql/error.hpp"

namespace cql {

MarginalTable build_marginals(std::span<const Item> s, const Schema& schema) {
  if (s.empty()) throw Error("build_marginals: empty positive set");
  MarginalTable t;
  t.support_size = s.size();
  t.probs.resize(static_cast<std::size_t>(schema.feature_count()));
  std::vector<std::vector<std::size_t>> counts(t.probs.size());
  for (int f = 0; f < schema.feature_count(); ++f)
    counts[static_cast<std::size_t>(f)].assign(static_cast<std::size_t>(schema.domain_size(f)),
                                               0);
  for (const Item& item : s) {
    validate_item(item, schema);
    for (int f = 0; f < schema.feature_count(); ++f)
      ++counts[static_cast<std::size_t>(f)]
              [static_cast<std::size_t>(item.values[static_cast<std::size_t>(f)])];
  }
  for (std::size_t f = 0; f < counts.size(); ++f) {
    t.probs[f].resize(counts[f].size());
    for (std::size_t v = 0; v < counts[f].size(); ++v)
      t.probs[f][v] = static_cast<double>(counts[f][v]) / static_cast<double>(s.size());
  }
  return t;
}

Prototype make_prototype(std::span<const Item> items, const Schema& schema,
                         PrototypeSource source) {
  if (items.empty()) throw Error("make_prototype: empty item list");
  Prototype p;
  p.source = source;
  p.center.assign(static_cast<std::size_t>(schema.binary_width()), 0.0);
  std::vector<std::size_t> counts(p.center.size(), 0);
  for (const Item& item : items) {
    validate_item(item, schema);
    for (int f = 0; f < schema.feature_count(); ++f)
      ++counts[static_cast<std::size_t>(schema.block_offset(f) +
                                        item.values[static_cast<std::size_t>(f)])];
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    p.center[i] = static_cast<double>(counts[i]) / static_cast<double>(items.size());
  return p;
}

std::vector<ItemId> unlabelled_pool(std::span<const Item> s, const Dataset& data) {
  if (s.empty()) throw Error("unlabelled_pool: empty positive set");
  // value-vector -> dataset ids carrying it (ascending) with a match cursor
  std::unordered_map<std::vector<std::int32_t>, std::pair<std::vector<ItemId>, std::size_t>,
                     ValueVectorHash>
      instances;
  for (const Item& item : data.items) instances[item.values].first.push_back(item.id);

  std::vector<char> matched(data.size(), 0);
  for (const Item& member : s) {
    validate_item(member, data.schema);
    auto it = instances.find(member.values);
    if (it == instances.end() || it->second.second >= it->second.first.size())
      throw Error("positive item" +
                  (member.id >= 0 ? " with id " + std::to_string(member.id) : std::string()) +
                  " has no unmatched instance in the dataset");
    matched[static_cast<std::size_t>(it->second.first[it->second.second++])] = 1;
  }

  std::vector<ItemId> pool;
  pool.reserve(data.size() - s.size());
  for (const Item& item : data.items)
    if (!matched[static_cast<std::size_t>(item.id)]) pool.push_back(item.id);
  return pool;
}

std::vector<ItemId> likelihood_negatives(std::span<const Item> s, const Dataset& data) {
  const MarginalTable t = build_marginals(s, data.schema);
  std::vector<ItemId> out;
  for (ItemId id : unlabelled_pool(s, data)) {
    const Item& item = data.items[static_cast<std::size_t>(id)];
    for (std::size_t f = 0; f < t.probs.size(); ++f) {
      if (t.probs[f][static_cast<std::size_t>(item.values[f])] == 0.0) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

std::vector<ItemId> rocchio_negatives(std::span<const Item> s, const Dataset& data) {
  std::vector<ItemId> pool = unlabelled_pool(s, data);
  if (pool.empty()) return {};

  const Schema& schema = data.schema;
  std::vector<Item> pool_items = data.items_by_ids(pool);
  Prototype labelled = make_prototype(s, schema, PrototypeSource::labelled);
  Prototype unlabelled = make_prototype(pool_items, schema, PrototypeSource::unlabelled);

  // Squared distance of a one-hot item to a prototype, summed coordinate by
  // coordinate in layout order so structurally equal cases tie exactly.
  auto dist2 = [&](const Item& item, const Prototype& p) {
    double acc = 0.0;
    for (int f = 0; f < schema.feature_count(); ++f) {
      const std::size_t begin = static_cast<std::size_t>(schema.block_offset(f));
      const std::size_t end = begin + static_cast<std::size_t>(schema.domain_size(f));
      const std::size_t set_at = begin + static_cast<std::size_t>(item.values[static_cast<std::size_t>(f)]);
      for (std::size_t i = begin; i < end; ++i) {
        const double d = ((i == set_at) ? 1.0 : 0.0) - p.center[i];
        acc += d * d;
      }
    }
    return acc;
  };

  std::vector<ItemId> out;
  for (const Item& item : pool_items)
    if (dist2(item, unlabelled) < dist2(item, labelled)) out.push_back(item.id);
  return out;
}

}  // namespace cql
