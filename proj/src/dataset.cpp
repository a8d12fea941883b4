#include "cql/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cql/error.hpp"
#include "json.hpp"

namespace cql {

Schema::Schema(std::vector<FeatureDomain> features) : features_(std::move(features)) {
  if (features_.empty()) throw Error("schema: no features");
  offsets_.reserve(features_.size());
  value_by_name_.resize(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& fd = features_[f];
    if (fd.name.empty()) throw Error("schema: empty feature name at position " + std::to_string(f));
    if (!feature_by_name_.emplace(fd.name, static_cast<int>(f)).second)
      throw Error("schema: duplicate feature name '" + fd.name + "'");
    if (fd.values.size() < 2)
      throw Error("schema: feature '" + fd.name + "' needs at least two values, has " +
                  std::to_string(fd.values.size()));
    for (std::size_t v = 0; v < fd.values.size(); ++v) {
      if (fd.values[v].empty())
        throw Error("schema: feature '" + fd.name + "' has an empty value name");
      if (!value_by_name_[f].emplace(fd.values[v], static_cast<int>(v)).second)
        throw Error("schema: feature '" + fd.name + "' has duplicate value '" + fd.values[v] + "'");
    }
    offsets_.push_back(width_);
    width_ += static_cast<int>(fd.values.size());
  }
}

int Schema::feature_index(std::string_view name) const {
  auto it = feature_by_name_.find(std::string(name));
  return it == feature_by_name_.end() ? -1 : it->second;
}

int Schema::value_index(int f, std::string_view name) const {
  const auto& m = value_by_name_.at(static_cast<std::size_t>(f));
  auto it = m.find(std::string(name));
  return it == m.end() ? -1 : it->second;
}

std::vector<Item> Dataset::items_by_ids(std::span<const ItemId> ids) const {
  std::vector<Item> out;
  out.reserve(ids.size());
  for (ItemId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= items.size())
      throw Error("item id " + std::to_string(id) + " out of range (dataset has " +
                  std::to_string(items.size()) + " items)");
    out.push_back(items[static_cast<std::size_t>(id)]);
  }
  return out;
}

void validate_item(const Item& item, const Schema& schema) {
  if (static_cast<int>(item.values.size()) != schema.feature_count())
    throw Error("item does not match schema: has " + std::to_string(item.values.size()) +
                " values, schema has " + std::to_string(schema.feature_count()) + " features");
  for (int f = 0; f < schema.feature_count(); ++f) {
    std::int32_t v = item.values[static_cast<std::size_t>(f)];
    if (v < 0 || v >= schema.domain_size(f))
      throw Error("item value index " + std::to_string(v) + " out of range for feature '" +
                  schema.feature(f).name + "'");
  }
}

BinaryVector binarize(const Item& item, const Schema& schema) {
  validate_item(item, schema);
  BinaryVector out;
  out.bits.assign(static_cast<std::size_t>(schema.binary_width()), 0);
  for (int f = 0; f < schema.feature_count(); ++f)
    out.bits[static_cast<std::size_t>(schema.block_offset(f) +
                                      item.values[static_cast<std::size_t>(f)])] = 1;
  return out;
}

std::size_t ValueVectorHash::operator()(const std::vector<std::int32_t>& v) const {
  std::size_t h = 0xcbf29ce484222325ull;
  for (std::int32_t x : v) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x));
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path);
}

SidecarDomains parse_schema_sidecar(std::string_view text, std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string(source) + ": invalid schema JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(std::string(source) + ": schema JSON must be an object");
  SidecarDomains out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array())
      throw Error(std::string(source) + ": domain of '" + it.key() + "' must be an array");
    std::vector<std::string> values;
    for (const auto& v : it.value()) {
      if (!v.is_string())
        throw Error(std::string(source) + ": domain of '" + it.key() + "' must contain strings");
      values.push_back(v.get<std::string>());
    }
    out.emplace(it.key(), std::move(values));
  }
  return out;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return cells;
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text, std::string_view source,
                          const SidecarDomains* sidecar) {
  const std::string src(source);
  auto lines = split_lines(text);
  if (lines.empty()) throw Error(src + ": empty file, expected a header row");

  auto header = split_cells(lines[0]);
  const std::size_t n_features = header.size();
  std::vector<std::string> names;
  names.reserve(n_features);
  std::set<std::string_view> seen_names;
  for (std::size_t c = 0; c < n_features; ++c) {
    if (header[c].empty())
      throw Error(src + ": line 1: empty feature name in column " + std::to_string(c + 1));
    if (!seen_names.insert(header[c]).second)
      throw Error(src + ": line 1: duplicate feature name '" + std::string(header[c]) + "'");
    names.emplace_back(header[c]);
  }

  std::vector<std::vector<std::string_view>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto cells = split_cells(lines[li]);
    if (cells.size() != n_features)
      throw Error(src + ": line " + std::to_string(li + 1) + ": expected " +
                  std::to_string(n_features) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < n_features; ++c)
      if (cells[c].empty())
        throw Error(src + ": line " + std::to_string(li + 1) + ": empty cell in column '" +
                    names[c] + "'");
    rows.push_back(std::move(cells));
  }

  std::vector<FeatureDomain> domains(n_features);
  for (std::size_t c = 0; c < n_features; ++c) {
    domains[c].name = names[c];
    if (sidecar) {
      auto it = sidecar->find(names[c]);
      if (it == sidecar->end())
        throw Error(src + ": column '" + names[c] + "' is missing from the sidecar schema");
      domains[c].values = it->second;
    } else {
      std::set<std::string_view> distinct;
      for (const auto& row : rows) distinct.insert(row[c]);
      if (distinct.size() < 2)
        throw Error(src + ": column '" + names[c] +
                    "' has fewer than two distinct values; provide a sidecar schema to pin its "
                    "domain");
      domains[c].values.assign(distinct.begin(), distinct.end());
    }
  }
  Schema schema(std::move(domains));

  Dataset ds;
  ds.schema = std::move(schema);
  ds.items.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Item item;
    item.id = static_cast<ItemId>(r);
    item.values.resize(n_features);
    for (std::size_t c = 0; c < n_features; ++c) {
      int v = ds.schema.value_index(static_cast<int>(c), rows[r][c]);
      if (v < 0)
        throw Error(src + ": line " + std::to_string(r + 2) + ": value '" +
                    std::string(rows[r][c]) + "' in column '" + names[c] +
                    "' is not in the schema domain");
      item.values[c] = v;
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

Dataset load_dataset(const std::string& csv_path, const std::optional<std::string>& sidecar_path) {
  std::string text = read_file(csv_path);
  if (sidecar_path) {
    SidecarDomains sidecar = parse_schema_sidecar(read_file(*sidecar_path), *sidecar_path);
    return parse_dataset_csv(text, csv_path, &sidecar);
  }
  return parse_dataset_csv(text, csv_path, nullptr);
}

}  // namespace cql
