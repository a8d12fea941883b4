#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cql {

using ItemId = std::int64_t;

struct FeatureDomain {
  std::string name;
  std::vector<std::string> values;  // ordered; value index = position

  bool operator==(const FeatureDomain&) const = default;
};

// Immutable catalog schema: ordered features, each with an ordered finite
// domain of categorical values. Items and queries refer to features and
// values by index into this structure.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<FeatureDomain> features);

  int feature_count() const { return static_cast<int>(features_.size()); }
  const FeatureDomain& feature(int f) const { return features_.at(static_cast<std::size_t>(f)); }
  const std::vector<FeatureDomain>& features() const { return features_; }
  int domain_size(int f) const { return static_cast<int>(feature(f).values.size()); }

  // -1 when the name is unknown.
  int feature_index(std::string_view name) const;
  int value_index(int f, std::string_view name) const;

  // One-hot layout: feature blocks in schema order, one coordinate per value.
  int binary_width() const { return width_; }
  int block_offset(int f) const { return offsets_.at(static_cast<std::size_t>(f)); }

  bool operator==(const Schema& other) const { return features_ == other.features_; }

 private:
  std::vector<FeatureDomain> features_;
  std::vector<int> offsets_;
  int width_ = 0;
  std::unordered_map<std::string, int> feature_by_name_;
  std::vector<std::unordered_map<std::string, int>> value_by_name_;
};

// A single catalog row; values[f] indexes into schema.feature(f).values.
// id is the dense dataset row id, or -1 for items that do not originate from
// a dataset (e.g. externally supplied positives).
struct Item {
  ItemId id = -1;
  std::vector<std::int32_t> values;

  bool operator==(const Item& other) const { return values == other.values; }
};

struct Dataset {
  Schema schema;
  std::vector<Item> items;  // items[i].id == i

  std::size_t size() const { return items.size(); }
  std::vector<Item> items_by_ids(std::span<const ItemId> ids) const;
};

struct BinaryVector {
  std::vector<std::uint8_t> bits;
};

// Throws when the item does not conform to the schema.
void validate_item(const Item& item, const Schema& schema);

// One-hot encoding over the schema's binary layout; exactly feature_count()
// bits are set.
BinaryVector binarize(const Item& item, const Schema& schema);

using SidecarDomains = std::map<std::string, std::vector<std::string>>;

// Sidecar schema file: JSON object mapping feature name -> ordered value list.
// Lets callers pin domains wider than what a particular CSV happens to contain.
SidecarDomains parse_schema_sidecar(std::string_view text, std::string_view source);

// CSV: UTF-8, first row is the header, comma separated, no quoting, every
// cell non-empty categorical text. Without a sidecar the domains are the
// sorted distinct values per column (which must have at least two distinct
// values each); with one, domains come from the sidecar and every cell must
// be listed there.
Dataset parse_dataset_csv(std::string_view text, std::string_view source,
                          const SidecarDomains* sidecar = nullptr);

Dataset load_dataset(const std::string& csv_path,
                     const std::optional<std::string>& sidecar_path = std::nullopt);

// Hash/equality over an item's value-vector; value identity is the only
// observable identity items have.
struct ValueVectorHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace cql
