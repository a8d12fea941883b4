#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cql/dataset.hpp"
#include "cql/learner.hpp"
#include "cql/query.hpp"

namespace cql {

// An identified collection of catalog items (e.g. one curated playlist).
struct Itemset {
  std::int64_t id = 0;
  std::vector<Item> members;
};

// Mean of the one-hot encodings of the itemset's members.
struct Centroid {
  std::int64_t itemset_id = 0;
  std::vector<double> vec;
};

struct ClusterModel {
  int k = 0;
  std::vector<std::int64_t> itemset_ids;  // ascending
  std::vector<int> assignment;            // parallel to itemset_ids
  std::vector<std::vector<double>> means;
  int iterations = 0;
  bool converged = false;
};

Centroid itemset_centroid(const Itemset& itemset, const Schema& schema);

// Lloyd's algorithm with greedy farthest-point seeding (first pick from the
// seeded RNG, every later seed is the point farthest from the chosen set).
// Assignment ties go to the lowest cluster index; an empty cluster is repaired
// by reassigning the point currently farthest from its mean. Input order does
// not matter: centroids are processed in ascending itemset id order.
ClusterModel kmeans(std::vector<Centroid> centroids, int k, std::uint64_t seed,
                    int max_iterations = 300);

struct KSelection {
  int k = 0;
  bool degenerate = false;  // all centroids identical; k is the range minimum
};

// Mean silhouette score over k in [k_min, k_max]; ties prefer the smaller k.
KSelection select_k_silhouette(const std::vector<Centroid>& centroids, int k_min, int k_max,
                               std::uint64_t seed);

struct DiscoveredConcept {
  int cluster = 0;
  std::vector<std::int64_t> itemset_ids;
  std::size_t merged_items = 0;  // distinct value-vectors after merging
  bool skipped = false;          // empty cluster, nothing to learn from
  std::string error;             // learner failure for this cluster, if any
  ConceptQuery query;
  LearnReport report;
};

struct DiscoveryResult {
  ClusterModel model;
  std::vector<DiscoveredConcept> concepts;  // one entry per cluster
};

// Clusters itemset centroids (k fixed, or silhouette-selected when absent),
// merges each cluster's itemsets into one deduplicated positive set, and runs
// the concept query learner per cluster. Per-cluster failures are recorded on
// the entry instead of aborting the whole discovery.
DiscoveryResult discover_concepts(const std::vector<Itemset>& itemsets, const Dataset& data,
                                  std::optional<int> k, const LearnerConfig& config,
                                  int max_iterations = 300);

// JSONL: one {"id": <int>, "items": [{feature: value, ...}, ...]} per line.
std::vector<Itemset> parse_itemsets_jsonl(std::string_view text, const Schema& schema,
                                          std::string_view source);

}  // namespace cql
