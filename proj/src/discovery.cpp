#include "cql/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "cql/error.hpp"
#include "cql/negatives.hpp"
#include "cql/rng.hpp"
#include "json.hpp"

namespace cql {

Centroid itemset_centroid(const Itemset& itemset, const Schema& schema) {
  if (itemset.members.empty())
    throw Error("itemset " + std::to_string(itemset.id) + " is empty");
  Prototype p = make_prototype(itemset.members, schema, PrototypeSource::labelled);
  return Centroid{itemset.id, std::move(p.center)};
}

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<double> mean_of(const std::vector<Centroid>& cs, const std::vector<int>& assignment,
                            int cluster, std::size_t dim) {
  std::vector<double> m(dim, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (assignment[i] != cluster) continue;
    ++count;
    for (std::size_t d = 0; d < dim; ++d) m[d] += cs[i].vec[d];
  }
  for (std::size_t d = 0; d < dim; ++d) m[d] /= static_cast<double>(count);
  return m;
}

}  // namespace

ClusterModel kmeans(std::vector<Centroid> centroids, int k, std::uint64_t seed,
                    int max_iterations) {
  if (centroids.empty()) throw Error("kmeans: no centroids");
  if (k < 1 || static_cast<std::size_t>(k) > centroids.size())
    throw Error("kmeans: k = " + std::to_string(k) + " outside [1, " +
                std::to_string(centroids.size()) + "]");
  std::sort(centroids.begin(), centroids.end(),
            [](const Centroid& a, const Centroid& b) { return a.itemset_id < b.itemset_id; });
  for (std::size_t i = 1; i < centroids.size(); ++i)
    if (centroids[i].itemset_id == centroids[i - 1].itemset_id)
      throw Error("kmeans: duplicate itemset id " + std::to_string(centroids[i].itemset_id));
  const std::size_t n = centroids.size();
  const std::size_t dim = centroids[0].vec.size();
  for (const auto& c : centroids)
    if (c.vec.size() != dim) throw Error("kmeans: centroid dimensions differ");

  ClusterModel model;
  model.k = k;
  model.itemset_ids.reserve(n);
  for (const auto& c : centroids) model.itemset_ids.push_back(c.itemset_id);

  // farthest-point seeding: RNG picks the first mean, greed does the rest
  Rng rng(seed);
  std::vector<std::vector<double>> means;
  means.reserve(static_cast<std::size_t>(k));
  means.push_back(centroids[rng.below(n)].vec);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(centroids[i].vec, means[0]);
  while (means.size() < static_cast<std::size_t>(k)) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (nearest[i] > nearest[far]) far = i;
    means.push_back(centroids[far].vec);
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], dist2(centroids[i].vec, means.back()));
  }

  std::vector<int> assignment(n, -1);
  std::vector<int> previous(n, -2);
  for (int iter = 0; iter < max_iterations; ++iter) {
    model.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(centroids[i].vec, means[0]);
      for (int j = 1; j < k; ++j) {
        const double d = dist2(centroids[i].vec, means[static_cast<std::size_t>(j)]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assignment[i] = best;
    }

    // repair: hand the point farthest from its mean to each empty cluster
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) ++sizes[static_cast<std::size_t>(assignment[i])];
    for (int j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) continue;
      std::size_t donor = n;
      double donor_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(assignment[i])] <= 1) continue;
        const double d =
            dist2(centroids[i].vec, means[static_cast<std::size_t>(assignment[i])]);
        if (d > donor_d) {
          donor_d = d;
          donor = i;
        }
      }
      if (donor == n) throw Error("kmeans: cannot repair empty cluster");
      --sizes[static_cast<std::size_t>(assignment[donor])];
      assignment[donor] = j;
      sizes[static_cast<std::size_t>(j)] = 1;
    }

    for (int j = 0; j < k; ++j)
      means[static_cast<std::size_t>(j)] = mean_of(centroids, assignment, j, dim);

    if (assignment == previous) {
      model.converged = true;
      break;
    }
    previous = assignment;
  }

  model.assignment = std::move(assignment);
  model.means = std::move(means);
  return model;
}

namespace {

double silhouette_score(const std::vector<Centroid>& cs, const std::vector<int>& assignment,
                        int k) {
  const std::size_t n = cs.size();
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) ++sizes[static_cast<std::size_t>(assignment[i])];

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(dist2(cs[i].vec, cs[j].vec));
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int own = assignment[i];
    if (sizes[static_cast<std::size_t>(own)] <= 1) continue;  // silhouette of a singleton is 0
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[static_cast<std::size_t>(assignment[j])] += dist[i * n + j];
    const double a =
        sum[static_cast<std::size_t>(own)] / static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      if (j == own || sizes[static_cast<std::size_t>(j)] == 0) continue;
      b = std::min(b, sum[static_cast<std::size_t>(j)] /
                          static_cast<double>(sizes[static_cast<std::size_t>(j)]));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace

KSelection select_k_silhouette(const std::vector<Centroid>& centroids, int k_min, int k_max,
                               std::uint64_t seed) {
  if (k_min < 2 || k_max < k_min || static_cast<std::size_t>(k_max) + 1 > centroids.size())
    throw Error("select_k_silhouette: need 2 <= k_min <= k_max <= #itemsets - 1");

  bool all_identical = true;
  for (std::size_t i = 1; i < centroids.size() && all_identical; ++i)
    all_identical = dist2(centroids[i].vec, centroids[0].vec) == 0.0;
  if (all_identical) return KSelection{k_min, true};

  KSelection best{k_min, false};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    ClusterModel model = kmeans(centroids, k, seed_mix({seed, static_cast<std::uint64_t>(k)}));
    const double score = silhouette_score(centroids, model.assignment, k);
    if (score > best_score) {
      best_score = score;
      best.k = k;
    }
  }
  return best;
}

DiscoveryResult discover_concepts(const std::vector<Itemset>& itemsets, const Dataset& data,
                                  std::optional<int> k, const LearnerConfig& config,
                                  int max_iterations) {
  if (itemsets.empty()) throw Error("discover_concepts: no itemsets");

  std::vector<Centroid> centroids;
  centroids.reserve(itemsets.size());
  for (const Itemset& is : itemsets) centroids.push_back(itemset_centroid(is, data.schema));

  int effective_k;
  if (k) {
    effective_k = *k;
  } else if (itemsets.size() < 3) {
    effective_k = 1;  // silhouette needs at least two clusters and a spare point
  } else {
    effective_k = select_k_silhouette(centroids, 2, static_cast<int>(itemsets.size()) - 1,
                                      seed_mix({config.seed, 0x73696cull}))
                      .k;
  }

  DiscoveryResult result;
  result.model =
      kmeans(std::move(centroids), effective_k, seed_mix({config.seed, 0x6b6dull}), max_iterations);

  // itemsets by id, mirroring the model's ordering
  std::vector<const Itemset*> by_id;
  by_id.reserve(itemsets.size());
  for (const Itemset& is : itemsets) by_id.push_back(&is);
  std::sort(by_id.begin(), by_id.end(),
            [](const Itemset* a, const Itemset* b) { return a->id < b->id; });

  for (int cluster = 0; cluster < effective_k; ++cluster) {
    DiscoveredConcept dc;
    dc.cluster = cluster;
    std::vector<Item> merged;
    std::unordered_set<std::vector<std::int32_t>, ValueVectorHash> seen;
    for (std::size_t i = 0; i < by_id.size(); ++i) {
      if (result.model.assignment[i] != cluster) continue;
      dc.itemset_ids.push_back(by_id[i]->id);
      for (const Item& item : by_id[i]->members)
        if (seen.insert(item.values).second) merged.push_back(item);
    }
    dc.merged_items = merged.size();
    if (merged.empty()) {
      dc.skipped = true;
      result.concepts.push_back(std::move(dc));
      continue;
    }
    LearnerConfig cluster_config = config;
    cluster_config.seed = seed_mix({config.seed, 0x6c6561726eull, static_cast<std::uint64_t>(cluster)});
    try {
      LearnOutcome outcome = learn_concept_query(merged, data, cluster_config);
      dc.query = std::move(outcome.query);
      dc.report = outcome.report;
    } catch (const Error& e) {
      dc.error = e.what();
    }
    result.concepts.push_back(std::move(dc));
  }
  return result;
}

std::vector<Itemset> parse_itemsets_jsonl(std::string_view text, const Schema& schema,
                                          std::string_view source) {
  std::vector<Itemset> out;
  std::unordered_set<std::int64_t> ids;
  const std::string src(source);
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(src + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("items") ||
        !j["id"].is_number_integer() || !j["items"].is_array())
      throw Error(src + ": line " + std::to_string(line_no) +
                  ": expected {\"id\": <int>, \"items\": [...]}");
    Itemset is;
    is.id = j["id"].get<std::int64_t>();
    if (!ids.insert(is.id).second)
      throw Error(src + ": line " + std::to_string(line_no) + ": duplicate itemset id " +
                  std::to_string(is.id));
    for (const auto& entry : j["items"]) {
      if (!entry.is_object())
        throw Error(src + ": line " + std::to_string(line_no) + ": each item must be an object");
      Item item;
      item.values.assign(static_cast<std::size_t>(schema.feature_count()), -1);
      for (auto it = entry.begin(); it != entry.end(); ++it) {
        const int f = schema.feature_index(it.key());
        if (f < 0)
          throw Error(src + ": line " + std::to_string(line_no) + ": unknown feature '" +
                      it.key() + "'");
        if (!it.value().is_string())
          throw Error(src + ": line " + std::to_string(line_no) + ": value of '" + it.key() +
                      "' must be a string");
        const int v = schema.value_index(f, it.value().get<std::string>());
        if (v < 0)
          throw Error(src + ": line " + std::to_string(line_no) + ": unknown value '" +
                      it.value().get<std::string>() + "' for feature '" + it.key() + "'");
        item.values[static_cast<std::size_t>(f)] = v;
      }
      for (int f = 0; f < schema.feature_count(); ++f)
        if (item.values[static_cast<std::size_t>(f)] < 0)
          throw Error(src + ": line " + std::to_string(line_no) + ": item is missing feature '" +
                      schema.feature(f).name + "'");
      is.members.push_back(std::move(item));
    }
    if (is.members.empty())
      throw Error(src + ": line " + std::to_string(line_no) + ": itemset " +
                  std::to_string(is.id) + " has no items");
    out.push_back(std::move(is));
  }
  return out;
}

}  // namespace cql
