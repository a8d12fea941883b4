#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cql/dataset.hpp"
#include "cql/learner.hpp"
#include "cql/query.hpp"

namespace cql {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Inputs are ascending unique id lists. Empty predicted => precision 0,
// empty truth => recall 0, f1 is the harmonic mean (0 when both are 0).
Metrics set_metrics(std::span<const ItemId> predicted, std::span<const ItemId> truth);

struct GroundTruthConcept {
  int id = 0;
  ConceptQuery query;
  std::vector<ItemId> extension;  // ascending
};

// Synthetic catalog generator. Item values follow a per-domain popularity
// skew (value v gets weight value_skew^v, so lower indices are more common;
// 1.0 means uniform), mirroring how real catalog attributes concentrate on a
// few popular values and giving identical value-vectors a realistic duplicate
// rate. Each planted concept constrains a random feature subset to a random
// fraction of its domain, must differ from every previously planted concept,
// and is re-drawn until its extension lands in [extension_floor,
// extension_cap] (cap 0 disables the upper bound).
struct WorldSpec {
  int n_items = 50000;
  int n_features = 8;
  int domain_min = 3;
  int domain_max = 3;
  int n_concepts = 20;
  int constrained_min = 2;
  int constrained_max = 2;
  double fraction_min = 0.3;
  double fraction_max = 0.45;
  double value_skew = 0.75;
  int extension_floor = 1500;
  int extension_cap = 0;
  int max_disjuncts = 1;
  int max_attempts = 1000;

  // CI-sized world: small enough to iterate on a laptop, large enough for the
  // sample-size trends to show.
  static WorldSpec desk() {
    WorldSpec w;
    w.n_items = 8000;
    w.n_concepts = 20;
    w.extension_floor = 500;
    w.extension_cap = 1200;
    return w;
  }
};

struct World {
  Dataset data;
  std::vector<GroundTruthConcept> concepts;
};

World generate_world(const WorldSpec& spec, std::uint64_t seed);

// s extension members plus floor(noise_ratio * s) items from the complement,
// drawn uniformly without replacement and shuffled together.
std::vector<Item> sample_with_noise(const GroundTruthConcept& truth, const Dataset& data,
                                    int s, double noise_ratio, std::uint64_t seed);

// Recovery experiment: learn each planted concept back from noisy positive
// samples over a grid of sample sizes, noise ratios, discard thresholds,
// negative methods and query types.
struct Exp1Config {
  std::vector<int> sizes{20, 50, 100, 200, 500};
  std::vector<double> noise_ratios{0.0};
  std::vector<double> discards{0.0};
  std::vector<NegativeMethod> methods{NegativeMethod::likelihood, NegativeMethod::rocchio};
  std::vector<QueryType> types{QueryType::dt, QueryType::items};
  int repeats = 3;
  std::uint64_t master_seed = 1729;
};

struct Exp1Row {
  int concept_id = 0;
  int s = 0;
  double noise = 0.0;
  double discard = 0.0;
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  int repeat = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  std::size_t n_negatives = 0;
  std::size_t tree_nodes = 0;
  std::size_t kept_leaves = 0;
  std::size_t discarded_leaves = 0;
  std::string error;  // non-empty when the cell failed
};

struct Exp1Aggregate {
  int s = 0;
  double noise = 0.0;
  double discard = 0.0;
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  int cells = 0;
  int failures = 0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  double mean_negatives = 0.0;
  double mean_tree_nodes = 0.0;
};

struct Exp1Report {
  Exp1Config config;
  std::vector<Exp1Row> rows;
  std::vector<Exp1Aggregate> aggregates;
};

Exp1Report run_experiment_1(const World& world, const Exp1Config& config, int jobs = 1);

// Discovery experiment: build itemsets from randomly selected source
// concepts, cluster and learn, then map every learned concept to its best
// matching source by f1. Overlap accuracy is the fraction of learned
// concepts whose best f1 clears the cutoff.
struct Exp2Config {
  int n_source_concepts = 10;
  int itemsets_min = 5;
  int itemsets_max = 15;
  int size_min = 15;
  int size_max = 40;
  std::optional<int> k;  // defaults to n_source_concepts; explicit value wins
  std::vector<double> discards{0.0};
  std::vector<NegativeMethod> methods{NegativeMethod::likelihood, NegativeMethod::rocchio};
  std::vector<QueryType> types{QueryType::dt, QueryType::items};
  int repeats = 10;
  double map_cutoff = 0.7;
  std::uint64_t master_seed = 1729;
};

struct Exp2Row {
  int repeat = 0;
  double discard = 0.0;
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  int cluster = 0;
  std::size_t n_itemsets = 0;
  std::size_t merged_items = 0;
  bool skipped = false;
  int mapped_concept = -1;
  double mapped_f1 = 0.0;
  std::size_t n_negatives = 0;
  std::size_t tree_nodes = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct Exp2RepeatSummary {
  int repeat = 0;
  double discard = 0.0;
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  int learned = 0;    // clusters that produced a query
  int matched = 0;    // of those, mapped_f1 > cutoff
  double overlap_accuracy = 0.0;
};

struct Exp2Aggregate {
  double discard = 0.0;
  NegativeMethod method = NegativeMethod::likelihood;
  QueryType type = QueryType::dt;
  int repeats = 0;
  double mean_overlap_accuracy = 0.0;
  double std_overlap_accuracy = 0.0;
};

struct Exp2Report {
  Exp2Config config;
  std::vector<Exp2Row> rows;
  std::vector<Exp2RepeatSummary> repeat_summaries;
  std::vector<Exp2Aggregate> aggregates;
};

Exp2Report run_experiment_2(const World& world, const Exp2Config& config, int jobs = 1);

// Replaces characters that would break a comma-separated cell.
std::string csv_safe(std::string text);

// Deterministic report renderings; timing never enters these, so reruns with
// the same seeds are byte-identical.
std::string exp1_report_csv(const Exp1Report& report);
std::string exp1_report_json(const Exp1Report& report, std::uint64_t world_seed);
std::string exp2_report_csv(const Exp2Report& report);
std::string exp2_report_json(const Exp2Report& report, std::uint64_t world_seed);

}  // namespace cql
