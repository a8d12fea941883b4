#include "cql/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <thread>

#include "cql/discovery.hpp"
#include "cql/error.hpp"
#include "cql/rng.hpp"
#include "json.hpp"

namespace cql {

Metrics set_metrics(std::span<const ItemId> predicted, std::span<const ItemId> truth) {
  std::size_t hits = 0;
  std::size_t i = 0, j = 0;
  while (i < predicted.size() && j < truth.size()) {
    if (predicted[i] < truth[j]) {
      ++i;
    } else if (truth[j] < predicted[i]) {
      ++j;
    } else {
      ++hits;
      ++i;
      ++j;
    }
  }
  Metrics m;
  m.precision =
      predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
  m.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

namespace {

std::string padded(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, i);
  return buf;
}

}  // namespace

World generate_world(const WorldSpec& spec, std::uint64_t seed) {
  if (spec.n_items < 1) throw Error("world spec: n_items must be positive");
  if (spec.n_features < 1) throw Error("world spec: n_features must be positive");
  if (spec.domain_min < 2 || spec.domain_max < spec.domain_min)
    throw Error("world spec: need 2 <= domain_min <= domain_max");
  if (spec.n_concepts < 0) throw Error("world spec: n_concepts must be non-negative");
  if (spec.constrained_min < 0 || spec.constrained_max < spec.constrained_min)
    throw Error("world spec: need 0 <= constrained_min <= constrained_max");
  if (spec.fraction_min <= 0.0 || spec.fraction_max > 1.0 ||
      spec.fraction_max < spec.fraction_min)
    throw Error("world spec: need 0 < fraction_min <= fraction_max <= 1");
  if (spec.value_skew <= 0.0 || spec.value_skew > 1.0)
    throw Error("world spec: need 0 < value_skew <= 1");
  if (spec.extension_cap < 0 ||
      (spec.extension_cap > 0 && spec.extension_cap < spec.extension_floor))
    throw Error("world spec: extension_cap must be 0 (off) or >= extension_floor");
  if (spec.max_disjuncts < 1) throw Error("world spec: max_disjuncts must be positive");

  Rng rng(seed);
  std::vector<FeatureDomain> domains;
  domains.reserve(static_cast<std::size_t>(spec.n_features));
  for (int f = 0; f < spec.n_features; ++f) {
    FeatureDomain fd;
    fd.name = padded("f", f);
    const int size = static_cast<int>(rng.uniform_int(spec.domain_min, spec.domain_max));
    for (int v = 0; v < size; ++v) fd.values.push_back(padded("v", v));
    domains.push_back(std::move(fd));
  }

  World world;
  world.data.schema = Schema(std::move(domains));

  // Cumulative popularity weights per feature: value v has weight skew^v.
  std::vector<std::vector<double>> cumulative(static_cast<std::size_t>(spec.n_features));
  for (int f = 0; f < spec.n_features; ++f) {
    const int size = world.data.schema.domain_size(f);
    std::vector<double>& cum = cumulative[static_cast<std::size_t>(f)];
    cum.resize(static_cast<std::size_t>(size));
    double total = 0.0, weight = 1.0;
    for (int v = 0; v < size; ++v, weight *= spec.value_skew) {
      total += weight;
      cum[static_cast<std::size_t>(v)] = total;
    }
    for (double& c : cum) c /= total;
  }
  const auto draw_value = [&](int f) -> std::int32_t {
    const std::vector<double>& cum = cumulative[static_cast<std::size_t>(f)];
    const double u = rng.uniform_real(0.0, 1.0);
    for (std::size_t v = 0; v + 1 < cum.size(); ++v)
      if (u < cum[v]) return static_cast<std::int32_t>(v);
    return static_cast<std::int32_t>(cum.size() - 1);
  };

  world.data.items.reserve(static_cast<std::size_t>(spec.n_items));
  for (int i = 0; i < spec.n_items; ++i) {
    Item item;
    item.id = i;
    item.values.resize(static_cast<std::size_t>(spec.n_features));
    for (int f = 0; f < spec.n_features; ++f)
      item.values[static_cast<std::size_t>(f)] = draw_value(f);
    world.data.items.push_back(std::move(item));
  }

  std::vector<std::int32_t> all_features(static_cast<std::size_t>(spec.n_features));
  for (int f = 0; f < spec.n_features; ++f) all_features[static_cast<std::size_t>(f)] = f;

  std::set<std::string> planted_signatures;
  for (int c = 0; c < spec.n_concepts; ++c) {
    bool accepted = false;
    for (int attempt = 0; attempt < spec.max_attempts && !accepted; ++attempt) {
      ConceptQuery query;
      const int n_disjuncts = static_cast<int>(rng.uniform_int(1, spec.max_disjuncts));
      for (int dj = 0; dj < n_disjuncts; ++dj) {
        const int lo = std::min(spec.constrained_min, spec.n_features);
        const int hi = std::min(spec.constrained_max, spec.n_features);
        const int n_con = static_cast<int>(rng.uniform_int(lo, hi));
        std::vector<std::int32_t> chosen =
            rng.sample(all_features, static_cast<std::size_t>(n_con));
        std::sort(chosen.begin(), chosen.end());
        ConjunctiveQuery d;
        for (std::int32_t f : chosen) {
          const int size = world.data.schema.domain_size(f);
          const double fraction = rng.uniform_real(spec.fraction_min, spec.fraction_max);
          const int want = static_cast<int>(std::lround(fraction * size));
          const int count = std::clamp(want, 1, size - 1);
          std::vector<std::int32_t> values(static_cast<std::size_t>(size));
          for (int v = 0; v < size; ++v) values[static_cast<std::size_t>(v)] = v;
          Clause clause;
          clause.feature = f;
          clause.values = rng.sample(values, static_cast<std::size_t>(count));
          std::sort(clause.values.begin(), clause.values.end());
          d.clauses.push_back(std::move(clause));
        }
        query.disjuncts.push_back(std::move(d));
      }
      query = normalized(std::move(query), world.data.schema);
      std::string signature = serialize_query(query, world.data.schema);
      if (planted_signatures.count(signature)) continue;
      std::vector<ItemId> extension = evaluate(query, world.data);
      if (static_cast<int>(extension.size()) < spec.extension_floor) continue;
      if (spec.extension_cap > 0 && static_cast<int>(extension.size()) > spec.extension_cap)
        continue;
      planted_signatures.insert(std::move(signature));
      world.concepts.push_back(GroundTruthConcept{c, std::move(query), std::move(extension)});
      accepted = true;
    }
    if (!accepted)
      throw Error("generate_world: could not plant concept " + std::to_string(c) +
                  " distinct from the others with extension in [" +
                  std::to_string(spec.extension_floor) + ", " +
                  (spec.extension_cap > 0 ? std::to_string(spec.extension_cap) : "inf") +
                  "] after " + std::to_string(spec.max_attempts) +
                  " attempts; rescale extension_floor/extension_cap to the catalog size or "
                  "raise max_attempts");
  }
  return world;
}

std::vector<Item> sample_with_noise(const GroundTruthConcept& truth, const Dataset& data,
                                    int s, double noise_ratio, std::uint64_t seed) {
  if (s < 1) throw Error("sample_with_noise: s must be positive");
  if (noise_ratio < 0.0 || noise_ratio > 1.0)
    throw Error("sample_with_noise: noise ratio must lie in [0, 1]");
  // the sample holds s items total; this many are drawn from the complement
  const auto noisy_count = static_cast<std::size_t>(
      std::floor(noise_ratio * static_cast<double>(s) + 1e-9));
  const std::size_t clean_count = static_cast<std::size_t>(s) - noisy_count;
  if (clean_count > truth.extension.size())
    throw Error("sample_with_noise: s = " + std::to_string(s) + " needs " +
                std::to_string(clean_count) + " extension items but only " +
                std::to_string(truth.extension.size()) + " exist");
  const std::size_t complement_size = data.size() - truth.extension.size();
  if (noisy_count > complement_size)
    throw Error("sample_with_noise: noise demands " + std::to_string(noisy_count) +
                " items but the complement has " + std::to_string(complement_size));

  Rng rng(seed);
  std::vector<ItemId> clean = rng.sample(truth.extension, clean_count);

  std::vector<char> in_extension(data.size(), 0);
  for (ItemId id : truth.extension) in_extension[static_cast<std::size_t>(id)] = 1;
  std::vector<ItemId> complement;
  complement.reserve(complement_size);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!in_extension[i]) complement.push_back(static_cast<ItemId>(i));
  std::vector<ItemId> noisy = rng.sample(complement, noisy_count);

  std::vector<ItemId> ids = std::move(clean);
  ids.insert(ids.end(), noisy.begin(), noisy.end());
  std::vector<Item> items = data.items_by_ids(ids);
  rng.shuffle(items);
  return items;
}

namespace {

void run_indexed(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_threads = std::min(static_cast<std::size_t>(jobs), count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t)
    threads.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  for (auto& t : threads) t.join();
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// sample standard deviation; 0 for fewer than two points
double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string csv_safe(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

Exp1Report run_experiment_1(const World& world, const Exp1Config& config, int jobs) {
  if (world.concepts.empty()) throw Error("experiment 1: world has no concepts");
  if (config.repeats < 1) throw Error("experiment 1: repeats must be positive");
  if (config.sizes.empty() || config.noise_ratios.empty() || config.discards.empty() ||
      config.methods.empty() || config.types.empty())
    throw Error("experiment 1: empty grid dimension");
  for (int s : config.sizes)
    if (s < 1) throw Error("experiment 1: sample sizes must be positive");
  for (double noise : config.noise_ratios)
    if (noise < 0.0 || noise > 1.0)
      throw Error("experiment 1: noise ratios must lie in [0, 1]");
  for (double discard : config.discards)
    if (discard < 0.0 || discard > 1.0)
      throw Error("experiment 1: discard thresholds must lie in [0, 1]");

  Exp1Report report;
  report.config = config;
  for (const auto& truth : world.concepts)
    for (int s : config.sizes)
      for (double noise : config.noise_ratios)
        for (double discard : config.discards)
          for (NegativeMethod method : config.methods)
            for (QueryType type : config.types)
              for (int repeat = 0; repeat < config.repeats; ++repeat) {
                Exp1Row row;
                row.concept_id = truth.id;
                row.s = s;
                row.noise = noise;
                row.discard = discard;
                row.method = method;
                row.type = type;
                row.repeat = repeat;
                row.seed = seed_mix({config.master_seed,
                                     static_cast<std::uint64_t>(truth.id),
                                     static_cast<std::uint64_t>(s), seed_bits(noise),
                                     seed_bits(discard), static_cast<std::uint64_t>(method),
                                     static_cast<std::uint64_t>(type),
                                     static_cast<std::uint64_t>(repeat)});
                report.rows.push_back(row);
              }

  run_indexed(report.rows.size(), jobs, [&](std::size_t i) {
    Exp1Row& row = report.rows[i];
    const GroundTruthConcept& truth =
        *std::find_if(world.concepts.begin(), world.concepts.end(),
                      [&](const GroundTruthConcept& c) { return c.id == row.concept_id; });
    try {
      std::vector<Item> s =
          sample_with_noise(truth, world.data, row.s, row.noise, seed_mix({row.seed, 1}));
      LearnerConfig lc;
      lc.method = row.method;
      lc.type = row.type;
      lc.discard = row.discard;
      lc.seed = seed_mix({row.seed, 2});
      LearnOutcome outcome = learn_concept_query(s, world.data, lc);
      std::vector<ItemId> predicted = evaluate(outcome.query, world.data);
      row.metrics = set_metrics(predicted, truth.extension);
      row.n_negatives = outcome.report.n_negatives;
      row.tree_nodes = outcome.report.tree_nodes;
      row.kept_leaves = outcome.report.kept_leaves;
      row.discarded_leaves = outcome.report.discarded_leaves;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  for (int s : config.sizes)
    for (double noise : config.noise_ratios)
      for (double discard : config.discards)
        for (NegativeMethod method : config.methods)
          for (QueryType type : config.types) {
            Exp1Aggregate agg;
            agg.s = s;
            agg.noise = noise;
            agg.discard = discard;
            agg.method = method;
            agg.type = type;
            std::vector<double> precision, recall, f1, negatives, nodes;
            for (const Exp1Row& row : report.rows) {
              if (row.s != s || row.noise != noise || row.discard != discard ||
                  row.method != method || row.type != type)
                continue;
              ++agg.cells;
              if (!row.error.empty()) {
                ++agg.failures;
                continue;
              }
              precision.push_back(row.metrics.precision);
              recall.push_back(row.metrics.recall);
              f1.push_back(row.metrics.f1);
              negatives.push_back(static_cast<double>(row.n_negatives));
              nodes.push_back(static_cast<double>(row.tree_nodes));
            }
            agg.mean_precision = mean_of(precision);
            agg.mean_recall = mean_of(recall);
            agg.mean_f1 = mean_of(f1);
            agg.std_f1 = std_of(f1);
            agg.mean_negatives = mean_of(negatives);
            agg.mean_tree_nodes = mean_of(nodes);
            report.aggregates.push_back(agg);
          }
  return report;
}

Exp2Report run_experiment_2(const World& world, const Exp2Config& config, int jobs) {
  if (config.n_source_concepts < 1 ||
      static_cast<std::size_t>(config.n_source_concepts) > world.concepts.size())
    throw Error("experiment 2: n_source_concepts outside [1, " +
                std::to_string(world.concepts.size()) + "]");
  if (config.repeats < 1) throw Error("experiment 2: repeats must be positive");
  if (config.itemsets_min < 1 || config.itemsets_max < config.itemsets_min)
    throw Error("experiment 2: bad itemsets range");
  if (config.size_min < 1 || config.size_max < config.size_min)
    throw Error("experiment 2: bad itemset size range");
  if (config.discards.empty() || config.methods.empty() || config.types.empty())
    throw Error("experiment 2: empty grid dimension");
  for (double discard : config.discards)
    if (discard < 0.0 || discard > 1.0)
      throw Error("experiment 2: discard thresholds must lie in [0, 1]");

  const int k = config.k.value_or(config.n_source_concepts);
  if (k < 1) throw Error("experiment 2: k must be positive");

  struct Combo {
    double discard;
    NegativeMethod method;
    QueryType type;
  };
  std::vector<Combo> combos;
  for (double d : config.discards)
    for (NegativeMethod m : config.methods)
      for (QueryType t : config.types) combos.push_back(Combo{d, m, t});

  struct RepeatContext {
    std::vector<int> sources;  // indices into world.concepts, ascending
    std::vector<Itemset> itemsets;
    std::uint64_t cluster_seed = 0;
  };
  std::vector<RepeatContext> contexts(static_cast<std::size_t>(config.repeats));
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    RepeatContext& ctx = contexts[static_cast<std::size_t>(repeat)];
    const std::uint64_t repeat_seed =
        seed_mix({config.master_seed, 0x65787032ull, static_cast<std::uint64_t>(repeat)});
    Rng rng(repeat_seed);
    std::vector<int> all(world.concepts.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    ctx.sources = rng.sample(all, static_cast<std::size_t>(config.n_source_concepts));
    std::sort(ctx.sources.begin(), ctx.sources.end());
    std::int64_t itemset_id = 0;
    for (int source : ctx.sources) {
      const GroundTruthConcept& truth = world.concepts[static_cast<std::size_t>(source)];
      const int count =
          static_cast<int>(rng.uniform_int(config.itemsets_min, config.itemsets_max));
      for (int i = 0; i < count; ++i) {
        const int size = static_cast<int>(rng.uniform_int(config.size_min, config.size_max));
        if (static_cast<std::size_t>(size) > truth.extension.size())
          throw Error("experiment 2: itemset size exceeds source extension");
        std::vector<ItemId> ids = rng.sample(truth.extension, static_cast<std::size_t>(size));
        Itemset is;
        is.id = itemset_id++;
        is.members = world.data.items_by_ids(ids);
        ctx.itemsets.push_back(std::move(is));
      }
    }
    // one clustering per repeat: every combo shares the same seed, and the
    // learner itself is deterministic, so clusters are comparable across combos
    ctx.cluster_seed = seed_mix({repeat_seed, 0x636c7573ull});
  }

  Exp2Report report;
  report.config = config;
  report.config.k = k;
  const std::size_t tasks = static_cast<std::size_t>(config.repeats) * combos.size();
  report.rows.resize(tasks * static_cast<std::size_t>(k));
  report.repeat_summaries.resize(tasks);

  run_indexed(tasks, jobs, [&](std::size_t task) {
    const int repeat = static_cast<int>(task / combos.size());
    const Combo& combo = combos[task % combos.size()];
    const RepeatContext& ctx = contexts[static_cast<std::size_t>(repeat)];

    Exp2RepeatSummary summary;
    summary.repeat = repeat;
    summary.discard = combo.discard;
    summary.method = combo.method;
    summary.type = combo.type;

    LearnerConfig lc;
    lc.method = combo.method;
    lc.type = combo.type;
    lc.discard = combo.discard;
    lc.seed = ctx.cluster_seed;

    for (int cluster = 0; cluster < k; ++cluster) {
      Exp2Row& row = report.rows[task * static_cast<std::size_t>(k) +
                                 static_cast<std::size_t>(cluster)];
      row.repeat = repeat;
      row.discard = combo.discard;
      row.method = combo.method;
      row.type = combo.type;
      row.cluster = cluster;
      row.seed = ctx.cluster_seed;
    }

    try {
      DiscoveryResult result = discover_concepts(ctx.itemsets, world.data, k, lc);
      for (const DiscoveredConcept& dc : result.concepts) {
        Exp2Row& row = report.rows[task * static_cast<std::size_t>(k) +
                                   static_cast<std::size_t>(dc.cluster)];
        row.n_itemsets = dc.itemset_ids.size();
        row.merged_items = dc.merged_items;
        row.skipped = dc.skipped;
        row.error = dc.error;
        if (dc.skipped || !dc.error.empty()) continue;
        std::vector<ItemId> predicted = evaluate(dc.query, world.data);
        row.n_negatives = dc.report.n_negatives;
        row.tree_nodes = dc.report.tree_nodes;
        row.mapped_concept = -1;
        row.mapped_f1 = 0.0;
        for (int source : ctx.sources) {
          const GroundTruthConcept& truth = world.concepts[static_cast<std::size_t>(source)];
          const Metrics m = set_metrics(predicted, truth.extension);
          if (row.mapped_concept < 0 || m.f1 > row.mapped_f1) {
            row.mapped_concept = truth.id;
            row.mapped_f1 = m.f1;
          }
        }
        ++summary.learned;
        if (row.mapped_f1 > config.map_cutoff) ++summary.matched;
      }
    } catch (const std::exception& e) {
      for (int cluster = 0; cluster < k; ++cluster)
        report.rows[task * static_cast<std::size_t>(k) + static_cast<std::size_t>(cluster)]
            .error = e.what();
    }
    summary.overlap_accuracy =
        summary.learned == 0
            ? 0.0
            : static_cast<double>(summary.matched) / static_cast<double>(summary.learned);
    report.repeat_summaries[task] = summary;
  });

  for (const Combo& combo : combos) {
    Exp2Aggregate agg;
    agg.discard = combo.discard;
    agg.method = combo.method;
    agg.type = combo.type;
    std::vector<double> overlaps;
    for (const Exp2RepeatSummary& s : report.repeat_summaries) {
      if (s.discard != combo.discard || s.method != combo.method || s.type != combo.type)
        continue;
      ++agg.repeats;
      overlaps.push_back(s.overlap_accuracy);
    }
    agg.mean_overlap_accuracy = mean_of(overlaps);
    agg.std_overlap_accuracy = std_of(overlaps);
    report.aggregates.push_back(agg);
  }
  return report;
}

std::string exp1_report_csv(const Exp1Report& report) {
  std::string out =
      "concept_id,s,noise,discard,method,query_type,repeat,precision,recall,f1,"
      "n_negatives,tree_nodes,kept_leaves,discarded_leaves,seed,error\n";
  for (const Exp1Row& row : report.rows) {
    out += std::to_string(row.concept_id) + ',' + std::to_string(row.s) + ',' +
           fmt_g(row.noise) + ',' + fmt_g(row.discard) + ',' + to_string(row.method) + ',' +
           to_string(row.type) + ',' + std::to_string(row.repeat) + ',';
    if (row.error.empty())
      out += fmt_g(row.metrics.precision) + ',' + fmt_g(row.metrics.recall) + ',' +
             fmt_g(row.metrics.f1) + ',' + std::to_string(row.n_negatives) + ',' +
             std::to_string(row.tree_nodes) + ',' + std::to_string(row.kept_leaves) + ',' +
             std::to_string(row.discarded_leaves) + ',';
    else
      out += ",,,,,,,";
    out += std::to_string(row.seed) + ',' + csv_safe(row.error) + '\n';
  }
  return out;
}

namespace {

nlohmann::json exp1_config_json(const Exp1Config& c) {
  nlohmann::json j;
  j["sizes"] = c.sizes;
  j["noise_ratios"] = c.noise_ratios;
  j["discard_thresholds"] = c.discards;
  std::vector<std::string> methods, types;
  for (auto m : c.methods) methods.push_back(to_string(m));
  for (auto t : c.types) types.push_back(to_string(t));
  j["methods"] = methods;
  j["query_types"] = types;
  j["repeats"] = c.repeats;
  j["master_seed"] = c.master_seed;
  return j;
}

nlohmann::json exp2_config_json(const Exp2Config& c) {
  nlohmann::json j;
  j["n_source_concepts"] = c.n_source_concepts;
  j["itemsets_min"] = c.itemsets_min;
  j["itemsets_max"] = c.itemsets_max;
  j["itemset_size_min"] = c.size_min;
  j["itemset_size_max"] = c.size_max;
  if (c.k)
    j["k"] = *c.k;
  else
    j["k"] = "auto";
  j["discard_thresholds"] = c.discards;
  std::vector<std::string> methods, types;
  for (auto m : c.methods) methods.push_back(to_string(m));
  for (auto t : c.types) types.push_back(to_string(t));
  j["methods"] = methods;
  j["query_types"] = types;
  j["repeats"] = c.repeats;
  j["map_cutoff"] = c.map_cutoff;
  j["master_seed"] = c.master_seed;
  return j;
}

}  // namespace

std::string exp1_report_json(const Exp1Report& report, std::uint64_t world_seed) {
  nlohmann::json j;
  j["experiment"] = "recovery";
  j["world_seed"] = world_seed;
  j["config"] = exp1_config_json(report.config);
  nlohmann::json aggs = nlohmann::json::array();
  int failures = 0;
  for (const Exp1Aggregate& a : report.aggregates) {
    nlohmann::json e;
    e["s"] = a.s;
    e["noise"] = a.noise;
    e["discard"] = a.discard;
    e["method"] = to_string(a.method);
    e["query_type"] = to_string(a.type);
    e["cells"] = a.cells;
    e["failures"] = a.failures;
    e["mean_precision"] = a.mean_precision;
    e["mean_recall"] = a.mean_recall;
    e["mean_f1"] = a.mean_f1;
    e["std_f1"] = a.std_f1;
    e["mean_negatives"] = a.mean_negatives;
    e["mean_tree_nodes"] = a.mean_tree_nodes;
    aggs.push_back(std::move(e));
    failures += a.failures;
  }
  j["aggregates"] = std::move(aggs);
  j["rows"] = report.rows.size();
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string exp2_report_csv(const Exp2Report& report) {
  std::string out =
      "repeat,discard,method,query_type,cluster,n_itemsets,merged_items,skipped,"
      "mapped_concept,mapped_f1,n_negatives,tree_nodes,seed,error\n";
  for (const Exp2Row& row : report.rows) {
    out += std::to_string(row.repeat) + ',' + fmt_g(row.discard) + ',' + to_string(row.method) +
           ',' + to_string(row.type) + ',' + std::to_string(row.cluster) + ',' +
           std::to_string(row.n_itemsets) + ',' + std::to_string(row.merged_items) + ',' +
           (row.skipped ? "1" : "0") + ',';
    if (!row.skipped && row.error.empty())
      out += std::to_string(row.mapped_concept) + ',' + fmt_g(row.mapped_f1) + ',' +
             std::to_string(row.n_negatives) + ',' + std::to_string(row.tree_nodes) + ',';
    else
      out += ",,,,";
    out += std::to_string(row.seed) + ',' + csv_safe(row.error) + '\n';
  }
  return out;
}

std::string exp2_report_json(const Exp2Report& report, std::uint64_t world_seed) {
  nlohmann::json j;
  j["experiment"] = "discovery";
  j["world_seed"] = world_seed;
  j["config"] = exp2_config_json(report.config);
  nlohmann::json aggs = nlohmann::json::array();
  for (const Exp2Aggregate& a : report.aggregates) {
    nlohmann::json e;
    e["discard"] = a.discard;
    e["method"] = to_string(a.method);
    e["query_type"] = to_string(a.type);
    e["repeats"] = a.repeats;
    e["mean_overlap_accuracy"] = a.mean_overlap_accuracy;
    e["std_overlap_accuracy"] = a.std_overlap_accuracy;
    aggs.push_back(std::move(e));
  }
  j["aggregates"] = std::move(aggs);
  nlohmann::json sums = nlohmann::json::array();
  for (const Exp2RepeatSummary& s : report.repeat_summaries) {
    nlohmann::json e;
    e["repeat"] = s.repeat;
    e["discard"] = s.discard;
    e["method"] = to_string(s.method);
    e["query_type"] = to_string(s.type);
    e["learned"] = s.learned;
    e["matched"] = s.matched;
    e["overlap_accuracy"] = s.overlap_accuracy;
    sums.push_back(std::move(e));
  }
  j["repeat_summaries"] = std::move(sums);
  j["rows"] = report.rows.size();
  return j.dump(2) + "\n";
}

}  // namespace cql
