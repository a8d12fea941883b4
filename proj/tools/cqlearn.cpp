// cqlearn: learn rule-based concept queries over a categorical catalog from
// positive examples only, discover concepts from itemset collections, and run
// the synthetic evaluation experiments.
//
// Exit codes: 0 success, 1 usage error, 2 data or contract error.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cql/dataset.hpp"
#include "cql/discovery.hpp"
#include "cql/error.hpp"
#include "cql/harness.hpp"
#include "cql/learner.hpp"
#include "cql/negatives.hpp"
#include "cql/query.hpp"
#include "cql/rng.hpp"
#include "json.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 1729;

void print_seed(std::uint64_t seed) { std::cerr << "seed " << seed << "\n"; }

cql::Dataset load_data(const std::string& data_path, const std::string& schema_path) {
  if (schema_path.empty()) return cql::load_dataset(data_path);
  return cql::load_dataset(data_path, schema_path);
}

std::vector<cql::ItemId> parse_id_file(const std::string& text, const std::string& path) {
  std::vector<cql::ItemId> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty()) {
      if (start > text.size()) break;
      continue;
    }
    cql::ItemId value = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw cql::Error(path + ": line " + std::to_string(line_no) + ": expected an item id, got '" +
                       std::string(line) + "'");
    ids.push_back(value);
    if (start > text.size()) break;
  }
  return ids;
}

// Positives arrive either as a file of dataset row ids or as a standalone CSV
// whose rows are matched to the catalog by value.
std::vector<cql::Item> load_positives(const std::string& path, const cql::Dataset& data) {
  const std::string text = cql::read_file(path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    cql::SidecarDomains domains;
    for (const auto& fd : data.schema.features()) domains[fd.name] = fd.values;
    cql::Dataset positives = cql::parse_dataset_csv(text, path, &domains);
    if (positives.schema.feature_count() != data.schema.feature_count())
      throw cql::Error(path + ": positives must carry exactly the dataset's features");
    std::vector<int> column(static_cast<std::size_t>(data.schema.feature_count()));
    for (int f = 0; f < data.schema.feature_count(); ++f) {
      const int pf = positives.schema.feature_index(data.schema.feature(f).name);
      if (pf < 0)
        throw cql::Error(path + ": missing feature '" + data.schema.feature(f).name + "'");
      column[static_cast<std::size_t>(f)] = pf;
    }
    std::vector<cql::Item> out;
    out.reserve(positives.items.size());
    for (const cql::Item& row : positives.items) {
      cql::Item item;
      item.values.resize(column.size());
      for (std::size_t f = 0; f < column.size(); ++f)
        item.values[f] = row.values[static_cast<std::size_t>(column[f])];
      out.push_back(std::move(item));
    }
    if (out.empty()) throw cql::Error(path + ": no positive items");
    return out;
  }
  std::vector<cql::ItemId> ids = parse_id_file(text, path);
  if (ids.empty()) throw cql::Error(path + ": no positive item ids");
  return data.items_by_ids(ids);
}

nlohmann::json report_to_json(const cql::LearnReport& r) {
  nlohmann::json j;
  j["n_positives"] = r.n_positives;
  j["n_negatives"] = r.n_negatives;
  j["dropped_conflicts"] = r.dropped_conflicts;
  j["tree_nodes"] = r.tree_nodes;
  j["tree_leaves"] = r.tree_leaves;
  j["kept_leaves"] = r.kept_leaves;
  j["discarded_leaves"] = r.discarded_leaves;
  j["empty_query"] = r.empty_query;
  return j;
}

std::string report_path_for(const std::string& out) {
  if (out.size() >= 11 && out.compare(out.size() - 11, 11, ".query.json") == 0)
    return out.substr(0, out.size() - 11) + ".report.json";
  if (out.size() >= 5 && out.compare(out.size() - 5, 5, ".json") == 0)
    return out.substr(0, out.size() - 5) + ".report.json";
  return out + ".report.json";
}

void require_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) ok = true;
    if (!ok) throw cql::Error(where + ": unknown key '" + it.key() + "'");
  }
}

struct SimulateOptions {
  std::string mode;
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = kDefaultSeed;
};

void run_simulate(const SimulateOptions& opt) {
  print_seed(opt.seed);
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(cql::read_file(opt.config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw cql::Error(opt.config_path + ": " + e.what());
  }
  if (!config.is_object()) throw cql::Error(opt.config_path + ": config must be a JSON object");
  require_keys(config, {"world", "exp1", "exp2"}, opt.config_path);

  cql::WorldSpec spec = cql::WorldSpec::desk();
  std::uint64_t world_seed = cql::seed_mix({opt.seed, 1});
  if (config.contains("world")) {
    const auto& w = config["world"];
    require_keys(w,
                 {"seed", "n_items", "n_features", "domain_min", "domain_max", "n_concepts",
                  "constrained_min", "constrained_max", "fraction_min", "fraction_max",
                  "value_skew", "extension_floor", "extension_cap", "max_disjuncts",
                  "max_attempts"},
                 opt.config_path + ": world");
    world_seed = w.value("seed", world_seed);
    spec.n_items = w.value("n_items", spec.n_items);
    spec.n_features = w.value("n_features", spec.n_features);
    spec.domain_min = w.value("domain_min", spec.domain_min);
    spec.domain_max = w.value("domain_max", spec.domain_max);
    spec.n_concepts = w.value("n_concepts", spec.n_concepts);
    spec.constrained_min = w.value("constrained_min", spec.constrained_min);
    spec.constrained_max = w.value("constrained_max", spec.constrained_max);
    spec.fraction_min = w.value("fraction_min", spec.fraction_min);
    spec.fraction_max = w.value("fraction_max", spec.fraction_max);
    spec.value_skew = w.value("value_skew", spec.value_skew);
    spec.extension_floor = w.value("extension_floor", spec.extension_floor);
    spec.extension_cap = w.value("extension_cap", spec.extension_cap);
    spec.max_disjuncts = w.value("max_disjuncts", spec.max_disjuncts);
    spec.max_attempts = w.value("max_attempts", spec.max_attempts);
  }

  std::cerr << "world_seed " << world_seed << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  cql::World world = cql::generate_world(spec, world_seed);
  std::cerr << "world " << world.data.size() << " items, " << world.concepts.size()
            << " concepts\n";

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out(opt.out_dir);

  if (opt.mode == "exp1") {
    cql::Exp1Config c;
    c.master_seed = cql::seed_mix({opt.seed, 2});
    if (config.contains("exp1")) {
      const auto& e = config["exp1"];
      require_keys(e,
                   {"sizes", "noise_ratios", "discard_thresholds", "methods", "query_types",
                    "repeats", "master_seed"},
                   opt.config_path + ": exp1");
      if (e.contains("sizes")) c.sizes = e["sizes"].get<std::vector<int>>();
      if (e.contains("noise_ratios"))
        c.noise_ratios = e["noise_ratios"].get<std::vector<double>>();
      if (e.contains("discard_thresholds"))
        c.discards = e["discard_thresholds"].get<std::vector<double>>();
      if (e.contains("methods")) {
        c.methods.clear();
        for (const auto& m : e["methods"])
          c.methods.push_back(cql::parse_negative_method(m.get<std::string>()));
      }
      if (e.contains("query_types")) {
        c.types.clear();
        for (const auto& t : e["query_types"])
          c.types.push_back(cql::parse_query_type(t.get<std::string>()));
      }
      c.repeats = e.value("repeats", c.repeats);
      c.master_seed = e.value("master_seed", c.master_seed);
    }
    std::cerr << "master_seed " << c.master_seed << "\n";
    cql::Exp1Report report = cql::run_experiment_1(world, c, opt.jobs);
    cql::write_file((out / "exp1_report.csv").string(), cql::exp1_report_csv(report));
    cql::write_file((out / "exp1_report.json").string(),
                    cql::exp1_report_json(report, world_seed));
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cerr << "cells " << report.rows.size() << "\nwall_ms " << ms << "\nwrote "
              << (out / "exp1_report.csv").string() << "\n";
  } else if (opt.mode == "exp2") {
    cql::Exp2Config c;
    c.master_seed = cql::seed_mix({opt.seed, 3});
    if (config.contains("exp2")) {
      const auto& e = config["exp2"];
      require_keys(e,
                   {"n_source_concepts", "itemsets_min", "itemsets_max", "itemset_size_min",
                    "itemset_size_max", "k", "discard_thresholds", "methods", "query_types",
                    "repeats", "map_cutoff", "master_seed"},
                   opt.config_path + ": exp2");
      c.n_source_concepts = e.value("n_source_concepts", c.n_source_concepts);
      c.itemsets_min = e.value("itemsets_min", c.itemsets_min);
      c.itemsets_max = e.value("itemsets_max", c.itemsets_max);
      c.size_min = e.value("itemset_size_min", c.size_min);
      c.size_max = e.value("itemset_size_max", c.size_max);
      if (e.contains("k") && !e["k"].is_string()) c.k = e["k"].get<int>();
      if (e.contains("discard_thresholds"))
        c.discards = e["discard_thresholds"].get<std::vector<double>>();
      if (e.contains("methods")) {
        c.methods.clear();
        for (const auto& m : e["methods"])
          c.methods.push_back(cql::parse_negative_method(m.get<std::string>()));
      }
      if (e.contains("query_types")) {
        c.types.clear();
        for (const auto& t : e["query_types"])
          c.types.push_back(cql::parse_query_type(t.get<std::string>()));
      }
      c.repeats = e.value("repeats", c.repeats);
      c.map_cutoff = e.value("map_cutoff", c.map_cutoff);
      c.master_seed = e.value("master_seed", c.master_seed);
    }
    std::cerr << "master_seed " << c.master_seed << "\n";
    cql::Exp2Report report = cql::run_experiment_2(world, c, opt.jobs);
    cql::write_file((out / "exp2_report.csv").string(), cql::exp2_report_csv(report));
    cql::write_file((out / "exp2_report.json").string(),
                    cql::exp2_report_json(report, world_seed));
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cerr << "rows " << report.rows.size() << "\nwall_ms " << ms << "\nwrote "
              << (out / "exp2_report.csv").string() << "\n";
  } else {
    throw CLI::ValidationError("simulate", "mode must be exp1 or exp2");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept query learning over categorical catalogs"};
  app.require_subcommand(1);

  // inspect
  std::string in_data, in_schema;
  std::uint64_t in_seed = kDefaultSeed;
  auto* inspect = app.add_subcommand("inspect", "print schema and dataset summary");
  inspect->add_option("--data", in_data, "dataset CSV")->required();
  inspect->add_option("--schema", in_schema, "sidecar schema JSON");
  inspect->add_option("--seed", in_seed, "random seed (unused, printed for the record)");
  inspect->callback([&] {
    print_seed(in_seed);
    cql::Dataset data = load_data(in_data, in_schema);
    std::cout << "features " << data.schema.feature_count() << "\n";
    for (const auto& fd : data.schema.features()) {
      std::cout << "  " << fd.name << ":";
      for (const auto& v : fd.values) std::cout << " " << v;
      std::cout << "\n";
    }
    std::cout << "items " << data.size() << "\n";
    std::cout << "binary_width " << data.schema.binary_width() << "\n";
  });

  // negatives
  std::string ng_data, ng_schema, ng_positives, ng_method = "likelihood";
  std::uint64_t ng_seed = kDefaultSeed;
  auto* negatives = app.add_subcommand("negatives", "list reliable-negative item ids");
  negatives->add_option("--data", ng_data, "dataset CSV")->required();
  negatives->add_option("--schema", ng_schema, "sidecar schema JSON");
  negatives->add_option("--positives", ng_positives, "id file or CSV of positive items")
      ->required();
  negatives->add_option("--method", ng_method, "likelihood|rocchio");
  negatives->add_option("--seed", ng_seed, "random seed (unused, printed for the record)");
  negatives->callback([&] {
    print_seed(ng_seed);
    cql::Dataset data = load_data(ng_data, ng_schema);
    std::vector<cql::Item> s = load_positives(ng_positives, data);
    const cql::NegativeMethod method = cql::parse_negative_method(ng_method);
    std::vector<cql::ItemId> ids = method == cql::NegativeMethod::likelihood
                                       ? cql::likelihood_negatives(s, data)
                                       : cql::rocchio_negatives(s, data);
    for (cql::ItemId id : ids) std::cout << id << "\n";
    std::cerr << "negatives " << ids.size() << " of " << (data.size() - s.size())
              << " unlabelled items\n";
  });

  // learn
  std::string ln_data, ln_schema, ln_positives, ln_method = "likelihood", ln_type = "dt", ln_out;
  double ln_discard = 0.0;
  std::uint64_t ln_seed = kDefaultSeed;
  auto* learn = app.add_subcommand("learn", "learn a concept query from positive items");
  learn->add_option("--data", ln_data, "dataset CSV")->required();
  learn->add_option("--schema", ln_schema, "sidecar schema JSON");
  learn->add_option("--positives", ln_positives, "id file or CSV of positive items")->required();
  learn->add_option("--method", ln_method, "negative selection: likelihood|rocchio");
  learn->add_option("--query", ln_type, "disjunct extraction: dt|items");
  learn->add_option("--discard", ln_discard, "leaf discard threshold d in [0,1]");
  learn->add_option("--seed", ln_seed, "random seed");
  learn->add_option("--out", ln_out, "output query JSON path")->required();
  learn->callback([&] {
    print_seed(ln_seed);
    cql::Dataset data = load_data(ln_data, ln_schema);
    std::vector<cql::Item> s = load_positives(ln_positives, data);
    cql::LearnerConfig config;
    config.method = cql::parse_negative_method(ln_method);
    config.type = cql::parse_query_type(ln_type);
    config.discard = ln_discard;
    config.seed = ln_seed;
    cql::LearnOutcome outcome = cql::learn_concept_query(s, data, config);

    cql::write_file(ln_out, cql::serialize_query(outcome.query, data.schema));
    nlohmann::json report = report_to_json(outcome.report);
    report["method"] = cql::to_string(config.method);
    report["query_type"] = cql::to_string(config.type);
    report["discard"] = config.discard;
    report["seed"] = config.seed;
    cql::write_file(report_path_for(ln_out), report.dump(2) + "\n");

    std::cerr << "positives " << outcome.report.n_positives << ", negatives "
              << outcome.report.n_negatives << ", tree nodes " << outcome.report.tree_nodes
              << ", kept leaves " << outcome.report.kept_leaves << ", discarded "
              << outcome.report.discarded_leaves << "\n";
    if (outcome.report.empty_query)
      std::cerr << "warning: every positive leaf fell under the discard threshold; the query "
                   "matches nothing\n";
    std::cerr << "wrote " << ln_out << " and " << report_path_for(ln_out) << "\n";
  });

  // discover
  std::string dc_data, dc_schema, dc_itemsets, dc_method = "likelihood", dc_type = "dt",
              dc_k = "auto", dc_out;
  double dc_discard = 0.0;
  std::uint64_t dc_seed = kDefaultSeed;
  auto* discover = app.add_subcommand("discover", "cluster itemsets and learn one query each");
  discover->add_option("--data", dc_data, "dataset CSV")->required();
  discover->add_option("--schema", dc_schema, "sidecar schema JSON");
  discover->add_option("--itemsets", dc_itemsets, "itemsets JSONL")->required();
  discover->add_option("--k", dc_k, "cluster count, or 'auto' for silhouette selection");
  discover->add_option("--method", dc_method, "negative selection: likelihood|rocchio");
  discover->add_option("--query", dc_type, "disjunct extraction: dt|items");
  discover->add_option("--discard", dc_discard, "leaf discard threshold d in [0,1]");
  discover->add_option("--seed", dc_seed, "random seed");
  discover->add_option("--out", dc_out, "output directory")->required();
  discover->callback([&] {
    print_seed(dc_seed);
    cql::Dataset data = load_data(dc_data, dc_schema);
    std::vector<cql::Itemset> itemsets =
        cql::parse_itemsets_jsonl(cql::read_file(dc_itemsets), data.schema, dc_itemsets);
    std::optional<int> k;
    if (dc_k != "auto") {
      int value = 0;
      auto [ptr, ec] = std::from_chars(dc_k.data(), dc_k.data() + dc_k.size(), value);
      if (ec != std::errc() || ptr != dc_k.data() + dc_k.size())
        throw CLI::ValidationError("--k", "expected an integer or 'auto'");
      k = value;
    }
    cql::LearnerConfig config;
    config.method = cql::parse_negative_method(dc_method);
    config.type = cql::parse_query_type(dc_type);
    config.discard = dc_discard;
    config.seed = dc_seed;
    cql::DiscoveryResult result = cql::discover_concepts(itemsets, data, k, config);

    std::filesystem::create_directories(dc_out);
    const std::filesystem::path out(dc_out);
    nlohmann::json manifest;
    manifest["k"] = result.model.k;
    manifest["iterations"] = result.model.iterations;
    manifest["converged"] = result.model.converged;
    manifest["seed"] = dc_seed;
    nlohmann::json clusters = nlohmann::json::array();
    for (const cql::DiscoveredConcept& dc : result.concepts) {
      nlohmann::json entry;
      entry["cluster"] = dc.cluster;
      entry["itemset_ids"] = dc.itemset_ids;
      entry["merged_items"] = dc.merged_items;
      entry["skipped"] = dc.skipped;
      entry["error"] = dc.error;
      if (!dc.skipped && dc.error.empty()) {
        char name[40];
        std::snprintf(name, sizeof name, "cluster_%02d.query.json", dc.cluster);
        cql::write_file((out / name).string(), cql::serialize_query(dc.query, data.schema));
        entry["query_file"] = name;
        entry["report"] = report_to_json(dc.report);
      }
      clusters.push_back(std::move(entry));
    }
    manifest["clusters"] = std::move(clusters);
    cql::write_file((out / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cerr << "k " << result.model.k << ", iterations " << result.model.iterations
              << (result.model.converged ? " (converged)" : " (iteration limit)") << "\nwrote "
              << (out / "manifest.json").string() << "\n";
  });

  // simulate
  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run a synthetic evaluation experiment");
  simulate->add_option("mode", sim.mode, "exp1 (recovery) or exp2 (discovery)")->required();
  simulate->add_option("--config", sim.config_path, "experiment config JSON")->required();
  simulate->add_option("--out", sim.out_dir, "output directory")->required();
  simulate->add_option("--jobs", sim.jobs, "parallel grid cells")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "random seed (config seeds win when set)");
  simulate->callback([&] { run_simulate(sim); });

  // eval
  std::string ev_data, ev_schema, ev_query, ev_truth;
  std::uint64_t ev_seed = kDefaultSeed;
  auto* eval = app.add_subcommand("eval", "score a query against ground-truth item ids");
  eval->add_option("--data", ev_data, "dataset CSV")->required();
  eval->add_option("--schema", ev_schema, "sidecar schema JSON");
  eval->add_option("--query", ev_query, "query JSON")->required();
  eval->add_option("--truth", ev_truth, "ground-truth id file")->required();
  eval->add_option("--seed", ev_seed, "random seed (unused, printed for the record)");
  eval->callback([&] {
    print_seed(ev_seed);
    cql::Dataset data = load_data(ev_data, ev_schema);
    cql::ConceptQuery query = cql::parse_query(cql::read_file(ev_query), data.schema);
    std::vector<cql::ItemId> truth = parse_id_file(cql::read_file(ev_truth), ev_truth);
    std::sort(truth.begin(), truth.end());
    truth.erase(std::unique(truth.begin(), truth.end()), truth.end());
    for (cql::ItemId id : truth)
      if (id < 0 || static_cast<std::size_t>(id) >= data.size())
        throw cql::Error(ev_truth + ": item id " + std::to_string(id) + " out of range");
    std::vector<cql::ItemId> predicted = cql::evaluate(query, data);
    const cql::Metrics m = cql::set_metrics(predicted, truth);
    char buf[96];
    std::snprintf(buf, sizeof buf, "precision %.9g\nrecall %.9g\nf1 %.9g\n", m.precision,
                  m.recall, m.f1);
    std::cout << buf;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cql::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
