// End-to-end checks of the command-line tool, driven through the shell.
// CQLEARN_BIN and CQL_DATA_DIR arrive via the test environment.
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "cql/dataset.hpp"
#include "cql/negatives.hpp"
#include "cql/query.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string env(const char* name) {
  const char* value = std::getenv(name);
  REQUIRE_MESSAGE(value != nullptr, "missing environment variable: " << name);
  return value;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::current_path() / "cli_test_tmp";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out_file = work_dir() / ("stdout_" + std::to_string(counter++) + ".txt");
  const std::string command =
      "\"" + env("CQLEARN_BIN") + "\" " + args + " > \"" + out_file.string() + "\" 2>/dev/null";
  const int raw = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_file);
  return result;
}

std::string data_file(const char* name) { return (fs::path(env("CQL_DATA_DIR")) / name).string(); }

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("").exit_code == 1);
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("learn --data missing.csv").exit_code == 1);  // missing required --positives/--out
  CHECK(run("--help").exit_code == 0);
  CHECK(run("learn --help").exit_code == 0);
}

TEST_CASE("data errors exit with code 2") {
  CHECK(run("inspect --data /nonexistent/x.csv").exit_code == 2);
  const fs::path bad = work_dir() / "bad.csv";
  std::ofstream(bad) << "a,b\nx\n";  // ragged row
  CHECK(run("inspect --data \"" + bad.string() + "\"").exit_code == 2);
  CHECK(run("negatives --data " + data_file("toy_songs.csv") + " --positives " +
            data_file("toy_positives.txt") + " --method knn")
            .exit_code == 2);
}

TEST_CASE("inspect prints the schema summary") {
  const RunResult r = run("inspect --data " + data_file("toy_songs.csv"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("features 3") != std::string::npos);
  CHECK(r.out.find("decade:") != std::string::npos);
  CHECK(r.out.find("items 30") != std::string::npos);
}

TEST_CASE("negatives match the library computation") {
  const RunResult r = run("negatives --data " + data_file("toy_songs.csv") + " --positives " +
                          data_file("toy_positives.txt") + " --method likelihood");
  CHECK(r.exit_code == 0);

  const cql::Dataset data = cql::load_dataset(data_file("toy_songs.csv"));
  std::vector<cql::ItemId> ids;
  for (cql::ItemId id = 0; id <= 8; ++id) ids.push_back(id);
  const std::vector<cql::Item> sample = data.items_by_ids(ids);
  std::string expected;
  for (cql::ItemId id : cql::likelihood_negatives(sample, data))
    expected += std::to_string(id) + "\n";
  CHECK(r.out == expected);
}

TEST_CASE("learn writes a query and a report, and eval scores it perfectly") {
  const fs::path query_path = work_dir() / "toy.query.json";
  const RunResult learn =
      run("learn --data " + data_file("toy_songs.csv") + " --positives " +
          data_file("toy_positives.txt") + " --method likelihood --query dt --discard 0 " +
          "--out \"" + query_path.string() + "\"");
  REQUIRE(learn.exit_code == 0);
  REQUIRE(fs::exists(query_path));
  REQUIRE(fs::exists(work_dir() / "toy.report.json"));

  const cql::Dataset data = cql::load_dataset(data_file("toy_songs.csv"));
  const cql::ConceptQuery q = cql::parse_query(slurp(query_path), data.schema);
  CHECK_FALSE(q.disjuncts.empty());

  const nlohmann::json report = nlohmann::json::parse(slurp(work_dir() / "toy.report.json"));
  CHECK(report.at("n_positives").get<int>() == 9);
  CHECK(report.at("empty_query").get<bool>() == false);

  const RunResult eval =
      run("eval --data " + data_file("toy_songs.csv") + " --query \"" + query_path.string() +
          "\" --truth " + data_file("toy_positives.txt"));
  CHECK(eval.exit_code == 0);
  // the toy concept is exactly recoverable, so all three scores print as 1
  CHECK(eval.out == "precision 1\nrecall 1\nf1 1\n");
}

TEST_CASE("positives can arrive as a standalone csv matched by value") {
  const fs::path query_path = work_dir() / "by_value.query.json";
  const RunResult learn =
      run("learn --data " + data_file("toy_songs.csv") + " --positives " +
          data_file("toy_positives.csv") + " --query items --out \"" + query_path.string() +
          "\"");
  REQUIRE(learn.exit_code == 0);
  const RunResult eval =
      run("eval --data " + data_file("toy_songs.csv") + " --query \"" + query_path.string() +
          "\" --truth " + data_file("toy_positives.txt"));
  CHECK(eval.exit_code == 0);
  CHECK(eval.out == "precision 1\nrecall 1\nf1 1\n");
}

TEST_CASE("discover writes per-cluster queries and a manifest") {
  const fs::path out_dir = work_dir() / "discovered";
  const RunResult r = run("discover --data " + data_file("toy_songs.csv") + " --itemsets " +
                          data_file("toy_itemsets.jsonl") + " --k 2 --out \"" +
                          out_dir.string() + "\"");
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(out_dir / "manifest.json"));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
  CHECK(manifest.at("k").get<int>() == 2);
  const auto& clusters = manifest.at("clusters");
  REQUIRE(clusters.size() == 2u);
  const cql::Dataset data = cql::load_dataset(data_file("toy_songs.csv"));
  for (const auto& entry : clusters) {
    REQUIRE(entry.at("error").get<std::string>().empty());
    const std::string file = entry.at("query_file").get<std::string>();
    const cql::ConceptQuery q = cql::parse_query(slurp(out_dir / file), data.schema);
    CHECK_FALSE(q.disjuncts.empty());
  }
}

TEST_CASE("simulate runs a small grid and writes both report files") {
  const fs::path config_path = work_dir() / "sim_config.json";
  std::ofstream(config_path) << R"({
    "world": {"n_items": 400, "n_features": 4, "domain_min": 3, "domain_max": 5,
              "n_concepts": 2, "constrained_min": 1, "constrained_max": 2,
              "extension_floor": 30},
    "exp1": {"sizes": [10, 20], "repeats": 1}
  })";
  const fs::path out_dir = work_dir() / "sim_out";
  const RunResult r = run("simulate exp1 --config \"" + config_path.string() + "\" --out \"" +
                          out_dir.string() + "\" --jobs 2 --seed 7");
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(out_dir / "exp1_report.csv"));
  REQUIRE(fs::exists(out_dir / "exp1_report.json"));
  const std::string csv = slurp(out_dir / "exp1_report.csv");
  // 2 concepts x 2 sizes x 2 methods x 2 types x 1 repeat rows + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  const nlohmann::json report = nlohmann::json::parse(slurp(out_dir / "exp1_report.json"));
  CHECK(report.at("experiment").get<std::string>() == "recovery");

  CHECK(run("simulate exp3 --config \"" + config_path.string() + "\" --out \"" +
            out_dir.string() + "\"")
            .exit_code == 1);
}
