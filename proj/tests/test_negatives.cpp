#include <vector>

#include "cql/dataset.hpp"
#include "cql/error.hpp"
#include "cql/negatives.hpp"
#include "cql/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cql;

TEST_CASE("value marginals are sample frequencies") {
  const Schema schema = oracle::make_schema({{"a", {"x", "y", "z"}}, {"b", {"p", "q"}}});
  const std::vector<Item> sample = {
      oracle::make_item(0, {0, 0}),
      oracle::make_item(1, {0, 1}),
      oracle::make_item(2, {1, 0}),
      oracle::make_item(3, {0, 0}),
  };
  const MarginalTable table = build_marginals(sample, schema);
  CHECK(table.support_size == 4);
  CHECK(table.probs[0][0] == doctest::Approx(0.75));
  CHECK(table.probs[0][1] == doctest::Approx(0.25));
  CHECK(table.probs[0][2] == 0.0);
  CHECK(table.probs[1][0] == doctest::Approx(0.75));
  CHECK(table.probs[1][1] == doctest::Approx(0.25));
}

TEST_CASE("unlabelled pool uses multiset matching by value") {
  const Schema schema = oracle::make_schema({{"a", {"x", "y"}}, {"b", {"p", "q"}}});
  // rows 0 and 1 are value-identical
  const Dataset data = oracle::make_dataset(schema, {{0, 0}, {0, 0}, {1, 1}});

  // one sample copy consumes exactly one of the duplicate rows (lowest id)
  std::vector<Item> one = {oracle::make_item(-1, {0, 0})};
  CHECK(unlabelled_pool(one, data) == std::vector<ItemId>{1, 2});

  std::vector<Item> two = {oracle::make_item(-1, {0, 0}), oracle::make_item(-1, {0, 0})};
  CHECK(unlabelled_pool(two, data) == std::vector<ItemId>{2});

  // a third copy has no instance left to consume
  std::vector<Item> three = {oracle::make_item(-1, {0, 0}), oracle::make_item(-1, {0, 0}),
                             oracle::make_item(-1, {0, 0})};
  CHECK_THROWS_WITH_AS(unlabelled_pool(three, data), doctest::Contains("no unmatched"), Error);
}

TEST_CASE("likelihood negatives: zero-marginal rule on a hand case") {
  const Schema schema = oracle::make_schema(
      {{"decade", {"1990s", "2000s", "2010s"}}, {"emotion", {"calm", "excited", "sad"}}});
  const Dataset data = oracle::make_dataset(schema, {
                                                        {1, 1},  // 0: in-sample values
                                                        {2, 1},  // 1: in-sample values
                                                        {0, 1},  // 2: unseen decade
                                                        {1, 0},  // 3: unseen emotion
                                                        {0, 2},  // 4: both unseen
                                                        {2, 1},  // 5: in-sample values
                                                    });
  const std::vector<Item> sample = data.items_by_ids(std::vector<ItemId>{0, 1});
  CHECK(likelihood_negatives(sample, data) == std::vector<ItemId>{2, 3, 4});
}

TEST_CASE("likelihood negatives match both independent oracles") {
  Rng rng(7001);
  for (int round = 0; round < 100; ++round) {
    const Schema schema = oracle::random_schema(rng);
    const Dataset data =
        oracle::random_dataset(rng, schema, static_cast<int>(rng.uniform_int(2, 80)));
    const int sample_size = static_cast<int>(
        rng.uniform_int(1, std::max<std::int64_t>(1, data.size() / 2)));
    std::vector<std::int64_t> ids(data.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    std::vector<ItemId> chosen;
    for (std::int64_t id : rng.sample(ids, sample_size)) chosen.push_back(id);
    const std::vector<Item> sample = data.items_by_ids(chosen);

    const std::vector<ItemId> got = likelihood_negatives(sample, data);
    CHECK(got == oracle::likelihood_negatives(sample, data));
    CHECK(got == oracle::msq_complement_negatives(sample, data));
  }
}

TEST_CASE("rocchio negatives: strictly closer to the unlabelled prototype") {
  const Schema schema = oracle::make_schema({{"a", {"x", "y"}}, {"b", {"p", "q"}}});
  // sample concentrated at (x,p); pool dominated by (y,q)
  const Dataset data = oracle::make_dataset(
      schema, {{0, 0}, {0, 0}, {0, 0}, {1, 1}, {1, 1}, {1, 1}, {1, 0}});
  const std::vector<Item> sample = data.items_by_ids(std::vector<ItemId>{0, 1, 2});
  // pool = {3,4,5,6}; prototype near (y,q). Rows 3-5 are clear negatives; row 6
  // (y,p) sits between the prototypes: distance to the labelled one is
  // 1+1+0+0 = 2, to the unlabelled one (0.25)^2*... strictly less, so it is
  // also a negative here.
  const std::vector<ItemId> got = rocchio_negatives(sample, data);
  CHECK(got == oracle::rocchio_negatives(sample, data));
  CHECK(got == std::vector<ItemId>{3, 4, 5, 6});
}

TEST_CASE("rocchio ties are not negatives: duplicated catalog yields none") {
  Rng rng(88);
  for (int round = 0; round < 20; ++round) {
    const Schema schema = oracle::random_schema(rng);
    const int n = static_cast<int>(rng.uniform_int(1, 15));
    Dataset data;
    data.schema = schema;
    std::vector<Item> sample;
    for (int i = 0; i < n; ++i) {
      Item item;
      item.id = -1;
      for (int f = 0; f < schema.feature_count(); ++f)
        item.values.push_back(
            static_cast<std::int32_t>(rng.uniform_int(0, schema.domain_size(f) - 1)));
      sample.push_back(item);
      // catalog holds every sample item twice
      for (int copy = 0; copy < 2; ++copy) {
        Item row = item;
        row.id = static_cast<ItemId>(data.items.size());
        data.items.push_back(row);
      }
    }
    // both prototypes coincide, every distance ties, nothing is negative
    CHECK(rocchio_negatives(sample, data).empty());
    CHECK(likelihood_negatives(sample, data).empty());
  }
}

TEST_CASE("symmetric two-value tie yields no negatives") {
  const Schema schema = oracle::make_schema({{"a", {"x", "y"}}});
  const Dataset data = oracle::make_dataset(schema, {{0}, {0}, {1}, {1}});
  const std::vector<Item> sample = {oracle::make_item(-1, {0}), oracle::make_item(-1, {1})};
  // pool = one x and one y; both prototypes are (0.5, 0.5)
  CHECK(rocchio_negatives(sample, data).empty());
}

TEST_CASE("rocchio negatives match the independent distance oracle") {
  Rng rng(7002);
  for (int round = 0; round < 100; ++round) {
    const Schema schema = oracle::random_schema(rng);
    const Dataset data =
        oracle::random_dataset(rng, schema, static_cast<int>(rng.uniform_int(2, 80)));
    const int sample_size = static_cast<int>(
        rng.uniform_int(1, std::max<std::int64_t>(1, data.size() / 2)));
    std::vector<std::int64_t> ids(data.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    std::vector<ItemId> chosen;
    for (std::int64_t id : rng.sample(ids, sample_size)) chosen.push_back(id);
    const std::vector<Item> sample = data.items_by_ids(chosen);
    CHECK(rocchio_negatives(sample, data) == oracle::rocchio_negatives(sample, data));
  }
}

TEST_CASE("empty pool means no negatives under either rule") {
  const Schema schema = oracle::make_schema({{"a", {"x", "y"}}});
  const Dataset data = oracle::make_dataset(schema, {{0}, {1}});
  const std::vector<Item> sample = data.items_by_ids(std::vector<ItemId>{0, 1});
  CHECK(likelihood_negatives(sample, data).empty());
  CHECK(rocchio_negatives(sample, data).empty());
}
