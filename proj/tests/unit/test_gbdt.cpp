#include <doctest.h>

#include <cmath>
#include <numeric>

#include "procex/error.hpp"
#include "procex/gbdt.hpp"
#include "procex/rng.hpp"

using namespace procex;
using namespace procex::gbdt;

namespace {

std::vector<FeatureSpec> two_columns() {
  return {{"x", FeatureKind::Numeric, {}}, {"colour", FeatureKind::Categorical, {"red", "green", "blue", "grey"}}};
}

// Label 0 for grey, otherwise 1 when x < 5 and 2 when x >= 5.
void separable(Rng& rng, int n, FeatureMatrix& data, std::vector<int>& labels) {
  data.features = two_columns();
  for (int r = 0; r < n; ++r) {
    const double x = static_cast<double>(rng.below(10));
    const double colour = static_cast<double>(rng.below(4));
    const std::vector<double> row{x, colour};
    data.add_row(row);
    labels.push_back(colour == 3 ? 0 : (x < 5 ? 1 : 2));
  }
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

GbdtConfig small(int iterations) {
  GbdtConfig c;
  c.iterations = iterations;
  return c;
}

}  // namespace

TEST_CASE("single stump matches the Newton step") {
  FeatureMatrix data;
  data.features = {{"x", FeatureKind::Numeric, {}}};
  data.add_row(std::vector<double>{0.0});
  data.add_row(std::vector<double>{1.0});
  const std::vector<int> labels{0, 1};
  const auto result = train_gbdt(data, labels, 2, small(1));
  const auto& tree = result.model.trees.at(0).at(1);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == 0.5);
  // g = +-0.5, h = 0.25, lambda = 1: leaf = -0.1 * (+-0.5) / 1.25.
  CHECK(tree.predict(std::vector<double>{0.0}) == doctest::Approx(-0.04).epsilon(1e-12));
  CHECK(tree.predict(std::vector<double>{1.0}) == doctest::Approx(0.04).epsilon(1e-12));
  REQUIRE(result.loss_history.size() == 2);
  CHECK(result.loss_history[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(result.loss_history[1] < result.loss_history[0]);
}

TEST_CASE("separable table is learned exactly") {
  Rng rng(41);
  FeatureMatrix data;
  std::vector<int> labels;
  separable(rng, 200, data, labels);
  const auto result = train_gbdt(data, labels, 3, small(100));
  for (std::size_t r = 0; r < data.rows(); ++r) CHECK(argmax(result.model.raw_scores(data.row(r))) == labels[r]);
  CHECK(result.loss_history.back() < result.loss_history.front());
  for (std::size_t k = 1; k < result.loss_history.size(); ++k) {
    CHECK(result.loss_history[k] <= result.loss_history[k - 1] + 1e-12);
  }
  for (const auto& iteration : result.model.trees) {
    for (const auto& tree : iteration) CHECK(tree.depth() <= 4);
  }
}

TEST_CASE("categorical splits send category sets left") {
  FeatureMatrix data;
  data.features = two_columns();
  std::vector<int> labels;
  for (int rep = 0; rep < 5; ++rep) {
    for (int colour = 0; colour < 4; ++colour) {
      data.add_row(std::vector<double>{0.0, static_cast<double>(colour)});
      labels.push_back(colour % 2);
    }
  }
  const auto result = train_gbdt(data, labels, 2, small(20));
  const auto& root = result.model.trees[0][0].nodes[0];
  CHECK(root.feature == 1);
  CHECK((root.left_categories == std::vector<int>{0, 2} || root.left_categories == std::vector<int>{1, 3}));
  for (std::size_t r = 0; r < data.rows(); ++r) CHECK(argmax(result.model.raw_scores(data.row(r))) == labels[r]);
}

TEST_CASE("training is deterministic and survives serialization") {
  Rng rng(42);
  FeatureMatrix data;
  std::vector<int> labels;
  separable(rng, 120, data, labels);
  const auto sampler = [](int it) {
    std::vector<std::size_t> rows;
    for (std::size_t r = static_cast<std::size_t>(it % 2); r < 120; r += 2) rows.push_back(r);
    return rows;
  };
  const auto a = train_gbdt(data, labels, 3, small(30), sampler);
  const auto b = train_gbdt(data, labels, 3, small(30), sampler);
  const auto back = gbdt_from_json(nlohmann::json::parse(to_json(a.model).dump()));
  CHECK(a.loss_history == b.loss_history);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    CHECK(a.model.raw_scores(data.row(r)) == b.model.raw_scores(data.row(r)));
    CHECK(back.raw_scores(data.row(r)) == a.model.raw_scores(data.row(r)));
  }
}

TEST_CASE("degenerate input") {
  FeatureMatrix data;
  data.features = {{"x", FeatureKind::Numeric, {}}};
  data.add_row(std::vector<double>{0.0});
  data.add_row(std::vector<double>{1.0});
  CHECK_THROWS_AS(train_gbdt(data, std::vector<int>{1, 1}, 2, small(5)), InputError);
  CHECK_THROWS_AS(train_gbdt(data, std::vector<int>{0}, 2, small(5)), InputError);
  CHECK_THROWS_AS(train_gbdt(data, std::vector<int>{0, 2}, 2, small(5)), InputError);
  CHECK_THROWS_AS(data.add_row(std::vector<double>{0.0, 1.0}), std::invalid_argument);

  const auto ok = train_gbdt(data, std::vector<int>{0, 1}, 2, small(2));
  CHECK_THROWS_AS(ok.model.raw_scores(std::vector<double>{0.0, 1.0}), InputError);
}

TEST_CASE("softmax") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(7);
    for (auto& v : s) v = 50 * (2 * rng.uniform() - 1);
    const auto p = softmax(s);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(argmax(p) == argmax(s));
  }
}
