#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "canids/baselines.hpp"
#include "canids/error.hpp"
#include "canids/rng.hpp"

using namespace canids;
using namespace canids::baselines;

namespace {

std::vector<ingest::FeatureVector> random_points(std::size_t n, Rng& rng) {
  std::vector<ingest::FeatureVector> out(n);
  for (auto& fv : out) {
    for (auto& v : fv.x) v = uniform01(rng);
    fv.y = static_cast<std::uint8_t>(uniform_below(rng, 2));
  }
  return out;
}

// All-pairs distances, stable sort by (distance, index), majority with ties to Attack.
std::uint8_t brute_force_knn(const std::vector<ingest::FeatureVector>& train, const Point& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0.0;
    for (std::size_t f = 0; f < q.size(); ++f) s += (train[i].x[f] - q[f]) * (train[i].x[f] - q[f]);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::size_t attack = 0;
  for (std::size_t i = 0; i < k; ++i) attack += train[d[i].second].y;
  return 2 * attack >= k ? 1 : 0;
}

double train_accuracy(const DecisionTree& tree, const std::vector<ingest::FeatureVector>& rows) {
  std::size_t ok = 0;
  for (const auto& r : rows) ok += tree_predict(tree, r.x) == r.y;
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

ingest::FeatureVector point2(double a, double b, std::uint8_t y) {
  ingest::FeatureVector fv;
  fv.x[0] = a;
  fv.x[1] = b;
  fv.y = y;
  return fv;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("knn matches the brute-force oracle") {
    Rng rng(100);
    const auto train = random_points(500, rng);
    const auto queries = random_points(50, rng);
    for (std::size_t k : {1u, 5u, 12u}) {
      const auto model = knn_fit(train, k);
      for (const auto& q : queries) REQUIRE(knn_predict(model, q.x).label == brute_force_knn(train, q.x, k));
    }
  }

  TEST_CASE("knn small cases") {
    Rng rng(101);
    const auto train = random_points(30, rng);
    const auto model = knn_fit(train, 1);
    for (const auto& p : train) CHECK(knn_predict(model, p.x).label == p.y);
    const auto all = knn_fit(train, 30);
    std::size_t attacks = 0;
    for (const auto& p : train) attacks += p.y;
    const auto v = knn_predict(all, train[0].x);
    CHECK(v.label == (2 * attacks >= 30 ? 1 : 0));
    CHECK(v.attack_fraction == doctest::Approx(static_cast<double>(attacks) / 30.0));
    CHECK_THROWS_AS(knn_fit(train, 31), Error);
    CHECK_THROWS_AS(knn_fit({}, 1), Error);

    const std::vector<ingest::FeatureVector> even{point2(0, 0, 0), point2(1, 1, 1)};
    CHECK(knn_predict(knn_fit(even, 2), point2(0.2, 0.2, 0).x).label == 1);
  }

  TEST_CASE("knn is invariant to permuting the training set") {
    Rng rng(102);
    auto train = random_points(200, rng);
    const auto queries = random_points(30, rng);
    const auto model = knn_fit(train, 5);
    shuffle(train, rng);
    const auto permuted = knn_fit(train, 5);
    for (const auto& q : queries) CHECK(knn_predict(model, q.x).label == knn_predict(permuted, q.x).label);
  }

  TEST_CASE("tree basics") {
    const std::vector<ingest::FeatureVector> single{point2(0.1, 0.2, 1), point2(0.4, 0.9, 1)};
    const auto leaf = tree_fit(single, 5);
    CHECK(leaf.nodes.size() == 1);
    CHECK(leaf.nodes[0].label == 1);

    const std::vector<ingest::FeatureVector> line{point2(0, 0, 0), point2(1, 0, 1)};
    const auto stump = tree_fit(line, 5);
    CHECK(stump.nodes.size() == 3);
    CHECK(stump.nodes[0].feature == 0);
    CHECK(stump.nodes[0].threshold == 0.5);
    CHECK(train_accuracy(stump, line) == 1.0);
    CHECK_THROWS_AS(tree_fit({}, 3), Error);
  }

  TEST_CASE("xor needs depth two") {
    const std::vector<ingest::FeatureVector> xorset{point2(0, 0, 0), point2(0, 1, 1), point2(1, 0, 1), point2(1, 1, 0)};
    const auto deep = tree_fit(xorset, 2);
    CHECK(train_accuracy(deep, xorset) == 1.0);
    CHECK(deep.depth() == 2);
    CHECK(train_accuracy(tree_fit(xorset, 1), xorset) <= 0.75);
  }

  TEST_CASE("training accuracy is monotone in depth and leaves route every row once") {
    Rng rng(103);
    const auto rows = random_points(300, rng);
    double prev = 0.0;
    for (std::size_t depth = 0; depth <= 10; ++depth) {
      const auto tree = tree_fit(rows, depth);
      const double acc = train_accuracy(tree, rows);
      CHECK(acc >= prev);
      prev = acc;
      std::size_t total = 0;
      for (const auto& n : tree.nodes)
        if (n.leaf) total += n.counts[0] + n.counts[1];
      CHECK(total == rows.size());
      CHECK(tree.depth() <= depth);
    }
    const auto capped = tree_fit(rows, 10, 20);
    for (const auto& n : capped.nodes)
      if (n.leaf) CHECK(n.counts[0] + n.counts[1] >= 20);
  }

  TEST_CASE("mlp shape, output and gradients") {
    const auto mlp = build_mlp(4);
    CHECK(mlp.parameter_count() == (16 * 68 + 68) + (68 * 68 + 68) + (68 * 2 + 2));
    CHECK(mlp.parameter_count() == 5'986);
    Rng rng(104);
    std::vector<nn::Tensor> batch;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> x(16);
      for (auto& v : x) v = uniform01(rng);
      batch.emplace_back(16, 1, std::move(x));
      labels.push_back(static_cast<std::size_t>(i % 2));
    }
    const auto out = mlp.forward(batch[0]);
    CHECK(std::abs(out.data[0] + out.data[1] - 1.0) < 1e-12);
    const auto r = nn::grad_check(mlp, batch, labels);
    CHECK(r.max_rel_error < 1e-6);
  }
}
