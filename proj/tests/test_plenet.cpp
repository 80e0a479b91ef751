#include <doctest.h>

#include <cmath>

#include "canids/error.hpp"
#include "canids/plenet.hpp"
#include "canids/rng.hpp"

using namespace canids;
using namespace canids::plenet;

namespace {

// Class 1 iff the mean of the first four features exceeds 0.5, with a margin.
ingest::Partition separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ingest::Partition p;
  while (p.size() < n) {
    ingest::FeatureVector fv;
    for (std::size_t i = 0; i < 10; ++i) fv.x[i] = uniform01(rng);
    const double m = (fv.x[0] + fv.x[1] + fv.x[2] + fv.x[3]) / 4.0;
    if (std::abs(m - 0.5) < 0.1) continue;
    fv.y = m > 0.5 ? 1 : 0;
    p.rows.push_back(fv);
    p.kinds.push_back(AttackKind::None);
  }
  return p;
}

ingest::PreparedDataset toy(std::size_t n_train, std::uint64_t seed) {
  ingest::PreparedDataset ds;
  ds.train = separable(n_train, seed);
  ds.validation = separable(n_train / 4, seed + 1);
  ds.test = separable(n_train / 4, seed + 2);
  return ds;
}

}  // namespace

TEST_SUITE("plenet") {
  TEST_CASE("architecture and parameter counts") {
    const auto net = build_plenet(1);
    CHECK(net.parameter_count() == 12'052);
    CHECK(net.layer_parameter_count(0) == 30);
    CHECK(net.layer_parameter_count(3) == 520);
    CHECK(net.layer_parameter_count(7) == 10'500);
    CHECK(net.layer_parameter_count(9) == 1'002);
    const std::vector<nn::Shape> expected{{12, 5}, {12, 5}, {6, 5}, {2, 20}, {2, 20}, {1, 20},
                                          {20, 1}, {500, 1}, {500, 1}, {2, 1},  {2, 1}};
    CHECK(net.shapes() == expected);
    ingest::FeatureVector fv;
    fv.x.fill(0.3);
    const auto p = predict_one(net, fv);
    CHECK(std::abs(p.p_normal + p.p_attack - 1.0) < 1e-12);
  }

  TEST_CASE("separable toy data is learned within 50 epochs") {
    const auto ds = toy(200, 10);
    auto net = build_plenet(3);
    const auto h = train(net, ds, {50, 16, 0.003, 50, 4});
    CHECK(h.epochs[h.best_epoch].val_acc == 1.0);
    CHECK(evaluate(net, ds.validation.rows).accuracy == 1.0);
  }

  TEST_CASE("lr 0 leaves parameters untouched and history flat") {
    const auto ds = toy(100, 20);
    auto net = build_plenet(5);
    const auto before = net;
    const auto h = train(net, ds, {4, 32, 0.0, 50, 1});
    CHECK(net == before);
    REQUIRE(h.epochs.size() == 4);
    for (const auto& e : h.epochs) {
      CHECK(e.val_acc == h.epochs[0].val_acc);
      CHECK(e.val_loss == h.epochs[0].val_loss);
    }
    CHECK(h.best_epoch == 0);
  }

  TEST_CASE("training is bit-reproducible and returns the best epoch") {
    const auto ds = toy(150, 30);
    auto a = build_plenet(8);
    auto b = build_plenet(8);
    const auto ha = train(a, ds, {12, 16, 0.002, 3, 9});
    const auto hb = train(b, ds, {12, 16, 0.002, 3, 9});
    CHECK(a == b);
    CHECK(ha == hb);
    for (std::size_t i = 0; i < ha.epochs.size(); ++i) {
      CHECK(ha.epochs[i].val_acc <= ha.epochs[ha.best_epoch].val_acc);
      if (i < ha.best_epoch) CHECK(ha.epochs[i].val_acc < ha.epochs[ha.best_epoch].val_acc);
    }
    CHECK(evaluate(a, ds.validation.rows).accuracy == ha.epochs[ha.best_epoch].val_acc);
    CHECK(ha.epochs.size() <= ha.best_epoch + 1 + 3);
  }

  TEST_CASE("empty partitions are rejected") {
    auto ds = toy(50, 40);
    ds.validation.rows.clear();
    ds.validation.kinds.clear();
    auto net = build_plenet(1);
    try {
      train(net, ds, {1, 8, 0.001, 1, 1});
      FAIL("expected EmptyPartition");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyPartition);
    }
  }

  TEST_CASE("batch predictions equal single-row forward passes") {
    const auto part = separable(64, 50);
    const auto net = build_plenet(11);
    const auto batch = predict(net, part.rows);
    for (std::size_t i = 0; i < part.size(); ++i) {
      const auto out = net.forward(to_input(part.rows[i]));
      CHECK(batch[i].p_normal == out.data[0]);
      CHECK(batch[i].p_attack == out.data[1]);
      CHECK(batch[i].label == (out.data[1] >= out.data[0] ? 1 : 0));
    }
    const std::vector<ingest::FeatureVector> dup{part.rows[0], part.rows[0]};
    const auto d = predict(net, dup);
    CHECK(d[0] == d[1]);
  }

  TEST_CASE("exact probability ties go to Attack") {
    auto net = build_plenet(1);
    for (auto& p : net.params()[9].weights) p = 0.0;
    for (auto& p : net.params()[9].biases) p = 0.0;
    const auto pred = predict_one(net, ingest::FeatureVector{});
    CHECK(pred.p_attack == 0.5);
    CHECK(pred.label == 1);
  }

  TEST_CASE("mmd distance") {
    const std::vector<std::vector<double>> zeros(3, {0.0}), ones(5, {1.0});
    CHECK(mmd_distance(zeros, ones) == 1.0);
    CHECK(mmd_distance(ones, ones) == 0.0);
    Rng rng(60);
    std::vector<std::vector<double>> a(40, std::vector<double>(16)), b(25, std::vector<double>(16)),
        c(30, std::vector<double>(16));
    for (auto* set : {&a, &b, &c})
      for (auto& row : *set)
        for (auto& v : row) v = uniform01(rng);
    double ss = 0.0;
    for (std::size_t f = 0; f < 16; ++f) {
      double ma = 0.0, mb = 0.0;
      for (const auto& r : a) ma += r[f];
      for (const auto& r : b) mb += r[f];
      ss += std::pow(ma / 40.0 - mb / 25.0, 2);
    }
    CHECK(mmd_distance(a, b) == doctest::Approx(std::sqrt(ss)).epsilon(1e-12));
    CHECK(mmd_distance(a, b) == doctest::Approx(mmd_distance(b, a)).epsilon(1e-14));
    CHECK(mmd_distance(a, c) <= mmd_distance(a, b) + mmd_distance(b, c) + 1e-12);
    const std::vector<std::vector<double>> empty;
    CHECK_THROWS_AS(mmd_distance(empty, a), Error);
    CHECK_THROWS_AS(mmd_distance(zeros, a), Error);
  }

  TEST_CASE("ConvFrozen fine-tuning leaves conv layers byte-identical") {
    const auto ds = toy(120, 70);
    auto source = build_plenet(12);
    train(source, ds, {5, 16, 0.002, 5, 1});
    const auto target = toy(120, 80);
    const auto frozen = transfer_finetune(source, target, {5, 16, 0.002, 5, 2}, FreezeMode::ConvFrozen);
    CHECK(frozen.model.params()[0] == source.params()[0]);
    CHECK(frozen.model.params()[3] == source.params()[3]);
    CHECK(frozen.model.params()[7] != source.params()[7]);
    const auto free = transfer_finetune(source, target, {5, 16, 0.002, 5, 2}, FreezeMode::None);
    CHECK(free.model.params()[0] != source.params()[0]);
    const auto mask = trainable_mask(source, FreezeMode::ConvFrozen);
    CHECK(mask == std::vector<bool>{false, true, true, false, true, true, true, true, true, true, true});
  }

  TEST_CASE("warm start on the source data is not materially worse") {
    const auto ds = toy(200, 90);
    auto source = build_plenet(13);
    train(source, ds, {10, 16, 0.002, 10, 1});
    const double before = evaluate(source, ds.validation.rows).accuracy;
    const auto tuned = transfer_finetune(source, ds, {5, 16, 0.002, 5, 2}, FreezeMode::ConvFrozen);
    CHECK(evaluate(tuned.model, ds.validation.rows).accuracy >= before - 0.01);
  }
}
