#include <doctest.h>

#include <cmath>

#include "opg/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace opg;

TEST_CASE("tau_kt examples") {
  const auto abc = W({{"a"}, {"b"}, {"c"}});
  CHECK(tau_kt(abc, abc) == 0.0);
  CHECK(tau_kt(abc, W({{"a", "b", "c"}})) == doctest::Approx(1.5));
  CHECK(tau_kt(W({{"a", "b"}, {"c"}}), W({{"c"}, {"a"}, {"b"}})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(tau_kt(abc, W({{"a"}, {"b"}})), ValidationError);
}

TEST_CASE("ek_error examples") {
  const auto abc = W({{"a"}, {"b"}, {"c"}});
  CHECK(ek_error({abc}, abc) == 0.0);
  CHECK(ek_error({abc}, W({{"c"}, {"b"}, {"a"}})) == doctest::Approx(100.0));
  CHECK(ek_error({abc}, W({{"a", "b", "c"}})) == doctest::Approx(50.0));
  // Macro average: 0% and 100% targets give 50%.
  CHECK(ek_error({abc, W({{"c"}, {"b"}, {"a"}})}, abc) == doctest::Approx(50.0));
  CHECK_THROWS_AS(ek_error({W({{"a", "b", "c"}})}, abc), ValidationError);
  CHECK_THROWS_AS(ek_error({}, abc), ValidationError);
}

TEST_CASE("cardinal_errors examples") {
  const std::map<ItemId, double> target{{I("a"), 10.0}, {I("b"), 8.0}};
  auto e = cardinal_errors(target, target);
  CHECK(e.mae == doctest::Approx(0.0));
  CHECK(e.rmse == doctest::Approx(0.0));
  e = cardinal_errors({{I("a"), 25.0}, {I("b"), 21.0}}, target);
  CHECK(e.mae == doctest::Approx(0.0));
  e = cardinal_errors({{I("a"), 1.0}, {I("b"), 0.0}}, target);
  CHECK(e.mae == doctest::Approx(0.0));
  CHECK(e.rmse == doctest::Approx(0.0));
  e = cardinal_errors({{I("a"), 0.0}, {I("b"), 1.0}}, target);
  CHECK(e.mae == doctest::Approx(2.0));
  CHECK(e.rmse == doctest::Approx(2.0));
  CHECK_THROWS_AS(cardinal_errors({{I("a"), 1.0}, {I("b"), 1.0}}, target), ValidationError);
  CHECK_THROWS_AS(cardinal_errors({{I("a"), 1.0}}, target), ValidationError);
}

TEST_CASE("property: a random order scores about 50 percent") {
  std::mt19937_64 rng(51);
  const auto items = oracle::item_ids(10);
  const auto target = WeakRanking::total(items);
  double total = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto order = items;
    std::shuffle(order.begin(), order.end(), rng);
    total += ek_error({target}, WeakRanking::total(order));
  }
  CHECK(std::abs(total / 1000.0 - 50.0) <= 2.0);
}

TEST_CASE("property: bounds, reversal equality and agreement with kendall tau") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto items = oracle::item_ids(n);
    const auto target = oracle::random_weak(items, 0.6, rng);
    const auto pred = oracle::random_weak(items, 0.6, rng);
    const double strict = static_cast<double>(target.strict_pair_count());
    const double tau = tau_kt(target, pred);
    CHECK(tau <= strict);
    if (strict > 0) {
      const double ek = ek_error({target}, pred);
      CHECK(ek >= 0.0);
      CHECK(ek <= 100.0);
    }
    auto rev = target.groups();
    std::reverse(rev.begin(), rev.end());
    const WeakRanking reversed(rev);
    CHECK(tau_kt(target, reversed) == strict);
    if (tau == strict) {
      // Every strict target pair must be reversed by the prediction.
      const auto pg = pred.group_index();
      for (const auto& p : extract_preferences(target)) CHECK(pg.at(p.better) > pg.at(p.worse));
    }
    const auto a = oracle::random_weak(items, 1.0, rng);
    const auto b = oracle::random_weak(items, 1.0, rng);
    CHECK(tau_kt(a, b) == static_cast<double>(kendall_tau_distance(a, b)));
  }
}
