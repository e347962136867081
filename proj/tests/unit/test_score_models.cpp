#include <doctest.h>

#include <cmath>

#include "opg/log.hpp"
#include "opg/optimizer.hpp"
#include "opg/score_models.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace opg;

namespace {

std::set<ItemId> as_set(const std::vector<ItemId>& v) { return {v.begin(), v.end()}; }

Dataset random_ordinal(std::size_t n_items, std::size_t n_graders, std::size_t per_grader, double p_cut,
                       std::mt19937_64& rng) {
  const auto items = oracle::item_ids(n_items);
  std::vector<WeakRanking> rankings;
  for (std::size_t g = 0; g < n_graders; ++g) {
    rankings.push_back(oracle::random_weak(oracle::random_subset(items, per_grader, rng), p_cut, rng));
  }
  return oracle::ordinal_dataset(items, rankings);
}

// Scores-only objective at eta = 1, written against the public term API.
class FixedEtaFit : public SeparableObjective {
 public:
  explicit FixedEtaFit(const ScoreModelObjective& obj) : obj_(obj) {}
  std::size_t dimension() const override { return obj_.n_items(); }
  std::size_t num_terms() const override { return obj_.n_terms(); }
  double term(std::size_t t, const std::vector<double>& x, std::vector<double>& grad) const override {
    std::vector<double> g(x.size(), 0.0);
    const double ll = obj_.term_log_likelihood(t, x, 1.0, &g, nullptr);
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] -= g[i];
    return -ll;
  }
  double regularizer(const std::vector<double>& x, std::vector<double>& grad) const override {
    return obj_.score_prior_penalty(x, &grad);
  }

 private:
  const ScoreModelObjective& obj_;
};

}  // namespace

TEST_CASE("pair probability examples") {
  CHECK(bt_pair_probability(0.3, 0.3, 5.0) == doctest::Approx(0.5));
  CHECK(bt_pair_probability(1.0, 0.0, 1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(bt_pair_probability(1.0, 0.0, 2.0) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
  CHECK(thurstone_pair_probability(2.0, 2.0, 3.0) == doctest::Approx(0.5));
  CHECK(thurstone_pair_probability(1.0, 0.0, 1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(thurstone_pair_probability(1.0, 0.0, 4.0) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
}

TEST_CASE("log_normal_cdf stays finite and accurate in the lower tail") {
  CHECK(log_normal_cdf(0.0) == doctest::Approx(std::log(0.5)));
  CHECK(log_normal_cdf(-5.0) == doctest::Approx(std::log(0.5 * std::erfc(5.0 / std::sqrt(2.0)))).epsilon(1e-12));
  // Asymptotically log Phi(z) ~ -z^2/2 - log(-z) - log(sqrt(2 pi)).
  const double z = -40.0;
  const double asym = -z * z / 2.0 - std::log(-z) - 0.5 * std::log(2.0 * M_PI);
  CHECK(log_normal_cdf(z) == doctest::Approx(asym).epsilon(1e-3));
  CHECK(std::isfinite(log_normal_cdf(-1e4)));
  for (double zz = -30.0; zz < -10.0; zz += 0.25) CHECK(log_normal_cdf(zz) < log_normal_cdf(zz + 0.25));
}

TEST_CASE("pl_ranking_log_probability examples") {
  const std::map<ItemId, double> flat{{I("a"), 0.4}, {I("b"), 0.4}, {I("c"), 0.4}};
  CHECK(pl_ranking_log_probability(W({{"a"}, {"b"}, {"c"}}), flat, 1.0) == doctest::Approx(std::log(1.0 / 6.0)));
  CHECK(pl_ranking_log_probability(W({{"b"}, {"a"}}), flat, 2.0) == doctest::Approx(std::log(0.5)));
  const std::map<ItemId, double> gap{{I("a"), 1.0}, {I("b"), 0.0}};
  CHECK(pl_ranking_log_probability(W({{"a"}, {"b"}}), gap, 1.0) ==
        doctest::Approx(-0.3132616875182228).epsilon(1e-12));
  CHECK_THROWS_AS(pl_ranking_log_probability(W({{"a", "b"}}), gap, 1.0), ValidationError);
}

TEST_CASE("property: PL probabilities over all strict orders sum to one") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto items = oracle::item_ids(n);
    std::map<ItemId, double> s;
    for (const auto& i : items) s.emplace(i, nd(rng));
    for (double eta : {0.3, 1.0, 4.0}) {
      double total = 0.0;
      for (const auto& p : oracle::permutations(items)) {
        total += std::exp(pl_ranking_log_probability(WeakRanking::total(p), s, eta));
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mals_log_likelihood examples") {
  const auto fb = [](const WeakRanking& r) { return GraderFeedback::from_ordinal(GraderId("g"), r); };
  const std::map<ItemId, double> flat{{I("a"), 1.0}, {I("b"), 1.0}, {I("c"), 1.0}};
  CHECK(mals_log_likelihood(fb(W({{"a"}, {"b"}, {"c"}})), flat, 1.0) == doctest::Approx(std::log(1.0 / 6.0)));
  CHECK(mals_log_likelihood(fb(W({{"a", "b"}, {"c"}})), flat, 1.0) == doctest::Approx(std::log(2.0 / 6.0)));
  const std::map<ItemId, double> gap{{I("a"), 1.0}, {I("b"), 0.0}};
  CHECK(mals_log_likelihood(fb(W({{"a"}, {"b"}})), gap, 1.0) == doctest::Approx(-0.3132616875182228).epsilon(1e-12));
  CHECK(mals_log_likelihood(fb(W({{"b"}, {"a"}})), gap, 1.0) == doctest::Approx(-1.3132616875182228).epsilon(1e-12));
}

TEST_CASE("mals_log_likelihood rejects subsets above the cap") {
  std::vector<std::vector<const char*>> groups{{"a"}, {"b"}, {"c"}, {"d"}};
  const auto fb = GraderFeedback::from_ordinal(GraderId("g"), W(groups));
  const std::map<ItemId, double> s{{I("a"), 0.0}, {I("b"), 0.0}, {I("c"), 0.0}, {I("d"), 0.0}};
  CHECK_THROWS_WITH_AS(mals_log_likelihood(fb, s, 1.0, 3), doctest::Contains("cap"), ValidationError);
  CHECK_NOTHROW(mals_log_likelihood(fb, s, 1.0, 4));
}

TEST_CASE("property: MALS matches enumeration and normalizes") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto items = oracle::item_ids(n);
    std::map<ItemId, double> s;
    for (const auto& i : items) s.emplace(i, nd(rng));
    const double eta = 0.2 + 0.1 * (trial % 20);
    const auto feedback = oracle::random_weak(items, 0.6, rng);
    const auto fb = GraderFeedback::from_ordinal(GraderId("g"), feedback);
    const double brute = oracle::mals_log_likelihood(feedback, s, eta);
    CHECK(oracle::rel_err(mals_log_likelihood(fb, s, eta), brute) < 1e-9);
    if (n <= 5) {
      double total = 0.0;
      for (const auto& p : oracle::permutations(items)) {
        total += std::exp(mals_log_likelihood(GraderFeedback::from_ordinal(GraderId("g"), WeakRanking::total(p)), s, eta));
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: analytic gradients match central differences") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ue(0.3, 3.0);
  const ModelConfig cfg;
  for (auto model : {ScoreModel::kBradleyTerry, ScoreModel::kThurstone, ScoreModel::kPlackettLuce, ScoreModel::kMals}) {
    CAPTURE(score_model_name(model));
    for (int point = 0; point < 20; ++point) {
      const auto data = random_ordinal(6, 4, 4, 0.7, rng);
      const ScoreModelObjective obj(model, data, cfg, 5);
      std::vector<double> s(obj.n_items());
      std::vector<double> eta(obj.n_graders());
      for (double& v : s) v = nd(rng);
      for (double& v : eta) v = ue(rng);
      const auto at = obj.evaluate(s, eta);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double fd = oracle::central_difference(
            [&](double x) {
              auto t = s;
              t[i] = x;
              return obj.evaluate(t, eta).value;
            },
            s[i]);
        CHECK(oracle::rel_err(at.score_gradient[i], fd) < 1e-4);
      }
      for (std::size_t g = 0; g < eta.size(); ++g) {
        const double fd = oracle::central_difference(
            [&](double x) {
              auto t = eta;
              t[g] = x;
              return obj.evaluate(s, t).value;
            },
            eta[g]);
        CHECK(oracle::rel_err(at.reliability_gradient[g], fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("property: BT, THUR and PL fits agree from random starts") {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> nd(0.0, 2.0);
  ModelConfig cfg;
  for (auto model : {ScoreModel::kBradleyTerry, ScoreModel::kThurstone, ScoreModel::kPlackettLuce}) {
    CAPTURE(score_model_name(model));
    const auto data = random_ordinal(8, 10, 4, 0.8, rng);
    const ScoreModelObjective obj(model, data, cfg, 9);
    const FixedEtaFit fit(obj);
    std::vector<OptimizeResult> runs;
    for (int start = 0; start < 5; ++start) {
      std::vector<double> x0(obj.n_items());
      for (double& v : x0) v = nd(rng);
      auto sgd = cfg.sgd;
      sgd.seed = static_cast<std::uint64_t>(start);
      runs.push_back(minimize(fit, x0, sgd));
    }
    for (const auto& r : runs) {
      CHECK(std::abs(r.value - runs[0].value) < 1e-4);
      for (std::size_t i = 0; i < r.x.size(); ++i) CHECK(std::abs(r.x[i] - runs[0].x[i]) < 1e-3);
    }
  }
}

TEST_CASE("BT on one preference matches the one-dimensional stationarity condition") {
  const auto items = oracle::item_ids(2);
  const auto data = oracle::ordinal_dataset(items, {W({{"a"}, {"b"}})});
  // s_a = -s_b = x solves x / 9 = 1 - sigmoid(2x); bisection.
  double lo = 0.0;
  double hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = mid / 9.0 - (1.0 - 1.0 / (1.0 + std::exp(-2.0 * mid)));
    (f > 0.0 ? hi : lo) = mid;
  }
  const auto est = fit_score_model(data, ScoreModel::kBradleyTerry, ModelConfig{}, false);
  REQUIRE(est.scores);
  CHECK(std::abs(est.scores->at(I("a")) - lo) < 1e-3);
  CHECK(std::abs(est.scores->at(I("b")) + lo) < 1e-3);
  CHECK(est.ranking == W({{"a"}, {"b"}}));
}

TEST_CASE("symmetric data gives equal scores") {
  const auto items = oracle::item_ids(4);
  const auto r1 = W({{"a"}, {"b"}, {"c"}, {"d"}});
  const auto r2 = W({{"d"}, {"c"}, {"b"}, {"a"}});
  const auto r3 = W({{"b"}, {"a"}, {"d"}});
  const auto r4 = W({{"d"}, {"a"}, {"b"}});
  const auto data = oracle::ordinal_dataset(items, {r1, r2, r3, r4});
  for (auto model : {ScoreModel::kBradleyTerry, ScoreModel::kThurstone, ScoreModel::kMals}) {
    CAPTURE(score_model_name(model));
    const auto est = fit_score_model(data, model, ModelConfig{}, false);
    REQUIRE(est.scores);
    for (const auto& [item, s] : *est.scores) CHECK(std::abs(s - est.scores->begin()->second) < 1e-6);
  }
}

TEST_CASE("fit metadata and errors") {
  const auto items = oracle::item_ids(3);
  const auto data = oracle::ordinal_dataset(items, {W({{"a", "b"}, {"c"}}), W({{"c"}, {"a"}})});
  const auto pl = fit_score_model(data, ScoreModel::kPlackettLuce, ModelConfig{}, false);
  CHECK(pl.metadata.at("pl_tie_groups_broken") == "1");
  CHECK_THROWS_AS(fit_score_model(Dataset(items, {}, {}), ScoreModel::kBradleyTerry, ModelConfig{}, false),
                  ValidationError);
  ModelConfig small;
  small.mals_cap = 2;
  CHECK_THROWS_AS(fit_score_model(data, ScoreModel::kMals, small, false), ValidationError);
}

TEST_CASE("property: +G never ranks an agreeing grader below its reversal") {
  std::mt19937_64 rng(35);
  ModelConfig cfg;
  cfg.sgd.alternating_iterations = 3;
  for (auto model : {ScoreModel::kBradleyTerry, ScoreModel::kThurstone, ScoreModel::kPlackettLuce, ScoreModel::kMals}) {
    CAPTURE(score_model_name(model));
    const auto items = oracle::item_ids(6);
    const auto truth = WeakRanking::total(items);
    std::vector<WeakRanking> rankings;
    for (int g = 0; g < 6; ++g) {
      rankings.push_back(truth.restricted_to(as_set(oracle::random_subset(items, 4, rng))));
    }
    const auto probe = oracle::random_subset(items, 4, rng);
    auto agree = truth.restricted_to(as_set(probe)).items();
    rankings.push_back(WeakRanking::total(agree));
    std::reverse(agree.begin(), agree.end());
    rankings.push_back(WeakRanking::total(agree));
    const auto est = fit_score_model(oracle::ordinal_dataset(items, rankings), model, cfg, true);
    REQUIRE(est.reliabilities);
    CHECK(est.reliabilities->at(GraderId("g6")) >= est.reliabilities->at(GraderId("g7")));
    for (const auto& [g, eta] : *est.reliabilities) CHECK(eta >= kMinReliability);
  }
}
