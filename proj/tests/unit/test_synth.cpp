#include <doctest.h>

#include <cmath>

#include "opg/io.hpp"
#include "opg/mallows.hpp"
#include "opg/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace opg;

namespace {

std::map<ItemId, std::size_t> review_counts(const std::map<GraderId, std::set<ItemId>>& design) {
  std::map<ItemId, std::size_t> out;
  for (const auto& [g, items] : design) {
    for (const auto& i : items) ++out[i];
  }
  return out;
}

SynthConfig small_config(std::size_t n_items, std::size_t n_graders, std::size_t k, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_items = n_items;
  cfg.n_graders = n_graders;
  cfg.items_per_grader = k;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("grader model strings") {
  auto m = GraderModel::parse("mallows:1.5");
  CHECK(m.kind == GraderModel::Kind::kMallows);
  CHECK(m.eta == 1.5);
  m = GraderModel::parse("normal:16:0.5:round");
  CHECK(m.kind == GraderModel::Kind::kCardinalNormal);
  CHECK(m.eta == 16.0);
  CHECK(m.bias_sd == 0.5);
  CHECK(m.round_grades);
  CHECK(m.to_string() == "normal:16:0.5:round");
  CHECK(GraderModel::parse("normal:4").to_string() == "normal:4");
  CHECK(GraderModel::parse("normal:4:round").round_grades);
  CHECK_THROWS_AS(GraderModel::parse("mallows:0"), ValidationError);
  CHECK_THROWS_AS(GraderModel::parse("mallows"), ValidationError);
  CHECK_THROWS_AS(GraderModel::parse("normal:x"), ValidationError);
  CHECK_THROWS_AS(GraderModel::parse("gauss:1"), ValidationError);
}

TEST_CASE("synthetic ids are zero padded") {
  CHECK(synth_item_id(3, 40).str() == "d03");
  CHECK(synth_grader_id(7, 150).str() == "g007");
  CHECK(synth_item_id(0, 1).str() == "d0");
}

TEST_CASE("assign_reviewers examples") {
  auto design = assign_reviewers(small_config(4, 4, 1, 1));
  CHECK(design.size() == 4);
  for (const auto& [item, c] : review_counts(design)) CHECK(c == 1);

  design = assign_reviewers(small_config(2, 4, 1, 2));
  const auto counts = review_counts(design);
  REQUIRE(counts.size() == 2);
  for (const auto& [item, c] : counts) CHECK(c == 2);

  design = assign_reviewers(small_config(5, 3, 5, 3));
  for (const auto& [g, items] : design) CHECK(items.size() == 5);

  CHECK_THROWS_AS(assign_reviewers(small_config(10, 2, 3, 0)), ValidationError);
  CHECK_THROWS_AS(assign_reviewers(small_config(3, 2, 4, 0)), ValidationError);
}

TEST_CASE("property: balanced designs are balanced and reproducible") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<std::size_t> n_dist(2, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = n_dist(rng);
    const std::size_t k = 1 + rng() % n;
    const std::size_t graders = (n + k - 1) / k + rng() % 20;
    const auto cfg = small_config(n, graders, k, rng());
    const auto design = assign_reviewers(cfg);
    const auto counts = review_counts(design);
    CHECK(counts.size() == n);
    std::size_t lo = SIZE_MAX;
    std::size_t hi = 0;
    for (const auto& [item, c] : counts) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(hi - lo <= 1);
    for (const auto& [g, items] : design) CHECK(items.size() == k);
    CHECK(assign_reviewers(cfg) == design);
  }
}

TEST_CASE("Mallows sampler concentrates on the center for large eta") {
  const auto items = oracle::item_ids(5);
  const auto truth = WeakRanking::total(items);
  const std::set<ItemId> subset{I("a"), I("c"), I("e")};
  std::mt19937_64 rng(62);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += sample_mallows_feedback(truth, subset, 50.0, rng) == truth.restricted_to(subset);
  CHECK(hits >= 1000);  // frequency > 0.999 over 1000 draws
  CHECK_THROWS_AS(sample_mallows_feedback(truth, subset, 0.0, rng), ValidationError);
  CHECK_THROWS_AS(sample_mallows_feedback(truth, {I("z")}, 1.0, rng), ValidationError);
}

TEST_CASE("Mallows sampler is uniform as eta vanishes") {
  const auto items = oracle::item_ids(3);
  const auto truth = WeakRanking::total(items);
  const std::set<ItemId> subset(items.begin(), items.end());
  std::mt19937_64 rng(63);
  std::map<std::vector<ItemId>, int> freq;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++freq[sample_mallows_feedback(truth, subset, 1e-6, rng).items()];
  double chi2 = 0.0;
  for (const auto& p : oracle::permutations(items)) {
    const double expected = draws / 6.0;
    const double d = freq[p] - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 15.086);  // chi-square 5 dof, p = 0.01
}

TEST_CASE("property: Mallows sampler matches the enumerated distribution") {
  std::mt19937_64 rng(64);
  for (std::size_t n = 2; n <= 5; ++n) {
    const auto items = oracle::item_ids(n);
    const auto truth = WeakRanking::total(items);
    const std::set<ItemId> subset(items.begin(), items.end());
    const double eta = 1.0;
    const double z = oracle::mallows_normalizer(eta, n);
    const int draws = 20000;
    std::map<std::vector<ItemId>, int> freq;
    for (int i = 0; i < draws; ++i) ++freq[sample_mallows_feedback(truth, subset, eta, rng).items()];
    for (const auto& p : oracle::permutations(items)) {
      const double prob = std::exp(-eta * oracle::inversions(items, p)) / z;
      const double sigma = std::sqrt(draws * prob * (1.0 - prob));
      CHECK(std::abs(freq[p] - draws * prob) <= 3.0 * sigma + 1.0);
    }
  }
}

TEST_CASE("generate_dataset shapes and reproducibility") {
  SynthConfig cfg = small_config(12, 20, 4, 5);
  const auto a = generate_dataset(cfg);
  CHECK(a.data.items().size() == 12);
  CHECK(a.data.graders().size() == 20);
  CHECK(a.data.all_ordinal());
  CHECK(a.truth_ranking.is_total());
  for (const auto& fb : a.data.feedback()) CHECK(fb.items.size() == 4);
  CHECK(to_ordinal_json(generate_dataset(cfg).data) == to_ordinal_json(a.data));
  cfg.seed = 6;
  CHECK_FALSE(generate_dataset(cfg).data == a.data);

  cfg.grader = GraderModel::parse("normal:4:0.5:round");
  const auto c = generate_dataset(cfg);
  CHECK(c.data.all_cardinal());
  CHECK(c.grader_bias.size() == 20);
  for (const auto& fb : c.data.feedback()) {
    for (const auto& [item, y] : *fb.cardinal) {
      CHECK(y == std::round(y));
      CHECK(y >= 1.0);
      CHECK(y <= 10.0);
    }
  }
  CHECK(to_cardinal_csv(generate_dataset(cfg).data) == to_cardinal_csv(c.data));
}

TEST_CASE("add_lazy_graders examples") {
  SynthConfig cfg = small_config(40, 150, 7, 7);
  cfg.grader = GraderModel::parse("normal:4");
  const auto base = generate_dataset(cfg).data;
  CHECK(add_lazy_graders(base, 0, 1) == base);

  const auto lazy = add_lazy_graders(base, 10, 1);
  CHECK(lazy.graders().size() == 160);
  CHECK(lazy.lazy().size() == 10);
  double sum = 0.0;
  double sum2 = 0.0;
  double count = 0.0;
  for (const auto& fb : base.feedback()) {
    for (const auto& [i, y] : *fb.cardinal) {
      sum += y;
      sum2 += y * y;
      count += 1.0;
    }
  }
  const double mean = sum / count;
  const double sd = std::sqrt(sum2 / count - mean * mean);
  double lazy_sum = 0.0;
  double lazy_count = 0.0;
  for (const auto& g : lazy.lazy()) {
    const auto* fb = lazy.feedback_for(g);
    REQUIRE(fb != nullptr);
    CHECK(fb->items.size() == 7);
    REQUIRE(fb->ordinal);
    for (const auto& [i, y] : *fb->cardinal) {
      lazy_sum += y;
      lazy_count += 1.0;
    }
  }
  CHECK(std::abs(lazy_sum / lazy_count - mean) <= 3.0 * sd / std::sqrt(lazy_count));
  CHECK_THROWS_AS(add_lazy_graders(Dataset(), 3, 1), ValidationError);
}

TEST_CASE("lazy grades on integer data stay integral and in range") {
  SynthConfig cfg = small_config(20, 40, 5, 8);
  cfg.grader = GraderModel::parse("normal:4:0.5:round");
  const auto base = generate_dataset(cfg).data;
  const auto lazy = add_lazy_graders(base, 5, 2);
  for (const auto& g : lazy.lazy()) {
    for (const auto& [i, y] : *lazy.feedback_for(g)->cardinal) {
      CHECK(y == std::round(y));
      CHECK(y >= 1.0);
      CHECK(y <= 10.0);
    }
  }
}

TEST_CASE("lazy graders on ordinal data report strict random orders") {
  const auto base = generate_dataset(small_config(10, 15, 4, 9)).data;
  const auto lazy = add_lazy_graders(base, 3, 4);
  for (const auto& g : lazy.lazy()) {
    const auto* fb = lazy.feedback_for(g);
    CHECK(fb->ordinal->is_total());
    CHECK(fb->items.size() == 4);
  }
}

TEST_CASE("property: lazy grades are uncorrelated with item quality") {
  double total_r = 0.0;
  const int seeds = 50;
  for (int seed = 0; seed < seeds; ++seed) {
    SynthConfig cfg = small_config(40, 150, 7, static_cast<std::uint64_t>(seed));
    cfg.grader = GraderModel::parse("normal:4");
    const auto synth = generate_dataset(cfg);
    const auto lazy = add_lazy_graders(synth.data, 10, static_cast<std::uint64_t>(1000 + seed));
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& g : lazy.lazy()) {
      for (const auto& [i, y] : *lazy.feedback_for(g)->cardinal) {
        xs.push_back(synth.truth_scores.at(i));
        ys.push_back(y);
      }
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    total_r += sxy / std::sqrt(sxx * syy);
  }
  CHECK(std::abs(total_r / seeds) < 0.2);
}
