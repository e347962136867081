#include "opg/mallows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "opg/log.hpp"
#include "opg/optimizer.hpp"

namespace opg {
namespace {

// Strict positions of every item in `center`; items inside one tie group get
// consecutive positions in id order.
std::vector<std::size_t> positions_in(const WeakRanking& center, const Dataset& data) {
  constexpr auto kMissing = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pos(data.items().size(), kMissing);
  std::size_t next = 0;
  for (const auto& group : center.groups()) {
    for (const auto& item : group) pos[data.item_index(item)] = next++;
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i] == kMissing) throw ValidationError("center ranking misses item '" + data.items()[i].str() + "'");
  }
  return pos;
}

std::vector<double> weights_for(const OrdinalIndex& index, const Dataset& data, const MallowsParams& params) {
  std::vector<double> w;
  w.reserve(index.rankings.size());
  for (const auto& r : index.rankings) w.push_back(params.reliability(data.graders()[r.grader]));
  return w;
}

struct GraderAgreement {
  std::size_t disagreements = 0;
  std::vector<std::size_t> group_sizes;
  std::size_t size = 0;
};

// Cross-group pairs of `r` ordered against `pos`.
GraderAgreement agreement(const IndexedRanking& r, const std::vector<std::size_t>& pos) {
  GraderAgreement a;
  a.size = r.items.size();
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    if (i == 0 || r.level[i] != r.level[i - 1]) a.group_sizes.push_back(0);
    ++a.group_sizes.back();
    for (std::size_t j = i + 1; j < r.items.size(); ++j) {
      if (r.level[i] < r.level[j] && pos[r.items[i]] > pos[r.items[j]]) ++a.disagreements;
    }
  }
  return a;
}

double log_likelihood_from(const GraderAgreement& a, double eta) {
  double ll = -eta * static_cast<double>(a.disagreements) - mallows_log_normalizer(eta, a.size);
  for (std::size_t n : a.group_sizes) ll += mallows_log_normalizer(eta, n);
  return ll;
}

WeakRanking to_ranking(const Dataset& data, const std::vector<std::size_t>& order,
                       const std::vector<std::size_t>& trailing_tie) {
  std::vector<std::vector<ItemId>> groups;
  groups.reserve(order.size() + 1);
  for (std::size_t i : order) groups.push_back({data.items()[i]});
  if (!trailing_tie.empty()) {
    std::vector<ItemId> tail;
    for (std::size_t i : trailing_tie) tail.push_back(data.items()[i]);
    groups.push_back(std::move(tail));
  }
  return WeakRanking(std::move(groups));
}

void warn_ungraded(const std::vector<std::size_t>& ungraded) {
  if (!ungraded.empty()) {
    warn(std::to_string(ungraded.size()) + " item(s) received no feedback; placed in a final tie group");
  }
}

std::vector<std::size_t> greedy_order(const OrdinalIndex& index, const std::vector<double>& w,
                                      std::vector<bool> remaining) {
  std::size_t left = static_cast<std::size_t>(std::count(remaining.begin(), remaining.end(), true));
  std::vector<std::size_t> order;
  order.reserve(left);
  std::vector<double> x(index.n_items);
  std::vector<std::size_t> members;
  std::vector<std::size_t> levels;
  while (left > 0) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t g = 0; g < index.rankings.size(); ++g) {
      const auto& r = index.rankings[g];
      members.clear();
      levels.clear();
      for (std::size_t i = 0; i < r.items.size(); ++i) {
        if (remaining[r.items[i]]) {
          members.push_back(r.items[i]);
          levels.push_back(r.level[i]);
        }
      }
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          if (levels[i] < levels[j]) {
            x[members[i]] -= w[g];
            x[members[j]] += w[g];
          }
        }
      }
    }
    std::size_t best = index.n_items;
    for (std::size_t d = 0; d < index.n_items; ++d) {
      if (remaining[d] && (best == index.n_items || x[d] < x[best])) best = d;
    }
    order.push_back(best);
    remaining[best] = false;
    --left;
  }
  return order;
}

std::vector<bool> graded_mask(const Dataset& data, const std::vector<std::size_t>& ungraded) {
  std::vector<bool> mask(data.items().size(), true);
  for (std::size_t i : ungraded) mask[i] = false;
  return mask;
}

// pref[a * n + b] = sum of weights of graders placing a strictly above b.
std::vector<double> preference_matrix(const OrdinalIndex& index, const std::vector<double>& w) {
  const std::size_t n = index.n_items;
  std::vector<double> pref(n * n, 0.0);
  for (std::size_t g = 0; g < index.rankings.size(); ++g) {
    const auto& r = index.rankings[g];
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      for (std::size_t j = i + 1; j < r.items.size(); ++j) {
        if (r.level[i] < r.level[j]) pref[r.items[i] * n + r.items[j]] += w[g];
      }
    }
  }
  return pref;
}

void kemenize(std::vector<std::size_t>& order, const std::vector<double>& pref, std::size_t n) {
  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t a = order[i];
      const std::size_t b = order[i + 1];
      if (pref[b * n + a] > pref[a * n + b]) {
        std::swap(order[i], order[i + 1]);
        swapped = true;
      }
    }
  }
}

}  // namespace

double MallowsParams::reliability(const GraderId& grader) const {
  auto it = reliabilities.find(grader);
  return it == reliabilities.end() ? 1.0 : it->second;
}

void MallowsParams::validate() const {
  for (const auto& [g, eta] : reliabilities) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("reliability of '" + g.str() + "' must be > 0");
  }
}

double mallows_log_normalizer(double eta, std::size_t k) {
  if (k == 0) throw ValidationError("Mallows normalizer needs k >= 1");
  if (!(eta > 0.0)) throw ValidationError("Mallows dispersion eta must be > 0");
  const double denom = std::log(-std::expm1(-eta));
  double total = 0.0;
  for (std::size_t i = 2; i <= k; ++i) {
    total += std::log(-std::expm1(-static_cast<double>(i) * eta)) - denom;
  }
  return total;
}

double mallows_normalizer(double eta, std::size_t k) { return std::exp(mallows_log_normalizer(eta, k)); }

double mallows_log_likelihood(const WeakRanking& center, const GraderFeedback& feedback, double eta) {
  if (!feedback.ordinal) {
    throw ValidationError("grader '" + feedback.grader.str() + "' has no ordinal feedback");
  }
  const auto center_pos = center.group_index();
  const auto& groups = feedback.ordinal->groups();
  // Ties in the center among D_g would make the strict restriction ambiguous.
  std::vector<std::size_t> seen_groups;
  GraderAgreement a;
  a.size = feedback.ordinal->size();
  std::vector<std::pair<std::size_t, std::size_t>> level_pos;  // (feedback level, center position)
  for (std::size_t g = 0; g < groups.size(); ++g) {
    a.group_sizes.push_back(groups[g].size());
    for (const auto& item : groups[g]) {
      auto it = center_pos.find(item);
      if (it == center_pos.end()) throw ValidationError("center ranking misses item '" + item.str() + "'");
      seen_groups.push_back(it->second);
      level_pos.emplace_back(g, it->second);
    }
  }
  std::sort(seen_groups.begin(), seen_groups.end());
  if (std::adjacent_find(seen_groups.begin(), seen_groups.end()) != seen_groups.end()) {
    throw ValidationError("center ranking has ties among the graded items");
  }
  for (std::size_t i = 0; i < level_pos.size(); ++i) {
    for (std::size_t j = i + 1; j < level_pos.size(); ++j) {
      if (level_pos[i].first < level_pos[j].first && level_pos[i].second > level_pos[j].second) {
        ++a.disagreements;
      }
    }
  }
  return log_likelihood_from(a, eta);
}

MallowsLikelihoodBreakdown mallows_likelihood_breakdown(const WeakRanking& center, const Dataset& data,
                                                        const MallowsParams& params) {
  params.validate();
  MallowsLikelihoodBreakdown out;
  const auto index = index_ordinal(data);
  const auto pos = positions_in(center, data);
  for (const auto& r : index.rankings) {
    const GraderId& grader = data.graders()[r.grader];
    const double eta = params.reliability(grader);
    const auto a = agreement(r, pos);
    MallowsGraderTerm term{grader};
    term.disagreements = a.disagreements;
    term.log_normalizer = mallows_log_normalizer(eta, a.size);
    for (std::size_t n : a.group_sizes) term.tie_group_log_factor += mallows_log_normalizer(eta, n);
    term.log_likelihood = log_likelihood_from(a, eta);
    out.total += term.log_likelihood;
    out.graders.push_back(std::move(term));
  }
  return out;
}

double weighted_kemeny_cost(const WeakRanking& center, const Dataset& data, const MallowsParams& params) {
  const auto index = index_ordinal(data);
  const auto pos = positions_in(center, data);
  const auto w = weights_for(index, data, params);
  double cost = 0.0;
  for (std::size_t g = 0; g < index.rankings.size(); ++g) {
    cost += w[g] * static_cast<double>(agreement(index.rankings[g], pos).disagreements);
  }
  return cost;
}

WeakRanking greedy_mle_ranking(const Dataset& data, const MallowsParams& params) {
  params.validate();
  if (data.empty()) throw ValidationError("cannot aggregate an empty dataset");
  const auto index = index_ordinal(data);
  const auto ungraded = ungraded_items(data);
  warn_ungraded(ungraded);
  const auto order = greedy_order(index, weights_for(index, data, params), graded_mask(data, ungraded));
  return to_ranking(data, order, ungraded);
}

WeakRanking borda_ranking(const Dataset& data, const MallowsParams& params) {
  params.validate();
  if (data.empty()) throw ValidationError("cannot aggregate an empty dataset");
  const auto index = index_ordinal(data);
  const auto w = weights_for(index, data, params);
  std::vector<double> rank_sum(index.n_items, 0.0);
  std::vector<double> weight_sum(index.n_items, 0.0);
  for (std::size_t g = 0; g < index.rankings.size(); ++g) {
    const auto& r = index.rankings[g];
    std::size_t better = 0;
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      if (i > 0 && r.level[i] != r.level[i - 1]) better = i;
      rank_sum[r.items[i]] += w[g] * static_cast<double>(better + 1);
      weight_sum[r.items[i]] += w[g];
    }
  }
  std::map<ItemId, double> neg_avg;
  std::vector<std::size_t> ungraded;
  for (std::size_t d = 0; d < index.n_items; ++d) {
    if (weight_sum[d] > 0.0) {
      neg_avg.emplace(data.items()[d], -rank_sum[d] / weight_sum[d]);
    } else {
      ungraded.push_back(d);
    }
  }
  warn_ungraded(ungraded);
  auto groups = ranking_from_scores(neg_avg, kDefaultTieEpsilon).groups();
  if (!ungraded.empty()) {
    std::vector<ItemId> tail;
    for (std::size_t d : ungraded) tail.push_back(data.items()[d]);
    groups.push_back(std::move(tail));
  }
  return WeakRanking(std::move(groups));
}

WeakRanking local_kemenization(const WeakRanking& ranking, const Dataset& data, const MallowsParams& params) {
  params.validate();
  const auto index = index_ordinal(data);
  const auto ungraded = ungraded_items(data);
  const auto& groups = ranking.groups();
  std::vector<std::size_t> order;
  std::vector<std::size_t> tail;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() == 1) {
      order.push_back(data.item_index(groups[g].front()));
      continue;
    }
    const bool last = g + 1 == groups.size();
    for (const auto& item : groups[g]) {
      const std::size_t d = data.item_index(item);
      if (!last || !std::binary_search(ungraded.begin(), ungraded.end(), d)) {
        throw ValidationError("local Kemenization needs a strict order (ties only among ungraded items)");
      }
      tail.push_back(d);
    }
  }
  if (order.size() + tail.size() != data.items().size()) {
    throw ValidationError("ranking does not cover the dataset's items");
  }
  const auto pref = preference_matrix(index, weights_for(index, data, params));
  kemenize(order, pref, index.n_items);
  return to_ranking(data, order, tail);
}

std::map<GraderId, double> mallows_fit_reliability(const Dataset& data, const WeakRanking& center,
                                                   const ReliabilityPrior& prior) {
  prior.validate();
  const auto index = index_ordinal(data);
  const auto pos = positions_in(center, data);
  std::map<GraderId, double> out;
  for (const auto& g : data.graders()) out.emplace(g, prior.mode());
  for (const auto& r : index.rankings) {
    const auto a = agreement(r, pos);
    const double eta = maximize_over_log10_eta(
        [&](double e) { return prior.log_density_unnormalized(e) + log_likelihood_from(a, e); });
    out.at(data.graders()[r.grader]) = eta;
  }
  return out;
}

Estimate fit_mallows(const Dataset& data, MallowsVariant variant, bool with_reliability, int iterations,
                     const ReliabilityPrior& prior) {
  if (data.empty()) throw ValidationError("cannot aggregate an empty dataset");
  const auto index = index_ordinal(data);
  const auto ungraded = ungraded_items(data);
  warn_ungraded(ungraded);
  const auto mask = graded_mask(data, ungraded);

  MallowsParams params;
  std::vector<double> w(index.rankings.size(), 1.0);
  auto aggregate = [&]() -> WeakRanking {
    switch (variant) {
      case MallowsVariant::kGreedy:
        return to_ranking(data, greedy_order(index, w, mask), ungraded);
      case MallowsVariant::kGreedyKemenized: {
        auto order = greedy_order(index, w, mask);
        kemenize(order, preference_matrix(index, w), index.n_items);
        return to_ranking(data, order, ungraded);
      }
      case MallowsVariant::kBorda:
        break;
    }
    // Borda warns on its own; silence the duplicate.
    auto previous = set_warning_sink(nullptr);
    auto ranking = borda_ranking(data, params);
    set_warning_sink(std::move(previous));
    return ranking;
  };

  WeakRanking center = aggregate();
  Estimate est;
  if (with_reliability) {
    for (int it = 0; it < iterations; ++it) {
      params.reliabilities = mallows_fit_reliability(data, center, prior);
      w = weights_for(index, data, params);
      center = aggregate();
    }
    if (iterations == 0) params.reliabilities = mallows_fit_reliability(data, center, prior);
    est.reliabilities = params.reliabilities;
  }
  est.ranking = std::move(center);
  est.metadata["ungraded_items"] = std::to_string(ungraded.size());
  return est;
}

}  // namespace opg
