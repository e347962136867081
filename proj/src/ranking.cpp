#include "opg/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace opg {

WeakRanking::WeakRanking(std::vector<std::vector<ItemId>> groups) : groups_(std::move(groups)) {
  std::set<ItemId> seen;
  for (auto& group : groups_) {
    if (group.empty()) throw ValidationError("weak ranking contains an empty tie group");
    std::sort(group.begin(), group.end());
    for (const auto& item : group) {
      if (!seen.insert(item).second) {
        throw ValidationError("item '" + item.str() + "' appears more than once in a ranking");
      }
    }
    size_ += group.size();
  }
}

WeakRanking WeakRanking::total(const std::vector<ItemId>& order) {
  std::vector<std::vector<ItemId>> groups;
  groups.reserve(order.size());
  for (const auto& item : order) groups.push_back({item});
  return WeakRanking(std::move(groups));
}

std::vector<ItemId> WeakRanking::items() const {
  std::vector<ItemId> out;
  out.reserve(size_);
  for (const auto& group : groups_) out.insert(out.end(), group.begin(), group.end());
  return out;
}

std::set<ItemId> WeakRanking::item_set() const {
  std::set<ItemId> out;
  for (const auto& group : groups_) out.insert(group.begin(), group.end());
  return out;
}

bool WeakRanking::contains(const ItemId& item) const {
  for (const auto& group : groups_) {
    if (std::binary_search(group.begin(), group.end(), item)) return true;
  }
  return false;
}

std::map<ItemId, std::size_t> WeakRanking::group_index() const {
  std::map<ItemId, std::size_t> out;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const auto& item : groups_[g]) out.emplace(item, g);
  }
  return out;
}

std::size_t WeakRanking::rank_of(const ItemId& item) const {
  std::size_t better = 0;
  for (const auto& group : groups_) {
    if (std::binary_search(group.begin(), group.end(), item)) return better + 1;
    better += group.size();
  }
  throw ValidationError("item '" + item.str() + "' is not in the ranking");
}

WeakRanking WeakRanking::restricted_to(const std::set<ItemId>& keep) const {
  std::vector<std::vector<ItemId>> groups;
  for (const auto& group : groups_) {
    std::vector<ItemId> kept;
    for (const auto& item : group) {
      if (keep.contains(item)) kept.push_back(item);
    }
    if (!kept.empty()) groups.push_back(std::move(kept));
  }
  return WeakRanking(std::move(groups));
}

std::size_t WeakRanking::strict_pair_count() const {
  std::size_t below = size_;
  std::size_t pairs = 0;
  for (const auto& group : groups_) {
    below -= group.size();
    pairs += group.size() * below;
  }
  return pairs;
}

std::vector<PreferencePair> extract_preferences(const WeakRanking& ranking) {
  std::vector<PreferencePair> out;
  out.reserve(ranking.strict_pair_count());
  const auto& groups = ranking.groups();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (const auto& better : groups[i]) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        for (const auto& worse : groups[j]) out.push_back({better, worse});
      }
    }
  }
  return out;
}

namespace {

void require_total_same_items(const WeakRanking& a, const WeakRanking& b) {
  if (!a.is_total() || !b.is_total()) {
    throw ValidationError("Kendall-tau distance requires strict orders (no ties)");
  }
  if (a.item_set() != b.item_set()) {
    throw ValidationError("rankings are over different item sets");
  }
}

}  // namespace

std::size_t kendall_tau_distance(const WeakRanking& a, const WeakRanking& b) {
  require_total_same_items(a, b);
  const auto pos_b = b.group_index();
  const auto order = a.items();
  std::size_t inversions = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t pi = pos_b.at(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (pos_b.at(order[j]) < pi) ++inversions;
    }
  }
  return inversions;
}

double score_weighted_kt_distance(const WeakRanking& reference, const WeakRanking& other,
                                  const std::map<ItemId, double>& scores) {
  require_total_same_items(reference, other);
  const auto order = reference.items();
  std::vector<double> s;
  s.reserve(order.size());
  for (const auto& item : order) {
    auto it = scores.find(item);
    if (it == scores.end()) throw ValidationError("no score for item '" + item.str() + "'");
    s.push_back(it->second);
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[i - 1]) {
      throw ValidationError("reference ranking is not sorted by score at item '" + order[i].str() + "'");
    }
  }
  const auto pos_other = other.group_index();
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t pi = pos_other.at(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (pos_other.at(order[j]) < pi) total += s[i] - s[j];
    }
  }
  return total;
}

WeakRanking ranking_from_scores(const std::map<ItemId, double>& scores, double tie_epsilon) {
  if (scores.empty()) throw ValidationError("cannot rank an empty score map");
  std::vector<std::pair<double, ItemId>> sorted;
  sorted.reserve(scores.size());
  for (const auto& [item, score] : scores) {
    if (!std::isfinite(score)) throw ValidationError("non-finite score for item '" + item.str() + "'");
    sorted.emplace_back(score, item);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<std::vector<ItemId>> groups;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i - 1].first - sorted[i].first > tie_epsilon) groups.emplace_back();
    groups.back().push_back(sorted[i].second);
  }
  return WeakRanking(std::move(groups));
}

WeakRanking break_ties(const WeakRanking& ranking, std::mt19937_64& rng) {
  std::vector<ItemId> order;
  order.reserve(ranking.size());
  for (auto group : ranking.groups()) {
    std::shuffle(group.begin(), group.end(), rng);
    order.insert(order.end(), group.begin(), group.end());
  }
  return WeakRanking::total(order);
}

}  // namespace opg
