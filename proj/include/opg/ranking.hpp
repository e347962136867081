#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opg/error.hpp"

namespace opg {

// Opaque, non-empty string identifier. Tag separates item ids from grader ids.
template <class Tag>
class Id {
 public:
  explicit Id(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw ValidationError("identifiers must be non-empty");
  }

  const std::string& str() const { return value_; }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using ItemId = Id<struct ItemTag>;
using GraderId = Id<struct GraderTag>;

inline constexpr double kDefaultTieEpsilon = 1e-9;

// An ordering with ties: tie groups listed best first. Items inside a group
// are kept in lexicographic order so equal rankings compare equal.
class WeakRanking {
 public:
  WeakRanking() = default;
  explicit WeakRanking(std::vector<std::vector<ItemId>> groups);

  // Strict order, best first.
  static WeakRanking total(const std::vector<ItemId>& order);

  const std::vector<std::vector<ItemId>>& groups() const { return groups_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool is_total() const { return groups_.size() == size_; }

  // Items in rank order (groups flattened).
  std::vector<ItemId> items() const;
  std::set<ItemId> item_set() const;
  bool contains(const ItemId& item) const;

  // item -> position of its tie group (0 = best group).
  std::map<ItemId, std::size_t> group_index() const;

  // 1 + number of items in strictly better groups.
  std::size_t rank_of(const ItemId& item) const;

  // Keeps only the listed items; empty groups are dropped.
  WeakRanking restricted_to(const std::set<ItemId>& keep) const;

  // Number of ordered (strict) pairs: sum over i<j of |G_i|*|G_j|.
  std::size_t strict_pair_count() const;

  friend bool operator==(const WeakRanking&, const WeakRanking&) = default;

 private:
  std::vector<std::vector<ItemId>> groups_;
  std::size_t size_ = 0;
};

struct PreferencePair {
  ItemId better;
  ItemId worse;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

// All (better, worse) pairs across distinct tie groups; tied pairs carry no
// preference and are omitted. Ordered by group, then by position in group.
std::vector<PreferencePair> extract_preferences(const WeakRanking& ranking);

// Number of pairs ordered differently by two strict orders over the same items.
std::size_t kendall_tau_distance(const WeakRanking& a, const WeakRanking& b);

// Sum over pairs d1 above d2 in `reference` of (s[d1] - s[d2]) when `other`
// places d2 above d1. `reference` must be sorted consistently with `scores`.
double score_weighted_kt_distance(const WeakRanking& reference, const WeakRanking& other,
                                  const std::map<ItemId, double>& scores);

// Sorts by descending score; neighbours whose scores differ by at most
// `tie_epsilon` share a group (chained, so merging is transitive).
WeakRanking ranking_from_scores(const std::map<ItemId, double>& scores,
                                double tie_epsilon = kDefaultTieEpsilon);

// Resolves every tie group into a uniformly random strict order.
WeakRanking break_ties(const WeakRanking& ranking, std::mt19937_64& rng);

}  // namespace opg
