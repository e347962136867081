#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opg/ranking.hpp"

namespace opg {

// One grader's assessment of the items in D_g: a weak ranking, cardinal
// scores, or both (cardinal input carries its induced ordering).
struct GraderFeedback {
  GraderId grader;
  std::vector<ItemId> items;  // sorted
  std::optional<WeakRanking> ordinal;
  std::optional<std::map<ItemId, double>> cardinal;

  static GraderFeedback from_ordinal(GraderId grader, WeakRanking ranking);
  // Attaches the score-sorted ordering (exact ties share a group) unless
  // `induce_ordinal` is false.
  static GraderFeedback from_cardinal(GraderId grader, std::map<ItemId, double> scores,
                                      bool induce_ordinal = true);

  void validate() const;

  friend bool operator==(const GraderFeedback&, const GraderFeedback&) = default;
};

// Item roster, grader roster and per-grader feedback. Rosters and feedback
// are stored sorted by id, which fixes every downstream iteration order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ItemId> items, std::vector<GraderId> graders,
          std::vector<GraderFeedback> feedback, std::set<GraderId> lazy = {});

  const std::vector<ItemId>& items() const { return items_; }
  const std::vector<GraderId>& graders() const { return graders_; }
  const std::vector<GraderFeedback>& feedback() const { return feedback_; }
  // Graders flagged as synthetic lazy graders (experiment metadata).
  const std::set<GraderId>& lazy() const { return lazy_; }

  std::size_t item_index(const ItemId& item) const;
  std::size_t grader_index(const GraderId& grader) const;
  const GraderFeedback* feedback_for(const GraderId& grader) const;

  bool empty() const { return feedback_.empty(); }
  bool all_ordinal() const;
  bool all_cardinal() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<ItemId> items_;
  std::vector<GraderId> graders_;
  std::vector<GraderFeedback> feedback_;
  std::set<GraderId> lazy_;
  std::map<ItemId, std::size_t> item_pos_;
  std::map<GraderId, std::size_t> grader_pos_;
};

// Model output: optional scores, a ranking over every item, optional
// per-grader reliabilities.
struct Estimate {
  std::optional<std::map<ItemId, double>> scores;
  WeakRanking ranking;
  std::optional<std::map<GraderId, double>> reliabilities;
  std::map<std::string, std::string> metadata;
};

// Dense integer view of the ordinal feedback used by the estimators.
struct IndexedRanking {
  std::size_t grader = 0;            // position in Dataset::graders()
  std::vector<std::size_t> items;    // item positions, best group first
  std::vector<std::size_t> level;    // tie-group index of items[i]
};

struct OrdinalIndex {
  std::size_t n_items = 0;
  std::size_t n_graders = 0;
  std::vector<IndexedRanking> rankings;  // one per grader with feedback, roster order
};

// Throws ValidationError when any feedback lacks an ordinal ranking.
OrdinalIndex index_ordinal(const Dataset& data);

// Items that appear in no grader's feedback.
std::vector<std::size_t> ungraded_items(const Dataset& data);

}  // namespace opg
