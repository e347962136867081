#include "opg/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace opg {

GraderFeedback GraderFeedback::from_ordinal(GraderId grader, WeakRanking ranking) {
  auto items = ranking.items();
  std::sort(items.begin(), items.end());
  return GraderFeedback{std::move(grader), std::move(items), std::move(ranking), std::nullopt};
}

GraderFeedback GraderFeedback::from_cardinal(GraderId grader, std::map<ItemId, double> scores,
                                             bool induce_ordinal) {
  std::vector<ItemId> items;
  items.reserve(scores.size());
  for (const auto& [item, score] : scores) items.push_back(item);
  std::optional<WeakRanking> ordinal;
  if (induce_ordinal) ordinal = ranking_from_scores(scores, 0.0);
  return GraderFeedback{std::move(grader), std::move(items), std::move(ordinal), std::move(scores)};
}

void GraderFeedback::validate() const {
  const std::string who = "grader '" + grader.str() + "'";
  if (!ordinal && !cardinal) throw ValidationError(who + " has neither ordinal nor cardinal feedback");
  if (items.empty()) throw ValidationError(who + " has empty feedback");
  if (!std::is_sorted(items.begin(), items.end()) ||
      std::adjacent_find(items.begin(), items.end()) != items.end()) {
    throw ValidationError(who + " item list must be sorted and unique");
  }
  const std::set<ItemId> item_set(items.begin(), items.end());
  if (ordinal && ordinal->item_set() != item_set) {
    throw ValidationError(who + " ordinal ranking does not cover exactly its items");
  }
  if (cardinal) {
    if (cardinal->size() != items.size()) throw ValidationError(who + " cardinal keys differ from its items");
    for (const auto& [item, score] : *cardinal) {
      if (!item_set.contains(item)) throw ValidationError(who + " cardinal keys differ from its items");
      if (!std::isfinite(score)) throw ValidationError(who + " has a non-finite score");
    }
  }
}

Dataset::Dataset(std::vector<ItemId> items, std::vector<GraderId> graders,
                 std::vector<GraderFeedback> feedback, std::set<GraderId> lazy)
    : items_(std::move(items)),
      graders_(std::move(graders)),
      feedback_(std::move(feedback)),
      lazy_(std::move(lazy)) {
  std::sort(items_.begin(), items_.end());
  std::sort(graders_.begin(), graders_.end());
  if (auto it = std::adjacent_find(items_.begin(), items_.end()); it != items_.end()) {
    throw ValidationError("duplicate item id '" + it->str() + "'");
  }
  if (auto it = std::adjacent_find(graders_.begin(), graders_.end()); it != graders_.end()) {
    throw ValidationError("duplicate grader id '" + it->str() + "'");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) item_pos_.emplace(items_[i], i);
  for (std::size_t g = 0; g < graders_.size(); ++g) grader_pos_.emplace(graders_[g], g);

  std::sort(feedback_.begin(), feedback_.end(),
            [](const GraderFeedback& a, const GraderFeedback& b) { return a.grader < b.grader; });
  for (std::size_t f = 0; f < feedback_.size(); ++f) {
    const auto& fb = feedback_[f];
    if (f > 0 && feedback_[f - 1].grader == fb.grader) {
      throw ValidationError("grader '" + fb.grader.str() + "' has more than one feedback record");
    }
    if (!grader_pos_.contains(fb.grader)) {
      throw ValidationError("feedback from unknown grader '" + fb.grader.str() + "'");
    }
    fb.validate();
    for (const auto& item : fb.items) {
      if (!item_pos_.contains(item)) {
        throw ValidationError("grader '" + fb.grader.str() + "' grades unknown item '" + item.str() + "'");
      }
    }
  }
  for (const auto& g : lazy_) {
    if (!grader_pos_.contains(g)) throw ValidationError("lazy flag on unknown grader '" + g.str() + "'");
  }
}

std::size_t Dataset::item_index(const ItemId& item) const {
  auto it = item_pos_.find(item);
  if (it == item_pos_.end()) throw ValidationError("unknown item '" + item.str() + "'");
  return it->second;
}

std::size_t Dataset::grader_index(const GraderId& grader) const {
  auto it = grader_pos_.find(grader);
  if (it == grader_pos_.end()) throw ValidationError("unknown grader '" + grader.str() + "'");
  return it->second;
}

const GraderFeedback* Dataset::feedback_for(const GraderId& grader) const {
  auto it = std::lower_bound(feedback_.begin(), feedback_.end(), grader,
                             [](const GraderFeedback& f, const GraderId& g) { return f.grader < g; });
  if (it == feedback_.end() || it->grader != grader) return nullptr;
  return &*it;
}

bool Dataset::all_ordinal() const {
  return std::all_of(feedback_.begin(), feedback_.end(), [](const auto& f) { return f.ordinal.has_value(); });
}

bool Dataset::all_cardinal() const {
  return std::all_of(feedback_.begin(), feedback_.end(), [](const auto& f) { return f.cardinal.has_value(); });
}

OrdinalIndex index_ordinal(const Dataset& data) {
  OrdinalIndex index;
  index.n_items = data.items().size();
  index.n_graders = data.graders().size();
  index.rankings.reserve(data.feedback().size());
  for (const auto& fb : data.feedback()) {
    if (!fb.ordinal) {
      throw ValidationError("grader '" + fb.grader.str() + "' has no ordinal feedback");
    }
    IndexedRanking r;
    r.grader = data.grader_index(fb.grader);
    const auto& groups = fb.ordinal->groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (const auto& item : groups[g]) {
        r.items.push_back(data.item_index(item));
        r.level.push_back(g);
      }
    }
    index.rankings.push_back(std::move(r));
  }
  return index;
}

std::vector<std::size_t> ungraded_items(const Dataset& data) {
  std::vector<bool> seen(data.items().size(), false);
  for (const auto& fb : data.feedback()) {
    for (const auto& item : fb.items) seen[data.item_index(item)] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) out.push_back(i);
  }
  return out;
}

}  // namespace opg
