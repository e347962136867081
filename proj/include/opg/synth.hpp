#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>

#include "opg/dataset.hpp"
#include "opg/ranking.hpp"

namespace opg {

struct TruthModel {
  double mean = 0.0;
  double variance = 1.0;
};

// Mallows graders emit ordinal feedback around the true order with
// dispersion `eta`. Normal graders emit cardinal grades
//   y = 8 + 1.3 * (s_d + b_g + N(0, 1/eta)),  b_g ~ N(0, bias_sd^2)
// clamped to [1, 10] (optionally rounded to integers).
struct GraderModel {
  enum class Kind { kMallows, kCardinalNormal };
  Kind kind = Kind::kMallows;
  double eta = 1.0;
  double bias_sd = 0.0;
  bool round_grades = false;

  // "mallows:ETA" or "normal:ETA[:BIAS_SD][:round]"
  static GraderModel parse(const std::string& spec);
  std::string to_string() const;
};

struct SynthConfig {
  std::size_t n_items = 40;
  std::size_t n_graders = 150;
  std::size_t items_per_grader = 7;
  TruthModel truth;
  GraderModel grader;
  std::size_t n_lazy = 0;
  std::uint64_t seed = 0;
  bool full_coverage = true;

  void validate() const;
};

// Zero-padded ids so lexicographic and numeric order agree.
ItemId synth_item_id(std::size_t index, std::size_t count);
GraderId synth_grader_id(std::size_t index, std::size_t count);

// Balanced design: each grader takes the items_per_grader currently least
// reviewed items (ties broken by a seeded shuffle), so per-item review
// counts differ by at most one.
std::map<GraderId, std::set<ItemId>> assign_reviewers(const SynthConfig& cfg);

// Repeated-insertion sampler: an exact draw from the Mallows distribution
// centered on `truth` restricted to `subset`.
WeakRanking sample_mallows_feedback(const WeakRanking& truth, const std::set<ItemId>& subset, double eta,
                                    std::mt19937_64& rng);
WeakRanking sample_mallows_feedback(const WeakRanking& truth, const std::set<ItemId>& subset, double eta,
                                    std::uint64_t seed);

struct SyntheticData {
  Dataset data;
  std::map<ItemId, double> truth_scores;
  WeakRanking truth_ranking;
  std::map<GraderId, double> grader_bias;  // cardinal graders only
};

SyntheticData generate_dataset(const SynthConfig& cfg);

// Appends `n` lazy graders, labelled in Dataset::lazy(). On cardinal data
// their grades are i.i.d. N(m, v) with the empirical moments of all existing
// grades (ordinal view induced; rounded and clamped to the observed range
// when every existing grade is an integer); on ordinal-only data they report
// uniformly random orders. Each reviews the most common existing |D_g| items.
Dataset add_lazy_graders(const Dataset& data, std::size_t n, std::uint64_t seed);

}  // namespace opg
