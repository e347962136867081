#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "opg/config.hpp"
#include "opg/dataset.hpp"
#include "opg/ranking.hpp"

namespace opg {

enum class ScoreModel { kMals, kBradleyTerry, kThurstone, kPlackettLuce };

std::string score_model_name(ScoreModel model);

// 1 / (1 + exp(-eta (s_i - s_j)))
double bt_pair_probability(double s_i, double s_j, double eta);
// Phi(sqrt(eta) (s_i - s_j))
double thurstone_pair_probability(double s_i, double s_j, double eta);

// log Phi(z), accurate far into the lower tail.
double log_normal_cdf(double z);

// Plackett-Luce log-probability of a strict order (best first).
double pl_ranking_log_probability(const WeakRanking& order, const std::map<ItemId, double>& scores, double eta);

// Score-weighted Mallows: log of the mass of the orders consistent with the
// feedback, relative to all orders of D_g, where an order pays
// eta * sum (s_b - s_a)_+ over every pair it places a above b.
// Exact (subset dynamic program); |D_g| must not exceed `cap`.
double mals_log_likelihood(const GraderFeedback& feedback, const std::map<ItemId, double>& scores, double eta,
                           std::size_t cap = 9);

struct ObjectiveValue {
  double value = 0.0;                      // negative log-posterior
  std::vector<double> score_gradient;      // indexed like Dataset::items()
  std::vector<double> reliability_gradient;  // indexed like Dataset::graders()
};

// Negative log-posterior of a score model: likelihood of every grader's
// ordinal feedback, N(mean, variance) prior on the scores and the Gamma
// prior on the reliabilities.
class ScoreModelObjective {
 public:
  // `seed` drives the one-off tie breaking PL needs.
  ScoreModelObjective(ScoreModel model, const Dataset& data, const ModelConfig& cfg, std::uint64_t seed);

  ScoreModel model() const { return model_; }
  std::size_t n_items() const { return index_.n_items; }
  std::size_t n_graders() const { return index_.n_graders; }
  std::size_t n_terms() const { return index_.rankings.size(); }
  // Roster position of the grader behind term t.
  std::size_t term_grader(std::size_t t) const { return index_.rankings[t].grader; }
  // Tie groups broken to feed PL (0 for the other models).
  std::size_t broken_tie_groups() const { return broken_tie_groups_; }

  ObjectiveValue evaluate(const std::vector<double>& scores, const std::vector<double>& reliabilities) const;

  // Log-likelihood of term t; gradients are accumulated when non-null.
  double term_log_likelihood(std::size_t t, const std::vector<double>& scores, double eta,
                             std::vector<double>* score_grad, double* eta_grad) const;

  // Prior penalty on the scores, -log N(s; mean, variance) up to a constant.
  double score_prior_penalty(const std::vector<double>& scores, std::vector<double>* grad) const;

 private:
  ScoreModel model_;
  ModelConfig cfg_;
  OrdinalIndex index_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs_;  // BT/THUR: (better, worse)
  std::size_t broken_tie_groups_ = 0;
};

// MAP scores (and, with reliabilities, the alternating +G fit: scores at
// eta = 1, then `cfg.sgd.alternating_iterations` rounds of a per-grader
// reliability step followed by a warm-started score refit).
Estimate fit_score_model(const Dataset& data, ScoreModel model, const ModelConfig& cfg, bool with_reliability);

}  // namespace opg
