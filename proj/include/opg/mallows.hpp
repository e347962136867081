#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "opg/config.hpp"
#include "opg/dataset.hpp"
#include "opg/ranking.hpp"

namespace opg {

// Per-grader dispersion parameters; graders absent from the map use 1.0.
struct MallowsParams {
  std::map<GraderId, double> reliabilities;

  double reliability(const GraderId& grader) const;
  void validate() const;
};

// Diagnostic decomposition of the tie-aware Mallows log-likelihood.
struct MallowsGraderTerm {
  GraderId grader;
  double log_likelihood = 0.0;
  std::size_t disagreements = 0;   // cross-group pairs ordered against the center
  double tie_group_log_factor = 0.0;  // sum of log Z(eta, |G_j|) over tie groups
  double log_normalizer = 0.0;        // log Z(eta, |D_g|)
};

struct MallowsLikelihoodBreakdown {
  std::vector<MallowsGraderTerm> graders;
  double total = 0.0;
};

// Z(eta, k) = prod_{i=1..k} (1 - e^{-i eta}) / (1 - e^{-eta}): the sum of
// e^{-eta * inversions} over all k! orders.
double mallows_normalizer(double eta, std::size_t k);
double mallows_log_normalizer(double eta, std::size_t k);

// log P(feedback | center, eta) where tied items in the feedback are treated
// as indifference (sum over every consistent strict order). Closed form:
//   -eta * X + sum_j log Z(eta, |G_j|) - log Z(eta, |D_g|)
// with X the cross-group pairs the feedback orders against the center.
double mallows_log_likelihood(const WeakRanking& center, const GraderFeedback& feedback, double eta);

MallowsLikelihoodBreakdown mallows_likelihood_breakdown(const WeakRanking& center, const Dataset& data,
                                                        const MallowsParams& params);

// Sum over graders of eta_g times the number of strict feedback pairs that
// `center` inverts. This is what the Mallows MLE minimizes.
double weighted_kemeny_cost(const WeakRanking& center, const Dataset& data, const MallowsParams& params);

// Greedy approximation of the Kemeny/Mallows MLE: repeatedly take the item
// with the smallest x_d = sum_g eta_g (#remaining above d - #remaining below d).
// Equal x_d resolves to the lexicographically smallest id. Items nobody
// graded form a final tie group.
WeakRanking greedy_mle_ranking(const Dataset& data, const MallowsParams& params);

// Orders items by ascending reliability-weighted average rank; equal
// averages share a group. Ungraded items form a final tie group.
WeakRanking borda_ranking(const Dataset& data, const MallowsParams& params);

// Adjacent-swap hill climbing on the weighted Kemeny cost. A trailing tie
// group (ungraded items) is left untouched; every other group must be a
// singleton.
WeakRanking local_kemenization(const WeakRanking& ranking, const Dataset& data, const MallowsParams& params);

// Per-grader MAP reliability for a fixed strict center: maximizes
// log prior(eta) + mallows_log_likelihood over log10(eta) in [-3, 3].
// Graders without feedback get the prior mode.
std::map<GraderId, double> mallows_fit_reliability(const Dataset& data, const WeakRanking& center,
                                                   const ReliabilityPrior& prior = {});

enum class MallowsVariant { kGreedy, kBorda, kGreedyKemenized };

// Full MAL / MAL_BC / MAL+K estimator. With reliabilities, alternates
// reliability fitting and re-aggregation `iterations` times, starting from
// the unweighted aggregate.
Estimate fit_mallows(const Dataset& data, MallowsVariant variant, bool with_reliability, int iterations,
                     const ReliabilityPrior& prior = {});

}  // namespace opg
