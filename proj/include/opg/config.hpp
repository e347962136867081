#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "opg/ranking.hpp"

namespace opg {

// Gaussian prior on latent item scores, N(mean, variance).
struct ScorePrior {
  double mean = 0.0;
  double variance = 9.0;

  void validate() const;
};

// Gamma(shape, scale) prior on grader reliabilities. Its log density
// contributes (shape - 1) * log(eta) - eta / scale.
struct ReliabilityPrior {
  double shape = 10.0;
  double scale = 0.1;

  double mode() const { return (shape - 1.0) * scale; }
  double log_density_unnormalized(double eta) const;
  void validate() const;
};

inline constexpr double kMinReliability = 1e-3;
inline constexpr double kMaxReliability = 1e3;

enum class DecaySchedule { kConstant, kInverseSqrt };

struct SgdConfig {
  double learning_rate = 0.1;
  DecaySchedule decay = DecaySchedule::kInverseSqrt;
  int max_epochs = 500;
  double rel_tolerance = 1e-6;
  std::uint64_t seed = 0;
  int alternating_iterations = 10;  // reliability/score alternations for +G fits
  // Full-gradient L-BFGS refinement after the stochastic phase.
  int refine_iterations = 1000;
  double gradient_tolerance = 1e-8;

  void validate() const;
};

// Hyperparameters of the Gaussian cardinal-score baseline. mu0 defaults to
// the empirical grand mean of the grades when unset.
struct NcsHyperparams {
  std::optional<double> mu0;
  double gamma0 = 0.1;  // prior precision of item scores
  double alpha0 = 10.0;  // reliability Gamma shape
  double beta0 = 0.1;    // reliability Gamma scale
  double gamma1 = 1.0;   // bias precision

  void validate() const;
};

struct ModelConfig {
  ScorePrior score_prior;
  ReliabilityPrior reliability_prior;
  SgdConfig sgd;
  NcsHyperparams ncs;
  double tie_epsilon = kDefaultTieEpsilon;
  std::size_t mals_cap = 9;

  void validate() const;
};

}  // namespace opg
