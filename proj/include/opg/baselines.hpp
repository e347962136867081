#pragma once

#include <map>
#include <vector>

#include "opg/config.hpp"
#include "opg/dataset.hpp"

namespace opg {

// Per-item mean of the cardinal grades. Ungraded items get no score and
// form a final tie group.
Estimate scavg(const Dataset& data);

struct NcsResult {
  Estimate estimate;
  std::map<GraderId, double> biases;  // zero for plain NCS
  double mu0 = 0.0;                   // prior mean actually used
  std::vector<double> log_posterior;  // after each alternating round (NCS+G)
};

// Gaussian cardinal model y ~ N(s_d + b_g, 1/eta_g) with priors
// s_d ~ N(mu0, 1/gamma0), b_g ~ N(0, 1/gamma1), eta_g ~ Gamma(alpha0, beta0).
// Plain NCS fixes eta_g = 1 and b_g = 0 and is closed form; NCS+G runs
// `iterations` rounds of exact coordinate updates for s, b and eta.
NcsResult ncs_fit(const Dataset& data, const NcsHyperparams& hp, int iterations, bool with_bias_and_reliability,
                  double tie_epsilon = kDefaultTieEpsilon);

struct NcsGradient {
  double value = 0.0;  // negative log-posterior (constants dropped)
  std::vector<double> scores;       // d/ds, Dataset::items() order
  std::vector<double> biases;       // d/db, Dataset::graders() order
  std::vector<double> reliabilities;  // d/deta, Dataset::graders() order
};

NcsGradient ncs_negative_log_posterior(const Dataset& data, const NcsHyperparams& hp, double mu0,
                                       const std::vector<double>& scores, const std::vector<double>& biases,
                                       const std::vector<double>& reliabilities);

}  // namespace opg
