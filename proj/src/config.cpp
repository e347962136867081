#include "opg/config.hpp"

#include <cmath>

namespace opg {

void ScorePrior::validate() const {
  if (!(variance > 0.0) || !std::isfinite(mean)) throw ValidationError("score prior needs finite mean and variance > 0");
}

double ReliabilityPrior::log_density_unnormalized(double eta) const {
  return (shape - 1.0) * std::log(eta) - eta / scale;
}

void ReliabilityPrior::validate() const {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ValidationError("reliability prior needs shape > 0 and scale > 0");
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be > 0");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(rel_tolerance > 0.0)) throw ValidationError("rel_tolerance must be > 0");
  if (alternating_iterations < 0) throw ValidationError("alternating iterations must be >= 0");
  if (refine_iterations < 0) throw ValidationError("refine iterations must be >= 0");
}

void NcsHyperparams::validate() const {
  if (mu0 && !std::isfinite(*mu0)) throw ValidationError("mu0 must be finite");
  if (!(gamma0 > 0.0) || !(alpha0 > 0.0) || !(beta0 > 0.0) || !(gamma1 > 0.0)) {
    throw ValidationError("NCS precisions and Gamma parameters must be > 0");
  }
}

void ModelConfig::validate() const {
  score_prior.validate();
  reliability_prior.validate();
  sgd.validate();
  ncs.validate();
  if (!(tie_epsilon >= 0.0)) throw ValidationError("tie epsilon must be >= 0");
  if (mals_cap < 1) throw ValidationError("MALS enumeration cap must be >= 1");
}

}  // namespace opg
