#pragma once

#include <string>
#include <vector>

#include "opg/config.hpp"
#include "opg/dataset.hpp"

namespace opg {

enum class Method {
  kScavg,
  kNcs,
  kNcsG,
  kMal,
  kMalG,
  kMalbc,
  kMalbcG,
  kMalK,
  kMalKG,
  kMals,
  kMalsG,
  kBt,
  kBtG,
  kThur,
  kThurG,
  kPl,
  kPlG,
};

Method parse_method(const std::string& name);
std::string method_name(Method method);
const std::vector<Method>& all_methods();

bool estimates_reliability(Method method);
bool needs_cardinal(Method method);
// The same estimator without reliability estimation (identity otherwise).
Method without_reliability(Method method);

// Runs one estimator; +G variants use cfg.sgd.alternating_iterations rounds.
Estimate estimate(const Dataset& data, Method method, const ModelConfig& cfg);

}  // namespace opg
