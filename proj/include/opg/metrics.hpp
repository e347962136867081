#pragma once

#include <map>
#include <vector>

#include "opg/ranking.hpp"

namespace opg {

// Tie-aware Kendall tau: over strict target pairs, 1 per pair the
// prediction inverts and 1/2 per pair it ties. Target ties cost nothing.
double tau_kt(const WeakRanking& target, const WeakRanking& predicted);

// Macro-averaged tau_kt normalized by each target's strict-pair count, in
// percent.
double ek_error(const std::vector<WeakRanking>& targets, const WeakRanking& predicted);

struct CardinalErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

// Errors after affinely rescaling the predictions to the target's mean and
// (population) standard deviation.
CardinalErrors cardinal_errors(const std::map<ItemId, double>& predicted, const std::map<ItemId, double>& target);

}  // namespace opg
