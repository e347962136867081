#include "opg/methods.hpp"

#include <array>
#include <utility>

#include "opg/baselines.hpp"
#include "opg/mallows.hpp"
#include "opg/score_models.hpp"

namespace opg {
namespace {

constexpr std::array<std::pair<Method, const char*>, 17> kNames{{
    {Method::kScavg, "scavg"}, {Method::kNcs, "ncs"},       {Method::kNcsG, "ncs+g"},
    {Method::kMal, "mal"},     {Method::kMalG, "mal+g"},    {Method::kMalbc, "malbc"},
    {Method::kMalbcG, "malbc+g"}, {Method::kMalK, "mal+k"}, {Method::kMalKG, "mal+kg"},
    {Method::kMals, "mals"},   {Method::kMalsG, "mals+g"},  {Method::kBt, "bt"},
    {Method::kBtG, "bt+g"},    {Method::kThur, "thur"},     {Method::kThurG, "thur+g"},
    {Method::kPl, "pl"},       {Method::kPlG, "pl+g"},
}};

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& [m, n] : kNames) {
    if (name == n) return m;
  }
  throw ValidationError("unknown model '" + name + "'");
}

std::string method_name(Method method) {
  for (const auto& [m, n] : kNames) {
    if (m == method) return n;
  }
  return "unknown";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const auto& [m, n] : kNames) v.push_back(m);
    return v;
  }();
  return methods;
}

bool estimates_reliability(Method method) {
  switch (method) {
    case Method::kNcsG:
    case Method::kMalG:
    case Method::kMalbcG:
    case Method::kMalKG:
    case Method::kMalsG:
    case Method::kBtG:
    case Method::kThurG:
    case Method::kPlG:
      return true;
    default:
      return false;
  }
}

bool needs_cardinal(Method method) {
  return method == Method::kScavg || method == Method::kNcs || method == Method::kNcsG;
}

Method without_reliability(Method method) {
  switch (method) {
    case Method::kNcsG: return Method::kNcs;
    case Method::kMalG: return Method::kMal;
    case Method::kMalbcG: return Method::kMalbc;
    case Method::kMalKG: return Method::kMalK;
    case Method::kMalsG: return Method::kMals;
    case Method::kBtG: return Method::kBt;
    case Method::kThurG: return Method::kThur;
    case Method::kPlG: return Method::kPl;
    default: return method;
  }
}

Estimate estimate(const Dataset& data, Method method, const ModelConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ValidationError("cannot estimate from an empty dataset");
  if (needs_cardinal(method) && !data.all_cardinal()) {
    throw ValidationError("model '" + method_name(method) + "' needs cardinal input");
  }
  const bool g = estimates_reliability(method);
  const int n = cfg.sgd.alternating_iterations;
  Estimate est;
  switch (without_reliability(method)) {
    case Method::kScavg:
      est = scavg(data);
      break;
    case Method::kNcs:
      est = ncs_fit(data, cfg.ncs, n, g, cfg.tie_epsilon).estimate;
      break;
    case Method::kMal:
      est = fit_mallows(data, MallowsVariant::kGreedy, g, n, cfg.reliability_prior);
      break;
    case Method::kMalbc:
      est = fit_mallows(data, MallowsVariant::kBorda, g, n, cfg.reliability_prior);
      break;
    case Method::kMalK:
      est = fit_mallows(data, MallowsVariant::kGreedyKemenized, g, n, cfg.reliability_prior);
      break;
    case Method::kMals:
      est = fit_score_model(data, ScoreModel::kMals, cfg, g);
      break;
    case Method::kBt:
      est = fit_score_model(data, ScoreModel::kBradleyTerry, cfg, g);
      break;
    case Method::kThur:
      est = fit_score_model(data, ScoreModel::kThurstone, cfg, g);
      break;
    case Method::kPl:
      est = fit_score_model(data, ScoreModel::kPlackettLuce, cfg, g);
      break;
    default:
      throw ValidationError("unsupported model");
  }
  est.metadata["model"] = method_name(method);
  return est;
}

}  // namespace opg
