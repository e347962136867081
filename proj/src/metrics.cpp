#include "opg/metrics.hpp"

#include <cmath>

namespace opg {
namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::map<ItemId, double>& v) {
  Moments m;
  for (const auto& [k, x] : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (const auto& [k, x] : v) m.sd += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(m.sd / static_cast<double>(v.size()));
  return m;
}

}  // namespace

double tau_kt(const WeakRanking& target, const WeakRanking& predicted) {
  if (target.item_set() != predicted.item_set()) throw ValidationError("tau_kt needs rankings over the same items");
  const auto pred = predicted.group_index();
  double err = 0.0;
  for (const auto& pair : extract_preferences(target)) {
    const std::size_t a = pred.at(pair.better);
    const std::size_t b = pred.at(pair.worse);
    if (a > b) {
      err += 1.0;
    } else if (a == b) {
      err += 0.5;
    }
  }
  return err;
}

double ek_error(const std::vector<WeakRanking>& targets, const WeakRanking& predicted) {
  if (targets.empty()) throw ValidationError("E_K needs at least one target ranking");
  double total = 0.0;
  for (const auto& t : targets) {
    const std::size_t pairs = t.strict_pair_count();
    if (pairs == 0) throw ValidationError("E_K is undefined for an all-tied target");
    total += tau_kt(t, predicted) / static_cast<double>(pairs);
  }
  return 100.0 * total / static_cast<double>(targets.size());
}

CardinalErrors cardinal_errors(const std::map<ItemId, double>& predicted, const std::map<ItemId, double>& target) {
  if (target.empty() || predicted.size() != target.size()) {
    throw ValidationError("cardinal errors need scores over the same items");
  }
  for (const auto& [item, x] : target) {
    if (!predicted.contains(item)) throw ValidationError("cardinal errors need scores over the same items");
  }
  const auto p = moments(predicted);
  const auto t = moments(target);
  if (p.sd == 0.0) throw ValidationError("constant predicted scores cannot be rescaled");
  if (t.sd == 0.0) throw ValidationError("constant target scores cannot be rescaled to");
  CardinalErrors out;
  for (const auto& [item, y] : target) {
    const double scaled = t.mean + t.sd * (predicted.at(item) - p.mean) / p.sd;
    const double e = scaled - y;
    out.mae += std::abs(e);
    out.rmse += e * e;
  }
  const double n = static_cast<double>(target.size());
  out.mae /= n;
  out.rmse = std::sqrt(out.rmse / n);
  return out;
}

}  // namespace opg
