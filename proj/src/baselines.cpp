#include "opg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opg/log.hpp"

namespace opg {
namespace {

struct Observation {
  std::size_t item;
  std::size_t grader;
  double grade;
};

std::vector<Observation> observations(const Dataset& data) {
  std::vector<Observation> obs;
  for (const auto& fb : data.feedback()) {
    if (!fb.cardinal) throw ValidationError("grader '" + fb.grader.str() + "' has no cardinal grades");
    const std::size_t g = data.grader_index(fb.grader);
    for (const auto& [item, y] : *fb.cardinal) obs.push_back({data.item_index(item), g, y});
  }
  if (obs.empty()) throw ValidationError("no cardinal grades to aggregate");
  return obs;
}

std::map<ItemId, double> to_map(const Dataset& data, const std::vector<double>& s) {
  std::map<ItemId, double> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.emplace(data.items()[i], s[i]);
  return out;
}

}  // namespace

Estimate scavg(const Dataset& data) {
  const auto obs = observations(data);
  std::vector<double> sum(data.items().size(), 0.0);
  std::vector<std::size_t> count(data.items().size(), 0);
  for (const auto& o : obs) {
    sum[o.item] += o.grade;
    ++count[o.item];
  }
  std::map<ItemId, double> scores;
  std::vector<ItemId> ungraded;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] == 0) {
      ungraded.push_back(data.items()[i]);
    } else {
      scores.emplace(data.items()[i], sum[i] / static_cast<double>(count[i]));
    }
  }
  Estimate est;
  auto groups = ranking_from_scores(scores, kDefaultTieEpsilon).groups();
  if (!ungraded.empty()) {
    warn(std::to_string(ungraded.size()) + " item(s) received no grades; excluded from the averages");
    groups.push_back(ungraded);
  }
  est.ranking = WeakRanking(std::move(groups));
  est.scores = std::move(scores);
  est.metadata["ungraded_items"] = std::to_string(ungraded.size());
  return est;
}

NcsGradient ncs_negative_log_posterior(const Dataset& data, const NcsHyperparams& hp, double mu0,
                                       const std::vector<double>& s, const std::vector<double>& b,
                                       const std::vector<double>& eta) {
  hp.validate();
  const std::size_t n = data.items().size();
  const std::size_t m = data.graders().size();
  if (s.size() != n || b.size() != m || eta.size() != m) {
    throw ValidationError("parameter vectors do not match the dataset");
  }
  NcsGradient out;
  out.scores.assign(n, 0.0);
  out.biases.assign(m, 0.0);
  out.reliabilities.assign(m, 0.0);
  for (const auto& o : observations(data)) {
    const double r = o.grade - s[o.item] - b[o.grader];
    const double e = eta[o.grader];
    out.value += 0.5 * e * r * r - 0.5 * std::log(e);
    out.scores[o.item] -= e * r;
    out.biases[o.grader] -= e * r;
    out.reliabilities[o.grader] += 0.5 * r * r - 0.5 / e;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.value += 0.5 * hp.gamma0 * (s[i] - mu0) * (s[i] - mu0);
    out.scores[i] += hp.gamma0 * (s[i] - mu0);
  }
  for (std::size_t g = 0; g < m; ++g) {
    if (!(eta[g] > 0.0)) throw ValidationError("reliabilities must be > 0");
    out.value += 0.5 * hp.gamma1 * b[g] * b[g] - (hp.alpha0 - 1.0) * std::log(eta[g]) + eta[g] / hp.beta0;
    out.biases[g] += hp.gamma1 * b[g];
    out.reliabilities[g] += -(hp.alpha0 - 1.0) / eta[g] + 1.0 / hp.beta0;
  }
  return out;
}

NcsResult ncs_fit(const Dataset& data, const NcsHyperparams& hp, int iterations, bool with_bias_and_reliability,
                  double tie_epsilon) {
  hp.validate();
  if (iterations < 0) throw ValidationError("iterations must be >= 0");
  const auto obs = observations(data);
  const std::size_t n = data.items().size();
  const std::size_t m = data.graders().size();

  double grand = 0.0;
  for (const auto& o : obs) grand += o.grade;
  grand /= static_cast<double>(obs.size());
  NcsResult result;
  result.mu0 = hp.mu0.value_or(grand);
  const double mu0 = result.mu0;

  std::vector<double> sum(n, 0.0);
  std::vector<double> cnt(n, 0.0);
  std::vector<double> grader_count(m, 0.0);
  for (const auto& o : obs) {
    sum[o.item] += o.grade;
    cnt[o.item] += 1.0;
    grader_count[o.grader] += 1.0;
  }
  std::size_t ungraded = 0;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = (hp.gamma0 * mu0 + sum[i]) / (hp.gamma0 + cnt[i]);
    if (cnt[i] == 0.0) ++ungraded;
  }
  if (ungraded > 0) warn(std::to_string(ungraded) + " item(s) received no grades; scored at the prior mean");

  std::vector<double> b(m, 0.0);
  std::vector<double> eta(m, 1.0);
  if (with_bias_and_reliability) {
    std::vector<double> num(std::max(n, m));
    std::vector<double> den(std::max(n, m));
    for (int round = 0; round < iterations; ++round) {
      std::fill(num.begin(), num.end(), 0.0);
      std::fill(den.begin(), den.end(), 0.0);
      for (const auto& o : obs) {
        num[o.item] += eta[o.grader] * (o.grade - b[o.grader]);
        den[o.item] += eta[o.grader];
      }
      for (std::size_t i = 0; i < n; ++i) s[i] = (hp.gamma0 * mu0 + num[i]) / (hp.gamma0 + den[i]);

      std::fill(num.begin(), num.end(), 0.0);
      for (const auto& o : obs) num[o.grader] += o.grade - s[o.item];
      for (std::size_t g = 0; g < m; ++g) {
        b[g] = eta[g] * num[g] / (hp.gamma1 + eta[g] * grader_count[g]);
      }

      std::fill(num.begin(), num.end(), 0.0);
      for (const auto& o : obs) {
        const double r = o.grade - s[o.item] - b[o.grader];
        num[o.grader] += r * r;
      }
      for (std::size_t g = 0; g < m; ++g) {
        const double shape = hp.alpha0 - 1.0 + 0.5 * grader_count[g];
        const double rate = 1.0 / hp.beta0 + 0.5 * num[g];
        eta[g] = shape > 0.0 ? std::clamp(shape / rate, kMinReliability, kMaxReliability) : kMinReliability;
      }
      result.log_posterior.push_back(-ncs_negative_log_posterior(data, hp, mu0, s, b, eta).value);
    }
  }

  auto scores = to_map(data, s);
  result.estimate.ranking = ranking_from_scores(scores, tie_epsilon);
  result.estimate.scores = std::move(scores);
  result.estimate.metadata["mu0"] = std::to_string(mu0);
  result.estimate.metadata["ungraded_items"] = std::to_string(ungraded);
  for (std::size_t g = 0; g < m; ++g) result.biases.emplace(data.graders()[g], b[g]);
  if (with_bias_and_reliability) {
    std::map<GraderId, double> rel;
    for (std::size_t g = 0; g < m; ++g) rel.emplace(data.graders()[g], eta[g]);
    result.estimate.reliabilities = std::move(rel);
  }
  return result;
}

}  // namespace opg
