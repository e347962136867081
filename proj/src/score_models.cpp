#include "opg/score_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "opg/log.hpp"
#include "opg/mallows.hpp"
#include "opg/optimizer.hpp"

namespace opg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log sigmoid(x)
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log of the summed weight of every path through the subset lattice,
// optionally restricted to the orders consistent with `level`, plus the
// expected gradient of the path cost when requested.
//   cost of placing x next = sum over still-unplaced y of (s_y - s_x)_+
double mals_log_mass(const std::vector<double>& s, const std::vector<std::size_t>* level, double eta,
                     std::vector<double>* grad_s, double* grad_eta) {
  const std::size_t k = s.size();
  const std::size_t full = (std::size_t{1} << k) - 1;
  auto cost = [&](std::size_t mask, std::size_t x) {
    double c = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      if (y != x && !(mask >> y & 1) && s[y] > s[x]) c += s[y] - s[x];
    }
    return c;
  };
  auto allowed = [&](std::size_t mask, std::size_t x) {
    if (mask >> x & 1) return false;
    if (!level) return true;
    for (std::size_t y = 0; y < k; ++y) {
      if (!(mask >> y & 1) && (*level)[y] < (*level)[x]) return false;
    }
    return true;
  };

  std::vector<double> alpha(full + 1, kNegInf);
  alpha[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (alpha[mask] == kNegInf) continue;
    for (std::size_t x = 0; x < k; ++x) {
      if (allowed(mask, x)) {
        const std::size_t next = mask | (std::size_t{1} << x);
        alpha[next] = log_add(alpha[next], alpha[mask] - eta * cost(mask, x));
      }
    }
  }
  const double total = alpha[full];
  if (!grad_s && !grad_eta) return total;

  std::vector<double> beta(full + 1, kNegInf);
  beta[full] = 0.0;
  for (std::size_t mask = full; mask-- > 0;) {
    if (alpha[mask] == kNegInf) continue;
    for (std::size_t x = 0; x < k; ++x) {
      if (allowed(mask, x)) {
        const std::size_t next = mask | (std::size_t{1} << x);
        beta[mask] = log_add(beta[mask], beta[next] - eta * cost(mask, x));
      }
    }
  }
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (alpha[mask] == kNegInf) continue;
    for (std::size_t x = 0; x < k; ++x) {
      if (!allowed(mask, x)) continue;
      const std::size_t next = mask | (std::size_t{1} << x);
      const double c = cost(mask, x);
      const double p = std::exp(alpha[mask] - eta * c + beta[next] - total);
      if (grad_eta) *grad_eta -= p * c;
      if (grad_s) {
        for (std::size_t y = 0; y < k; ++y) {
          if (y != x && !(mask >> y & 1) && s[y] > s[x]) {
            (*grad_s)[y] -= p * eta;
            (*grad_s)[x] += p * eta;
          }
        }
      }
    }
  }
  return total;
}

void check_cap(std::size_t size, std::size_t cap, const std::string& grader) {
  if (size > cap) {
    throw ValidationError("grader '" + grader + "' assessed " + std::to_string(size) +
                          " items, above the MALS enumeration cap of " + std::to_string(cap) +
                          "; exclude mals or raise the cap");
  }
}

// Adapter handing the optimizer the negative log-posterior in the scores
// at fixed reliabilities.
class ScoreFit : public SeparableObjective {
 public:
  ScoreFit(const ScoreModelObjective& obj, const std::vector<double>& eta) : obj_(obj), eta_(eta) {}

  std::size_t dimension() const override { return obj_.n_items(); }
  std::size_t num_terms() const override { return obj_.n_terms(); }

  double term(std::size_t t, const std::vector<double>& x, std::vector<double>& grad) const override {
    for (double& g : grad) g = -g;
    const double ll = obj_.term_log_likelihood(t, x, eta_[obj_.term_grader(t)], &grad, nullptr);
    for (double& g : grad) g = -g;
    return -ll;
  }

  double regularizer(const std::vector<double>& x, std::vector<double>& grad) const override {
    return obj_.score_prior_penalty(x, &grad);
  }

 private:
  const ScoreModelObjective& obj_;
  const std::vector<double>& eta_;
};

}  // namespace

std::string score_model_name(ScoreModel model) {
  switch (model) {
    case ScoreModel::kMals: return "mals";
    case ScoreModel::kBradleyTerry: return "bt";
    case ScoreModel::kThurstone: return "thur";
    case ScoreModel::kPlackettLuce: return "pl";
  }
  return "unknown";
}

double bt_pair_probability(double s_i, double s_j, double eta) { return sigmoid(eta * (s_i - s_j)); }

double thurstone_pair_probability(double s_i, double s_j, double eta) {
  return 0.5 * std::erfc(-std::sqrt(eta) * (s_i - s_j) / std::numbers::sqrt2);
}

double log_normal_cdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -20.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Mills-ratio expansion of the lower tail.
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

double pl_ranking_log_probability(const WeakRanking& order, const std::map<ItemId, double>& scores, double eta) {
  if (!order.is_total()) throw ValidationError("Plackett-Luce needs a strict order");
  const auto items = order.items();
  std::vector<double> v(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto it = scores.find(items[i]);
    if (it == scores.end()) throw ValidationError("missing score for '" + items[i].str() + "'");
    v[i] = eta * it->second;
  }
  double total = 0.0;
  double tail = kNegInf;
  for (std::size_t i = v.size(); i-- > 0;) {
    tail = log_add(tail, v[i]);
    total += v[i] - tail;
  }
  return total;
}

double mals_log_likelihood(const GraderFeedback& feedback, const std::map<ItemId, double>& scores, double eta,
                           std::size_t cap) {
  if (!feedback.ordinal) throw ValidationError("grader '" + feedback.grader.str() + "' has no ordinal feedback");
  check_cap(feedback.items.size(), cap, feedback.grader.str());
  std::vector<double> s;
  std::vector<std::size_t> level;
  const auto& groups = feedback.ordinal->groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& item : groups[g]) {
      auto it = scores.find(item);
      if (it == scores.end()) throw ValidationError("missing score for '" + item.str() + "'");
      s.push_back(it->second);
      level.push_back(g);
    }
  }
  return mals_log_mass(s, &level, eta, nullptr, nullptr) - mals_log_mass(s, nullptr, eta, nullptr, nullptr);
}

ScoreModelObjective::ScoreModelObjective(ScoreModel model, const Dataset& data, const ModelConfig& cfg,
                                         std::uint64_t seed)
    : model_(model), cfg_(cfg), index_(index_ordinal(data)) {
  cfg_.validate();
  if (model_ == ScoreModel::kMals) {
    for (const auto& r : index_.rankings) {
      check_cap(r.items.size(), cfg_.mals_cap, data.graders()[r.grader].str());
    }
  }
  if (model_ == ScoreModel::kPlackettLuce) {
    std::mt19937_64 rng(seed);
    for (auto& r : index_.rankings) {
      std::size_t begin = 0;
      while (begin < r.items.size()) {
        std::size_t end = begin + 1;
        while (end < r.items.size() && r.level[end] == r.level[begin]) ++end;
        if (end - begin > 1) {
          std::shuffle(r.items.begin() + static_cast<std::ptrdiff_t>(begin),
                       r.items.begin() + static_cast<std::ptrdiff_t>(end), rng);
          ++broken_tie_groups_;
        }
        begin = end;
      }
      for (std::size_t i = 0; i < r.level.size(); ++i) r.level[i] = i;
    }
  }
  if (model_ == ScoreModel::kBradleyTerry || model_ == ScoreModel::kThurstone) {
    pairs_.resize(index_.rankings.size());
    for (std::size_t t = 0; t < index_.rankings.size(); ++t) {
      const auto& r = index_.rankings[t];
      for (std::size_t i = 0; i < r.items.size(); ++i) {
        for (std::size_t j = i + 1; j < r.items.size(); ++j) {
          if (r.level[i] < r.level[j]) pairs_[t].emplace_back(r.items[i], r.items[j]);
        }
      }
    }
  }
}

double ScoreModelObjective::term_log_likelihood(std::size_t t, const std::vector<double>& s, double eta,
                                                std::vector<double>* score_grad, double* eta_grad) const {
  const auto& r = index_.rankings[t];
  double ll = 0.0;
  switch (model_) {
    case ScoreModel::kBradleyTerry:
      for (const auto& [a, b] : pairs_[t]) {
        const double d = s[a] - s[b];
        ll += log_sigmoid(eta * d);
        const double miss = sigmoid(-eta * d);
        if (score_grad) {
          (*score_grad)[a] += eta * miss;
          (*score_grad)[b] -= eta * miss;
        }
        if (eta_grad) *eta_grad += d * miss;
      }
      break;
    case ScoreModel::kThurstone: {
      const double root = std::sqrt(eta);
      for (const auto& [a, b] : pairs_[t]) {
        const double d = s[a] - s[b];
        const double z = root * d;
        const double log_cdf = log_normal_cdf(z);
        ll += log_cdf;
        const double mills = std::exp(-0.5 * z * z - kLogSqrt2Pi - log_cdf);
        if (score_grad) {
          (*score_grad)[a] += root * mills;
          (*score_grad)[b] -= root * mills;
        }
        if (eta_grad) *eta_grad += mills * d / (2.0 * root);
      }
      break;
    }
    case ScoreModel::kPlackettLuce: {
      const std::size_t k = r.items.size();
      std::vector<double> tail(k);
      double acc = kNegInf;
      for (std::size_t i = k; i-- > 0;) {
        acc = log_add(acc, eta * s[r.items[i]]);
        tail[i] = acc;
        ll += eta * s[r.items[i]] - acc;
      }
      if (score_grad || eta_grad) {
        for (std::size_t j = 0; j < k; ++j) {
          const double v = eta * s[r.items[j]];
          double chosen = 1.0;
          for (std::size_t i = 0; i <= j; ++i) chosen -= std::exp(v - tail[i]);
          if (score_grad) (*score_grad)[r.items[j]] += eta * chosen;
          if (eta_grad) *eta_grad += s[r.items[j]] * chosen;
        }
      }
      break;
    }
    case ScoreModel::kMals: {
      const std::size_t k = r.items.size();
      std::vector<double> local(k);
      for (std::size_t i = 0; i < k; ++i) local[i] = s[r.items[i]];
      std::vector<double> g_num(k, 0.0);
      std::vector<double> g_den(k, 0.0);
      double e_num = 0.0;
      double e_den = 0.0;
      const bool want = score_grad || eta_grad;
      const double num = mals_log_mass(local, &r.level, eta, want ? &g_num : nullptr, want ? &e_num : nullptr);
      const double den = mals_log_mass(local, nullptr, eta, want ? &g_den : nullptr, want ? &e_den : nullptr);
      ll = num - den;
      if (score_grad) {
        for (std::size_t i = 0; i < k; ++i) (*score_grad)[r.items[i]] += g_num[i] - g_den[i];
      }
      if (eta_grad) *eta_grad += e_num - e_den;
      break;
    }
  }
  return ll;
}

double ScoreModelObjective::score_prior_penalty(const std::vector<double>& s, std::vector<double>* grad) const {
  const double mean = cfg_.score_prior.mean;
  const double var = cfg_.score_prior.variance;
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - mean;
    total += d * d / (2.0 * var);
    if (grad) (*grad)[i] += d / var;
  }
  return total;
}

ObjectiveValue ScoreModelObjective::evaluate(const std::vector<double>& scores,
                                             const std::vector<double>& reliabilities) const {
  if (scores.size() != n_items() || reliabilities.size() != n_graders()) {
    throw ValidationError("parameter vectors do not match the dataset");
  }
  ObjectiveValue out;
  out.score_gradient.assign(n_items(), 0.0);
  out.reliability_gradient.assign(n_graders(), 0.0);
  for (std::size_t t = 0; t < n_terms(); ++t) {
    const std::size_t g = term_grader(t);
    double eg = 0.0;
    std::vector<double> sg(n_items(), 0.0);
    out.value -= term_log_likelihood(t, scores, reliabilities[g], &sg, &eg);
    for (std::size_t i = 0; i < sg.size(); ++i) out.score_gradient[i] -= sg[i];
    out.reliability_gradient[g] -= eg;
  }
  out.value += score_prior_penalty(scores, &out.score_gradient);
  const auto& prior = cfg_.reliability_prior;
  for (std::size_t g = 0; g < n_graders(); ++g) {
    const double eta = reliabilities[g];
    if (!(eta > 0.0)) throw ValidationError("reliabilities must be > 0");
    out.value -= prior.log_density_unnormalized(eta);
    out.reliability_gradient[g] += -(prior.shape - 1.0) / eta + 1.0 / prior.scale;
  }
  return out;
}

Estimate fit_score_model(const Dataset& data, ScoreModel model, const ModelConfig& cfg, bool with_reliability) {
  cfg.validate();
  if (data.empty()) throw ValidationError("cannot fit a score model to an empty dataset");
  const ScoreModelObjective objective(model, data, cfg, cfg.sgd.seed);
  const std::size_t n = objective.n_items();
  const auto ungraded = ungraded_items(data);
  if (!ungraded.empty()) {
    warn(std::to_string(ungraded.size()) + " item(s) received no feedback; their scores stay at the prior mean");
  }

  std::vector<double> x(n, cfg.score_prior.mean);
  if (model == ScoreModel::kMals) {
    // Scaled-down greedy Mallows solution, best item at +0.1.
    auto previous = set_warning_sink(nullptr);
    const auto greedy = greedy_mle_ranking(data, MallowsParams{});
    set_warning_sink(std::move(previous));
    const auto order = greedy.items();
    const std::size_t graded = n - ungraded.size();
    for (std::size_t p = 0; p < graded; ++p) {
      const double unit = graded > 1 ? 1.0 - 2.0 * static_cast<double>(p) / static_cast<double>(graded - 1) : 0.0;
      x[data.item_index(order[p])] = cfg.score_prior.mean + 0.1 * unit;
    }
  }

  std::vector<double> eta(objective.n_graders(), 1.0);
  const ScoreFit fit(objective, eta);
  auto res = minimize(fit, std::move(x), cfg.sgd);
  int epochs = res.epochs;
  int refine = res.refine_iterations;

  Estimate est;
  if (with_reliability) {
    const auto& prior = cfg.reliability_prior;
    std::fill(eta.begin(), eta.end(), std::clamp(prior.mode(), kMinReliability, kMaxReliability));
    for (int it = 0; it < cfg.sgd.alternating_iterations; ++it) {
      for (std::size_t t = 0; t < objective.n_terms(); ++t) {
        eta[objective.term_grader(t)] = maximize_over_log10_eta([&](double e) {
          return prior.log_density_unnormalized(e) + objective.term_log_likelihood(t, res.x, e, nullptr, nullptr);
        });
      }
      res = minimize(fit, res.x, cfg.sgd);
      epochs += res.epochs;
      refine += res.refine_iterations;
    }
    std::map<GraderId, double> rel;
    for (std::size_t g = 0; g < eta.size(); ++g) rel.emplace(data.graders()[g], eta[g]);
    est.reliabilities = std::move(rel);
  }

  std::map<ItemId, double> scores;
  for (std::size_t i = 0; i < n; ++i) scores.emplace(data.items()[i], res.x[i]);
  est.ranking = ranking_from_scores(scores, cfg.tie_epsilon);
  est.scores = std::move(scores);
  est.metadata["sgd_epochs"] = std::to_string(epochs);
  est.metadata["refine_iterations"] = std::to_string(refine);
  est.metadata["converged"] = res.converged ? "true" : "false";
  est.metadata["ungraded_items"] = std::to_string(ungraded.size());
  if (model == ScoreModel::kPlackettLuce) {
    est.metadata["pl_tie_groups_broken"] = std::to_string(objective.broken_tie_groups());
  }
  return est;
}

}  // namespace opg
