#include "opg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

namespace opg {
namespace {

constexpr double kMaxSgdStep = 1.0;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion; returns the descent direction -H g.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<Correction>& mem) {
  std::vector<double> q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * dot(mem[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * mem[k].y[i];
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * dot(mem[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += mem[k].s[i] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

void refine(const SeparableObjective& objective, OptimizeResult& res, const SgdConfig& cfg) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  std::vector<double> g;
  double f = objective.value_and_gradient(res.x, g);
  std::deque<Correction> mem;
  std::vector<double> x_new(res.x.size());
  std::vector<double> g_new;
  for (int it = 0; it < cfg.refine_iterations; ++it) {
    if (max_abs(g) < cfg.gradient_tolerance) {
      res.converged = true;
      break;
    }
    auto dir = lbfgs_direction(g, mem);
    double slope = dot(dir, g);
    if (!(slope < 0.0)) {
      mem.clear();
      dir = g;
      for (double& v : dir) v = -v;
      slope = dot(dir, g);
    }
    double step = mem.empty() ? std::min(1.0, 1.0 / max_abs(g)) : 1.0;
    double f_new = f;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < x_new.size(); ++i) x_new[i] = res.x[i] + step * dir[i];
      f_new = objective.value_and_gradient(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++res.refine_iterations;
    if (!accepted) break;
    Correction c{std::vector<double>(x_new.size()), std::vector<double>(x_new.size()), 0.0};
    for (std::size_t i = 0; i < x_new.size(); ++i) {
      c.s[i] = x_new[i] - res.x[i];
      c.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(c.s, c.y);
    if (sy > 1e-12 * std::sqrt(dot(c.s, c.s) * dot(c.y, c.y))) {
      c.rho = 1.0 / sy;
      mem.push_back(std::move(c));
      if (mem.size() > kMemory) mem.pop_front();
    }
    const bool stalled = f - f_new <= 1e-16 * std::max(1.0, std::abs(f));
    res.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (stalled && max_abs(g) < std::sqrt(cfg.gradient_tolerance)) {
      res.converged = true;
      break;
    }
  }
  res.value = f;
}

}  // namespace

double SeparableObjective::value_and_gradient(const std::vector<double>& x, std::vector<double>& grad) const {
  grad.assign(dimension(), 0.0);
  double total = 0.0;
  for (std::size_t t = 0; t < num_terms(); ++t) total += term(t, x, grad);
  return total + regularizer(x, grad);
}

OptimizeResult minimize(const SeparableObjective& objective, std::vector<double> x0, const SgdConfig& cfg) {
  cfg.validate();
  const std::size_t n = objective.dimension();
  const std::size_t terms = objective.num_terms();
  if (x0.size() != n) throw ValidationError("initial point has the wrong dimension");

  OptimizeResult res;
  std::vector<double> x = std::move(x0);
  std::vector<double> full_grad;
  double prev = objective.value_and_gradient(x, full_grad);
  res.x = x;
  res.value = prev;

  std::vector<std::size_t> order(terms);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> g(n);
  std::vector<double> reg(n);
  const double reg_share = terms > 0 ? 1.0 / static_cast<double>(terms) : 1.0;

  for (int epoch = 0; epoch < cfg.max_epochs && terms > 0; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.decay == DecaySchedule::kInverseSqrt
                          ? cfg.learning_rate / std::sqrt(static_cast<double>(epoch + 1))
                          : cfg.learning_rate;
    for (std::size_t t : order) {
      std::fill(g.begin(), g.end(), 0.0);
      std::fill(reg.begin(), reg.end(), 0.0);
      objective.term(t, x, g);
      objective.regularizer(x, reg);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = lr * (g[i] + reg_share * reg[i]);
        norm2 += g[i] * g[i];
      }
      const double scale = norm2 > kMaxSgdStep * kMaxSgdStep ? kMaxSgdStep / std::sqrt(norm2) : 1.0;
      for (std::size_t i = 0; i < n; ++i) x[i] -= scale * g[i];
    }
    res.epochs = epoch + 1;
    const double f = objective.value_and_gradient(x, full_grad);
    if (std::isfinite(f) && f < res.value) {
      res.value = f;
      res.x = x;
    }
    if (std::abs(prev - f) <= cfg.rel_tolerance * std::max(1.0, std::abs(f))) break;
    prev = f;
  }

  refine(objective, res, cfg);
  return res;
}

double maximize_over_log10_eta(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ValidationError("empty search interval");
  constexpr int kGrid = 120;
  auto g = [&](double u) { return f(std::pow(10.0, u)); };
  const double step = (hi - lo) / kGrid;
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double v = g(lo + step * i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kGrid);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = g(c);
  double fd = g(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = g(d);
    }
  }
  double u = 0.5 * (a + b);
  // The optimum may sit on the interval boundary.
  const double grid_u = lo + step * best;
  if (best_val > g(u)) u = grid_u;
  return std::pow(10.0, std::clamp(u, lo, hi));
}

}  // namespace opg
