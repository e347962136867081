#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "opg/config.hpp"

namespace opg {

// Objective of the form sum_t term_t(x) + regularizer(x), minimized.
// Both callbacks add their gradient into `grad` (never overwrite it).
class SeparableObjective {
 public:
  virtual ~SeparableObjective() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t num_terms() const = 0;
  virtual double term(std::size_t t, const std::vector<double>& x, std::vector<double>& grad) const = 0;
  virtual double regularizer(const std::vector<double>& x, std::vector<double>& grad) const = 0;

  // Full value; `grad` is resized and overwritten.
  double value_and_gradient(const std::vector<double>& x, std::vector<double>& grad) const;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int epochs = 0;
  int refine_iterations = 0;
  bool converged = false;
};

// Shuffled per-term SGD with the configured schedule, then full-gradient
// L-BFGS polishing until the gradient's max-norm drops below
// cfg.gradient_tolerance.
OptimizeResult minimize(const SeparableObjective& objective, std::vector<double> x0, const SgdConfig& cfg);

// Maximizes f(eta) over log10(eta) in [lo, hi]: coarse grid, then
// golden-section refinement of the best bracket to `tol` in log10 units.
double maximize_over_log10_eta(const std::function<double(double)>& f, double lo = -3.0, double hi = 3.0,
                               double tol = 1e-6);

}  // namespace opg
