#include <doctest.h>

#include <cmath>

#include "opg/optimizer.hpp"

using namespace opg;

namespace {

// sum_t 0.5 * w_t * (x_t - c_t)^2 + 0.5 * lambda * |x|^2
class Quadratic : public SeparableObjective {
 public:
  Quadratic(std::vector<double> c, std::vector<double> w, double lambda) : c_(c), w_(w), lambda_(lambda) {}
  std::size_t dimension() const override { return c_.size(); }
  std::size_t num_terms() const override { return c_.size(); }
  double term(std::size_t t, const std::vector<double>& x, std::vector<double>& grad) const override {
    const double d = x[t] - c_[t];
    grad[t] += w_[t] * d;
    return 0.5 * w_[t] * d * d;
  }
  double regularizer(const std::vector<double>& x, std::vector<double>& grad) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v += 0.5 * lambda_ * x[i] * x[i];
      grad[i] += lambda_ * x[i];
    }
    return v;
  }
  double argmin(std::size_t i) const { return w_[i] * c_[i] / (w_[i] + lambda_); }

 private:
  std::vector<double> c_;
  std::vector<double> w_;
  double lambda_;
};

// Rosenbrock as a single term: ill-conditioned, exercises the line search.
class Rosenbrock : public SeparableObjective {
 public:
  std::size_t dimension() const override { return 2; }
  std::size_t num_terms() const override { return 1; }
  double term(std::size_t, const std::vector<double>& x, std::vector<double>& grad) const override {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    grad[0] += -2.0 * a - 400.0 * x[0] * b;
    grad[1] += 200.0 * b;
    return a * a + 100.0 * b * b;
  }
  double regularizer(const std::vector<double>&, std::vector<double>&) const override { return 0.0; }
};

}  // namespace

TEST_CASE("minimize reaches the quadratic optimum") {
  const Quadratic q({3.0, -2.0, 0.5, 10.0}, {1.0, 4.0, 0.5, 2.0}, 0.1);
  const auto res = minimize(q, std::vector<double>(4, 0.0), SgdConfig{});
  CHECK(res.converged);
  for (std::size_t i = 0; i < 4; ++i) CHECK(res.x[i] == doctest::Approx(q.argmin(i)).epsilon(1e-8));
  std::vector<double> g;
  CHECK(q.value_and_gradient(res.x, g) == doctest::Approx(res.value));
}

TEST_CASE("minimize handles an ill-conditioned valley") {
  SgdConfig cfg;
  cfg.max_epochs = 5;
  cfg.refine_iterations = 5000;
  const auto res = minimize(Rosenbrock{}, {-1.2, 1.0}, cfg);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minimize is deterministic for a seed") {
  const Quadratic q({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}, 0.5);
  SgdConfig cfg;
  cfg.refine_iterations = 0;
  cfg.seed = 3;
  const auto a = minimize(q, {0.0, 0.0, 0.0}, cfg);
  const auto b = minimize(q, {0.0, 0.0, 0.0}, cfg);
  CHECK(a.x == b.x);
  CHECK(a.epochs == b.epochs);
}

TEST_CASE("maximize_over_log10_eta finds interior and boundary maxima") {
  const double eta = maximize_over_log10_eta([](double e) { return -std::pow(std::log10(e) - 0.3, 2.0); });
  CHECK(std::log10(eta) == doctest::Approx(0.3).epsilon(1e-5));
  // Gamma(10, 0.1) log-density peaks at its mode 0.9.
  const double mode = maximize_over_log10_eta([](double e) { return 9.0 * std::log(e) - e / 0.1; });
  CHECK(mode == doctest::Approx(0.9).epsilon(1e-5));
  CHECK(maximize_over_log10_eta([](double e) { return e; }) == doctest::Approx(1e3).epsilon(1e-5));
  CHECK(maximize_over_log10_eta([](double e) { return -e; }) == doctest::Approx(1e-3).epsilon(1e-5));
}
