#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "zoab/estimators.hpp"

using namespace zoab;

namespace {

using Fn = std::function<double(double)>;

// Means of a noiseless 1-d function at the symmetric stencil around x.
FourPointMeans means_of(const Fn& f, double x, double c, double k) {
  return {f(x + c), f(x - c), f(x + k * c), f(x - k * c)};
}

double log_slope(const std::vector<double>& cs, const std::vector<double>& errs) {
  const double n = static_cast<double>(cs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    mx += std::log(cs[i]) / n;
    my += std::log(errs[i]) / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    sxx += (std::log(cs[i]) - mx) * (std::log(cs[i]) - mx);
    sxy += (std::log(cs[i]) - mx) * (std::log(errs[i]) - my);
  }
  return sxy / sxx;
}

double norm(const Point& w) {
  double s = 0;
  for (double x : w) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("unit sphere in one dimension is a coin flip") {
  RandomStream rng(1);
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Point w = sample_unit_sphere(rng, 1);
    REQUIRE((w[0] == 1.0 || w[0] == -1.0));
    plus += w[0] > 0;
  }
  CHECK(std::abs(plus / double(n) - 0.5) <= 4 * 0.5 / std::sqrt(n));
}

TEST_CASE("unit sphere in three dimensions") {
  RandomStream rng(2);
  Point mean(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Point w = sample_unit_sphere(rng, 3);
    REQUIRE(std::abs(norm(w) - 1.0) <= 1e-12);
    for (int j = 0; j < 3; ++j) mean[j] += w[j] / n;
  }
  for (double m : mean) CHECK(std::abs(m) <= 0.02);
  CHECK_THROWS_AS(sample_unit_sphere(rng, 0), std::domain_error);
}

TEST_CASE("clip rule points") {
  const Point up{1.0};
  auto s = perturbation_points(Point{0.5}, up, 0.1, 3.0);
  CHECK(s.plus[0] == doctest::Approx(0.6));
  CHECK(s.minus[0] == doctest::Approx(0.4));
  CHECK(s.plus_plus[0] == doctest::Approx(0.8));
  CHECK(s.minus_minus[0] == doctest::Approx(0.2));
  CHECK_FALSE(s.clipped);

  s = perturbation_points(Point{0.95}, up, 0.1, 3.0);
  CHECK(s.plus_plus[0] == 1.0);
  CHECK(s.plus[0] == 1.0);
  CHECK(s.clipped);
  CHECK(s.degenerate);

  s = perturbation_points(Point{0.5, 0.5}, Point{1.0, 0.0}, 0.2, 2.0);
  CHECK(s.minus_minus[0] == doctest::Approx(0.1));
  CHECK(s.minus_minus[1] == 0.5);

  CHECK_THROWS_AS(perturbation_points(Point{0.5}, up, 0.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_points(Point{0.5}, up, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_points(Point{1.5}, up, 0.1, 3.0), std::domain_error);
}

TEST_CASE("clip rule keeps the k ratio before projection") {
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    Point theta(3);
    for (double& x : theta) x = 0.3 + 0.4 * rng.uniform();
    const Point w = sample_unit_sphere(rng, 3);
    const auto s = perturbation_points(theta, w, 0.05, 2.5);
    REQUIRE_FALSE(s.clipped);
    for (int j = 0; j < 3; ++j) {
      CHECK(s.plus_plus[j] - theta[j] == doctest::Approx(2.5 * (s.plus[j] - theta[j])));
      CHECK(s.minus_minus[j] - theta[j] == doctest::Approx(2.5 * (s.minus[j] - theta[j])));
    }
  }
}

TEST_CASE("shrink rule stays on the line inside the box") {
  auto s = fitted_perturbation_points(Point{0.95}, Point{1.0}, 0.1, 3.0);
  CHECK(s.width_plus == doctest::Approx(0.05 / 3.0));
  CHECK(s.width_minus == 0.1);
  CHECK(s.plus_plus[0] == doctest::Approx(1.0));
  CHECK(s.minus_minus[0] == doctest::Approx(0.65));
  CHECK_FALSE(s.symmetric());
  CHECK_FALSE(s.degenerate);

  RandomStream rng(5);
  for (int i = 0; i < 500; ++i) {
    Point theta(4);
    for (double& x : theta) x = rng.uniform();
    const Point w = sample_unit_sphere(rng, 4);
    s = fitted_perturbation_points(theta, w, 0.3, 3.0);
    for (const Point* p : {&s.plus, &s.minus, &s.plus_plus, &s.minus_minus}) {
      for (double x : *p) REQUIRE((x >= 0.0 && x <= 1.0));
    }
    for (int j = 0; j < 4; ++j) {
      CHECK(s.plus[j] == doctest::Approx(theta[j] + s.width_plus * w[j]));
      CHECK(s.minus_minus[j] == doctest::Approx(theta[j] - 3.0 * s.width_minus * w[j]));
    }
  }
}

TEST_CASE("random subsets are uniform") {
  RandomStream rng(6);
  int first = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto s = random_subset(rng, 1);
    REQUIRE(s.size() == 1);
    first += s[0] == 0;
  }
  CHECK(std::abs(first / 1e5 - 0.5) <= 0.01);

  std::map<std::vector<std::size_t>, int> counts;
  for (int i = 0; i < 100000; ++i) ++counts[random_subset(rng, 2)];
  CHECK(counts.size() == 6);
  for (const auto& [subset, n] : counts) CHECK(std::abs(n / 1e5 - 1.0 / 6.0) <= 0.01);

  for (std::size_t m : {3u, 10u, 57u}) CHECK(random_subset(rng, m).size() == m);
}

TEST_CASE("pair means") {
  // mu(theta) = 3 theta + 2, noiseless: 2 at 0 and 5 at 1.
  const auto model = OutcomeModel::gaussian_quadratic(Quadratic{0.0, 3.0, 2.0}, 0.0);
  RandomStream rng(7);
  const auto pm = collect_pair_means(model, Point{0.0}, Point{1.0}, 3, rng);
  CHECK(pm.mean_a == 2.0);
  CHECK(pm.mean_b == 5.0);
  CHECK(pm.outcomes.size() == 6);

  const auto noise = OutcomeModel::gaussian_constant(1, 0.0, 1.0);
  const auto big = collect_pair_means(noise, Point{0.5}, Point{0.5}, 10000, rng);
  CHECK(std::abs(big.mean_a - big.mean_b) <= 4 * std::sqrt(2.0 / 1e4));

  CHECK_THROWS_AS(collect_pair_means(model, Point{1.2}, Point{0.5}, 3, rng), std::domain_error);
}

TEST_CASE("four-point estimates on -theta^2") {
  // stencil at 0.3 with c = 0.1, k = 2: 0.4, 0.2, 0.5, 0.1.
  const FourPointMeans m{-0.16, -0.04, -0.25, -0.01};
  const Point w{1.0};
  CHECK(gradient_four_point(m, 2.0, 0.1, w)[0] == doctest::Approx(-0.6).epsilon(1e-14));
  CHECK(value_four_point(m, 2.0) == doctest::Approx(-0.09).epsilon(1e-14));

  const FourPointMeans flat{0.7, 0.7, 0.7, 0.7};
  CHECK(gradient_four_point(flat, 3.0, 0.1, w)[0] == 0.0);
  CHECK(value_four_point(flat, 3.0) == doctest::Approx(0.7).epsilon(1e-15));

  CHECK_THROWS_AS(gradient_four_point(m, 2.0, 0.0, w), std::invalid_argument);
  CHECK_THROWS_AS(value_four_point(m, 1.0), std::invalid_argument);
}

TEST_CASE("error orders of the four-point estimates") {
  // The symmetric stencil cancels the odd terms in the value and the
  // cubic term in the gradient, so both are exact one degree higher than
  // their leading error suggests.
  const double x = 0.5;
  const double k = 3.0;
  const Fn cube = [](double t) { return t * t * t; };
  const Fn quart = [](double t) { return t * t * t * t; };
  const Fn quint = [](double t) { return std::pow(t, 5); };
  const Point w{1.0};

  for (double c : {0.2, 0.1, 0.05}) {
    CHECK(std::abs(value_four_point(means_of(cube, x, c, k), k) - cube(x)) <= 1e-14);
    CHECK(std::abs(gradient_four_point(means_of(quart, x, c, k), k, c, w)[0] - 4 * x * x * x) <=
          1e-13);
  }

  auto value_err = [&](double c) {
    return std::abs(value_four_point(means_of(quart, x, c, k), k) - quart(x));
  };
  auto grad_err = [&](double c) {
    return std::abs(gradient_four_point(means_of(quint, x, c, k), k, c, w)[0] -
                    5 * std::pow(x, 4));
  };
  CHECK(value_err(0.1) / value_err(0.05) == doctest::Approx(16.0).epsilon(1e-6));
  CHECK(grad_err(0.1) / grad_err(0.05) == doctest::Approx(16.0).epsilon(1e-6));
}

TEST_CASE("error-order slopes on exp") {
  const Fn f = [](double t) { return std::exp(t); };
  const double x = 0.3;
  const double k = 3.0;
  const std::vector<double> cs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> grad, value, central;
  for (double c : cs) {
    const auto m = means_of(f, x, c, k);
    grad.push_back(std::abs(gradient_four_point(m, k, c, Point{1.0})[0] - f(x)));
    value.push_back(std::abs(value_four_point(m, k) - f(x)));
    central.push_back(std::abs(value_central_fd(m.plus, m.minus) - f(x)));
  }
  CHECK(log_slope(cs, grad) == doctest::Approx(4.0).epsilon(0.1));
  // Value error is O(c^4) for the symmetric stencil (the c^3 term cancels).
  CHECK(log_slope(cs, value) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(log_slope(cs, central) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("exact on random quadratics") {
  RandomStream rng(8);
  const std::size_t d = 4;
  for (int trial = 0; trial < 100; ++trial) {
    // f(x) = x'Ax + b'x + c0
    std::vector<double> A(d * d), b(d);
    for (double& a : A) a = 2 * rng.uniform() - 1;
    for (double& v : b) v = 2 * rng.uniform() - 1;
    const double c0 = rng.uniform();
    auto f = [&](const Point& p) {
      double s = c0;
      for (std::size_t i = 0; i < d; ++i) {
        s += b[i] * p[i];
        for (std::size_t j = 0; j < d; ++j) s += A[i * d + j] * p[i] * p[j];
      }
      return s;
    };
    Point theta(d);
    for (double& x : theta) x = rng.uniform();
    const Point w = sample_unit_sphere(rng, d);
    double dir = 0;
    for (std::size_t i = 0; i < d; ++i) {
      double gi = b[i];
      for (std::size_t j = 0; j < d; ++j) gi += (A[i * d + j] + A[j * d + i]) * theta[j];
      dir += gi * w[i];
    }
    const double k = 1.5 + 3 * rng.uniform();
    for (double c : {0.1, 0.01}) {
      auto at = [&](double s) {
        Point p = theta;
        for (std::size_t i = 0; i < d; ++i) p[i] += s * c * w[i];
        return f(p);
      };
      const FourPointMeans m{at(1), at(-1), at(k), at(-k)};
      const Point g = gradient_four_point(m, k, c, w);
      double gdir = 0;
      for (std::size_t i = 0; i < d; ++i) gdir += g[i] * w[i];
      CHECK(std::abs(gdir - dir) <= 1e-12);
      CHECK(std::abs(value_four_point(m, k) - f(theta)) <= 1e-12);
      for (std::size_t i = 0; i < d; ++i) CHECK(g[i] == doctest::Approx(gdir * w[i]));
    }
  }
}

TEST_CASE("central and forward differences") {
  const Point w{1.0};
  CHECK(gradient_central_fd(-0.16, -0.04, 0.1, w)[0] == doctest::Approx(-0.6).epsilon(1e-14));
  CHECK(gradient_central_fd(0.3, 0.3, 0.1, w)[0] == 0.0);
  for (double x : {0.1, 0.5, 0.9}) {
    const double c = 0.05;
    const double g = gradient_central_fd(std::pow(x + c, 3), std::pow(x - c, 3), c, w)[0];
    CHECK(g - 3 * x * x == doctest::Approx(c * c).epsilon(1e-9));
  }
  CHECK(value_central_fd(-0.16, -0.04) == doctest::Approx(-0.10).epsilon(1e-14));
  CHECK(value_central_fd(-0.16, -0.04) - (-0.09) == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(value_central_fd(0.4, 0.4) == 0.4);
  CHECK(value_central_fd(2 * 0.4 + 1, 2 * 0.2 + 1) == doctest::Approx(2 * 0.3 + 1));

  CHECK(gradient_forward_fd(0.4, 0.3, 0.1, w)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gradient_forward_fd(0.2, 0.2, 0.1, w)[0] == 0.0);
  CHECK(gradient_forward_fd(-0.16, -0.09, 0.1, w)[0] == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK_THROWS_AS(gradient_central_fd(1, 0, 0.0, w), std::invalid_argument);
  CHECK_THROWS_AS(gradient_forward_fd(1, 0, 0.0, w), std::invalid_argument);
}

TEST_CASE("line fit reduces to the four-point formulas on symmetric stencils") {
  RandomStream rng(9);
  for (int i = 0; i < 50; ++i) {
    const double c = 0.01 + 0.2 * rng.uniform();
    const double k = 2 + 2 * rng.uniform();
    const FourPointMeans m{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const std::vector<LineSample> s{{c, m.plus, 45}, {-c, m.minus, 45},
                                    {k * c, m.plus_plus, 5}, {-k * c, m.minus_minus, 5}};
    const LineFit fit = fit_along_line(s);
    CHECK(fit.value == doctest::Approx(value_four_point(m, k)).epsilon(1e-9));
    CHECK(fit.distinct_offsets == 4);
  }
}

TEST_CASE("shrunk stencils stay exact on quadratics") {
  const auto model = OutcomeModel::gaussian_quadratic(Quadratic{-1.0, 0.8, -0.16}, 0.0);
  RandomStream rng(10);
  for (double x : {0.0, 0.02, 0.5, 0.97, 1.0}) {
    for (double dir : {1.0, -1.0}) {
      const Point w{dir};
      const auto set = fitted_perturbation_points(Point{x}, w, 0.2, 3.0);
      if (set.degenerate) continue;
      const auto est = estimate_four_point(model, set, 45, 5, rng);
      CHECK(est.mu_hat == doctest::Approx(model.true_mean(Point{x})).epsilon(1e-10));
      CHECK(est.gradient[0] == doctest::Approx(-2 * x + 0.8).epsilon(1e-9));
      CHECK(est.draws_used == 100);
    }
  }
}

TEST_CASE("iteration draws and gradient direction") {
  const auto model = OutcomeModel::bernoulli_quadratic();
  RandomStream rng(11);
  const Point w{-1.0};
  const auto set = make_perturbation(Point{0.5}, w, 0.1, 3.0, BoundaryRule::shrink);
  const auto est = estimate_four_point(model, set, 45, 5, rng);
  CHECK(est.draws_used == 100);
  CHECK(est.outcomes.size() == 100);
  for (std::size_t i = 0; i < 90; ++i) {
    CHECK((est.outcomes[i].arm == Arm::plus || est.outcomes[i].arm == Arm::minus));
  }
  for (std::size_t i = 90; i < 100; ++i) {
    CHECK((est.outcomes[i].arm == Arm::plus_plus || est.outcomes[i].arm == Arm::minus_minus));
  }
}

TEST_CASE("value estimate variance identity") {
  const auto model = OutcomeModel::gaussian_constant(1, 0.0, 1.0);
  const double k = 3.0;
  const std::size_t m1 = 45, m2 = 5;
  RandomStream rng(12);
  const auto set = perturbation_points(Point{0.5}, Point{1.0}, 0.05, k);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double v = estimate_four_point(model, set, m1, m2, rng).mu_hat;
    sum += v;
    sq += v * v;
  }
  const double var = (sq - sum * sum / n) / (n - 1);
  const double expected = 1.0 / (2 * (k * k - 1) * (k * k - 1)) * (k * k * k * k / m1 + 1.0 / m2);
  CHECK(var == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("sample means are unbiased at fixed points") {
  const auto model = OutcomeModel::bernoulli_quadratic();
  RandomStream rng(13);
  const auto set = perturbation_points(Point{0.5}, Point{1.0}, 0.1, 3.0);
  const int n = 20000;
  FourPointMeans avg;
  for (int i = 0; i < n; ++i) {
    const auto m = estimate_four_point(model, set, 45, 5, rng).means;
    avg.plus += m.plus / n;
    avg.minus += m.minus / n;
    avg.plus_plus += m.plus_plus / n;
    avg.minus_minus += m.minus_minus / n;
  }
  auto check = [&](double got, const Point& p, double per_run) {
    const double mu = model.true_mean(p);
    CHECK(std::abs(got - mu) <= 4 * std::sqrt(mu * (1 - mu) / (per_run * n)));
  };
  check(avg.plus, set.plus, 45);
  check(avg.minus, set.minus, 45);
  check(avg.plus_plus, set.plus_plus, 5);
  check(avg.minus_minus, set.minus_minus, 5);
}
