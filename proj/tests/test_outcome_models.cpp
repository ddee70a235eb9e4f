#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "zoab/outcome_models.hpp"

using namespace zoab;

namespace {

double sample_mean(const OutcomeModel& model, const Point& theta, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += model.draw(theta, rng);
  return sum / n;
}

}  // namespace

TEST_CASE("bernoulli draws at theta = 0.5") {
  const auto model = OutcomeModel::bernoulli_quadratic();
  const Point theta{0.5};
  const double p = -0.02125 * 0.25 + 0.01825 * 0.5 + 0.0105;
  CHECK(model.true_mean(theta) == doctest::Approx(0.0143125).epsilon(1e-12));
  CHECK(p == doctest::Approx(0.0143125).epsilon(1e-12));

  RandomStream rng(11);
  const int n = 200000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const double y = model.draw(theta, rng);
    REQUIRE((y == 0.0 || y == 1.0));
    if (y == 1.0) ++ones;
  }
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(ones) / n - p) <= 4 * se);
}

TEST_CASE("gaussian constant has zero sample mean") {
  const auto model = OutcomeModel::gaussian_constant(1, 0.0, 1.0);
  CHECK(std::abs(sample_mean(model, {0.3}, 1000000, 5)) <= 0.004);
  CHECK(model.true_mean(Point{0.9}) == 0.0);
  CHECK(model.true_sd(Point{0.2}) == 1.0);
}

TEST_CASE("pareto scale and mean") {
  // Constant mean 0.015 -> scale 2 * 0.015 / 3 = 0.01.
  const auto model = OutcomeModel::pareto_quadratic(Quadratic{0.0, 0.0, 0.015}, 3.0);
  const Point theta{0.7};
  RandomStream rng(3);
  const int n = 1000000;
  double sum = 0.0;
  double lowest = 1.0;
  for (int i = 0; i < n; ++i) {
    const double y = model.draw(theta, rng);
    sum += y;
    lowest = std::min(lowest, y);
  }
  CHECK(lowest >= 0.01);
  CHECK(lowest < 0.01 * 1.001);
  // sd of Pareto(3, 0.01) is 0.005 * sqrt(3).
  const double sd = 0.01 / 2.0 * std::sqrt(3.0);
  CHECK(model.true_sd(theta) == doctest::Approx(sd).epsilon(1e-12));
  CHECK(std::abs(sum / n - 0.015) <= 5 * sd / std::sqrt(n));
}

TEST_CASE("true mean and sd at known points") {
  const auto bern = OutcomeModel::bernoulli_quadratic();
  const double star = 0.01825 / (2 * 0.02125);
  CHECK(star == doctest::Approx(0.4294118).epsilon(1e-6));
  CHECK(bern.true_mean(Point{star}) == doctest::Approx(0.0144184).epsilon(1e-5));
  CHECK(bern.true_sd(Point{star}) == doctest::Approx(0.119208).epsilon(1e-5));
  REQUIRE(bern.optimum());
  CHECK((*bern.optimum())[0] == doctest::Approx(star).epsilon(1e-14));

  const auto logit = OutcomeModel::logistic(6);
  const Point center(6, 1.0 / 3.0);
  CHECK(logit.true_mean(center) == doctest::Approx(1.0 / (1.0 + std::exp(2.0))).epsilon(1e-14));
  CHECK(logit.true_mean(center) == doctest::Approx(0.1192029).epsilon(1e-6));

  CHECK(OutcomeModel::t_noise_quadratic().true_sd(Point{0.4}) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK_FALSE(OutcomeModel::gaussian_constant(2, 1.0, 1.0).optimum());
}

TEST_CASE("control arm") {
  const auto bern = ControlModel::bernoulli(0.012);
  RandomStream rng(9);
  const int n = 200000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const double y = bern.draw(rng);
    REQUIRE((y == 0.0 || y == 1.0));
    ones += y == 1.0;
  }
  CHECK(std::abs(static_cast<double>(ones) / n - 0.012) <= 4 * std::sqrt(0.012 * 0.988 / n));

  const auto gauss = ControlModel::gaussian(0.0, 1.0);
  double sum = 0.0;
  for (int i = 0; i < 1000000; ++i) sum += gauss.draw(rng);
  CHECK(std::abs(sum / 1e6) <= 0.004);

  const auto fixed = ControlModel::gaussian(0.25, 0.0);
  for (int i = 0; i < 100; ++i) CHECK(fixed.draw(rng) == 0.25);

  CHECK_THROWS_AS(ControlModel::bernoulli(1.5), std::invalid_argument);
  CHECK_THROWS_AS(ControlModel::gaussian(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("sample means match true means for every family") {
  std::vector<OutcomeModel> models{
      OutcomeModel::bernoulli_quadratic(),
      OutcomeModel::pareto_quadratic(),
      OutcomeModel::t_noise_quadratic(),
      OutcomeModel::gaussian_quadratic(Quadratic{-1.0, 0.8, 0.0}, 0.5),
      OutcomeModel::gaussian_constant(1, 2.0, 1.0),
  };
  const std::vector<double> grid{0.0, 0.2, 0.5, 0.8, 1.0};
  const int n = 100000;
  std::uint64_t seed = 100;
  for (const auto& model : models) {
    for (double x : grid) {
      const Point theta{x};
      const double err = std::abs(sample_mean(model, theta, n, ++seed) - model.true_mean(theta));
      CHECK_MESSAGE(err <= 4 * model.true_sd(theta) / std::sqrt(n),
                    to_string(model.family()) << " at " << x);
    }
  }
  const auto logit = OutcomeModel::logistic(6);
  for (double x : grid) {
    const Point theta(6, x);
    const double err = std::abs(sample_mean(logit, theta, n, ++seed) - logit.true_mean(theta));
    CHECK(err <= 4 * logit.true_sd(theta) / std::sqrt(n));
  }
}

TEST_CASE("equal seeds give identical streams") {
  const auto model = OutcomeModel::pareto_quadratic();
  RandomStream a(77);
  RandomStream b(77);
  for (int i = 0; i < 1000; ++i) {
    const Point theta{i / 1000.0};
    CHECK(model.draw(theta, a) == model.draw(theta, b));
  }
}

TEST_CASE("logistic is maximized at the center") {
  const auto model = OutcomeModel::logistic(6);
  const double best = model.true_mean(Point(6, 1.0 / 3.0));
  RandomStream rng(4);
  for (int i = 0; i < 100; ++i) {
    Point theta(6);
    for (double& x : theta) x = rng.uniform();
    CHECK(model.true_mean(theta) <= best);
  }
}

TEST_CASE("noiseless gaussian quadratic") {
  const auto model = OutcomeModel::gaussian_quadratic(Quadratic{-1.0, 0.8, -0.16}, 0.0);
  RandomStream rng(1);
  CHECK(model.draw(Point{0.4}, rng) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(model.draw(Point{0.9}, rng) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("domain and parameter errors") {
  const auto model = OutcomeModel::bernoulli_quadratic();
  RandomStream rng(1);
  CHECK_THROWS_AS(model.draw(Point{1.1}, rng), std::domain_error);
  CHECK_THROWS_AS(model.true_mean(Point{-0.1}), std::domain_error);
  CHECK_THROWS_AS(model.true_mean(Point{std::nan("")}), std::domain_error);
  CHECK_THROWS_AS(model.true_sd(Point{0.1, 0.2}), std::domain_error);

  CHECK_THROWS_AS(OutcomeModel::bernoulli_quadratic(Quadratic{0.0, 1.0, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(OutcomeModel::pareto_quadratic(Quadratic{}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(OutcomeModel::t_noise_quadratic(Quadratic{}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(OutcomeModel(ModelFamily::bernoulli_quadratic, 2, ModelParams{}),
                  std::invalid_argument);
}

TEST_CASE("family names round-trip") {
  for (auto f : {ModelFamily::bernoulli_quadratic, ModelFamily::pareto_quadratic,
                 ModelFamily::t_noise_quadratic, ModelFamily::gaussian_quadratic,
                 ModelFamily::logistic, ModelFamily::gaussian_constant}) {
    CHECK(parse_model_family(to_string(f)) == f);
  }
  CHECK(parse_model_family("logistic_6d") == ModelFamily::logistic);
  CHECK_FALSE(parse_model_family("poisson"));
}
