#include <doctest.h>

#include <random>

#include "censlasso/errors.hpp"
#include "censlasso/losses.hpp"
#include "censlasso/survival_data.hpp"
#include "oracles.hpp"

using namespace censlasso;

TEST_CASE("check loss values") {
  CHECK(check_loss(0.3, 0.0) == 0.0);
  CHECK(check_loss(0.3, -2.0) == doctest::Approx(1.4));
  CHECK(check_loss(0.5, -1.0) == 0.5);
  CHECK(check_loss(0.5, 1.0) == 0.5);
}

TEST_CASE("expectile loss and derivatives") {
  for (double u : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    CHECK(expectile_loss(0.5, u) == doctest::Approx(u * u / 2));
    CHECK(expectile_grad(0.5, u) == doctest::Approx(-u));
    CHECK(expectile_hess(0.5, u) == 1.0);
  }
  CHECK(expectile_grad(0.3, 2.0) == doctest::Approx(-1.2));
  CHECK(expectile_hess(0.3, 2.0) == doctest::Approx(0.6));
  CHECK(expectile_hess(0.3, -2.0) == doctest::Approx(1.4));
}

TEST_CASE("expectile gradient matches central finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tau(0.05, 0.95), u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double t = tau(rng);
    const double x = u(rng);
    if (std::abs(x) < 1e-3) continue;
    const double h = 1e-6;
    const double fd = (oracle::expectile(t, x - h) - oracle::expectile(t, x + h)) / (2 * h);
    CHECK(expectile_grad(t, x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("loss properties") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> tau(0.05, 0.95), u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double t = tau(rng), a = u(rng), b = u(rng);
    CHECK(check_loss(t, 0.5 * (a + b)) <= 0.5 * (check_loss(t, a) + check_loss(t, b)) + 1e-12);
    CHECK(expectile_loss(t, 0.5 * (a + b)) <= 0.5 * (expectile_loss(t, a) + expectile_loss(t, b)) + 1e-12);
    CHECK(check_loss(t, a) == doctest::Approx(check_loss(1 - t, -a)));
    CHECK(check_loss(t, a) + check_loss(1 - t, a) == doctest::Approx(std::abs(a)));
    CHECK(a * expectile_grad(t, a) <= 0.0);
    CHECK(check_loss(t, a) == doctest::Approx(oracle::check(t, a)));
    CHECK(expectile_loss(t, a) == doctest::Approx(oracle::expectile(t, a)));
  }
  CHECK(expectile_grad(0.3, 0.0) == 0.0);
}

TEST_CASE("index estimators") {
  const std::vector<double> sym = {-1.0, 1.0};
  CHECK(estimate_expectile_index(sym) == 0.5);
  CHECK(estimate_quantile_index(sym) == 0.5);
  const std::vector<double> skew = {-2.0, 1.0};
  CHECK(estimate_expectile_index(skew) == doctest::Approx(2.0 / 3.0));
  const std::vector<double> neg = {-1.0, -2.0};
  CHECK(estimate_quantile_index(neg) == 1.0);
  try {
    estimate_expectile_index(neg);
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSample);
  }
}

TEST_CASE("index estimators on a large Gumbel sample") {
  std::mt19937_64 rng(2024);
  std::vector<double> eps(1000000);
  for (double& e : eps) e = sample_standard_gumbel(rng);
  const double tau_star = oracle::gumbel_expectile_index();
  CHECK(std::abs(estimate_expectile_index(eps) - tau_star) < 1e-2);
  CHECK(std::abs(estimate_quantile_index(eps) - std::exp(-1.0)) < 1e-2);
}

TEST_CASE("LossKind parsing and invariants") {
  CHECK(LossKind::parse("median").family() == LossFamily::Median);
  CHECK(LossKind::parse("quantile:0.3").tau() == 0.3);
  CHECK(LossKind::parse("expectile").tau() == 0.5);
  CHECK(LossKind::parse("ls").family() == LossFamily::LeastSquares);
  const LossKind c = LossKind::parse("composite:4");
  CHECK(c.levels() == 4);
  const auto taus = c.taus();
  REQUIRE(taus.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(taus[static_cast<std::size_t>(j)] == doctest::Approx((j + 1) / 5.0));
  CHECK(LossKind::parse("composite").levels() == 10);
  CHECK_THROWS_AS(LossKind::quantile(1.0), Error);
  CHECK_THROWS_AS(LossKind::expectile(0.0), Error);
  CHECK_THROWS_AS(LossKind::composite_quantile(0), Error);
  CHECK_THROWS_AS(LossKind::parse("huber"), Error);
  CHECK(family_loss(LossKind::least_squares(), 2.0) == doctest::Approx(2.0));
  CHECK(family_loss(LossKind::median(), -2.0) == doctest::Approx(1.0));
}
