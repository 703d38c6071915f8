#include <doctest.h>

#include <random>
#include <sstream>

#include "censlasso/errors.hpp"
#include "censlasso/kaplan_meier.hpp"
#include "oracles.hpp"

using namespace censlasso;

namespace {

SurvivalDataset make(const std::vector<double>& y, const std::vector<int>& delta) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Vector yy(n);
  IntVector dd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yy[i] = y[static_cast<std::size_t>(i)];
    dd[i] = delta[static_cast<std::size_t>(i)];
  }
  return SurvivalDataset(yy, dd, Matrix::Zero(n, 1));
}

std::vector<oracle::SurvPoint> points(const std::vector<double>& y, const std::vector<int>& delta) {
  std::vector<oracle::SurvPoint> out;
  for (std::size_t i = 0; i < y.size(); ++i) out.push_back({y[i], delta[i]});
  return out;
}

}  // namespace

TEST_CASE("no censoring gives the constant curve") {
  const auto d = make({3, 1, 2, 5}, {1, 1, 1, 1});
  const auto curve = fit_censoring_km(d);
  for (double t : {0.0, 1.0, 2.5, 5.0, 100.0}) CHECK(curve.evaluate(t) == 1.0);
}

TEST_CASE("hand example: 1 before 2, 1/2 after") {
  const auto d = make({1, 2, 3}, {1, 0, 1});
  const auto curve = fit_censoring_km(d);
  CHECK(curve.evaluate(0.0) == 1.0);
  CHECK(curve.evaluate(1.999) == 1.0);
  CHECK(curve.evaluate(2.0) == 0.5);
  CHECK(curve.evaluate(2.5) == 0.5);
  CHECK(curve.evaluate(10.0) == 0.5);
  std::ostringstream out;
  write_curve_csv(curve, out);
  CHECK(out.str() == "time,survival\n0,1\n2,0.5\n");
}

TEST_CASE("five-point mixed dataset matches the product-limit oracle") {
  const std::vector<double> y = {0.7, 1.9, 2.4, 3.1, 4.6};
  const std::vector<int> delta = {0, 1, 0, 0, 1};
  const auto curve = fit_censoring_km(make(y, delta));
  const auto pts = points(y, delta);
  for (double t : {0.0, 0.7, 1.0, 1.9, 2.4, 3.0, 3.1, 4.6, 9.0}) {
    CHECK(curve.evaluate(t) == doctest::Approx(oracle::naive_censoring_km(pts, t)).epsilon(1e-15));
  }
  // (4/5)(2/3)(1/2)
  CHECK(curve.evaluate(3.5) == doctest::Approx(4.0 / 5.0 * 2.0 / 3.0 * 0.5));
}

TEST_CASE("ties: events leave the risk set before censorings") {
  // At time 2 one event and one censoring; the censoring sees a risk set of 2.
  const auto curve = fit_censoring_km(make({1, 2, 2, 3}, {1, 1, 0, 1}));
  CHECK(curve.evaluate(2.0) == doctest::Approx(0.5));
  const auto pts = points({1, 2, 2, 3}, {1, 1, 0, 1});
  CHECK(curve.evaluate(2.0) == doctest::Approx(oracle::naive_censoring_km(pts, 2.0)));
}

TEST_CASE("random tied datasets match the naive oracle") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(2, 12), tval(1, 6), flag(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = size(rng);
    std::vector<double> y;
    std::vector<int> delta;
    for (int i = 0; i < n; ++i) {
      y.push_back(tval(rng) * 0.5);
      delta.push_back(flag(rng));
    }
    const auto curve = fit_censoring_km(make(y, delta));
    const auto pts = points(y, delta);
    double prev = 1.0;
    for (double t = 0.0; t <= 3.5; t += 0.25) {
      const double g = curve.evaluate(t);
      CHECK(g == doctest::Approx(oracle::naive_censoring_km(pts, t)).epsilon(1e-14));
      CHECK(g <= prev);
      CHECK(g >= 0.0);
      prev = g;
    }
  }
}

TEST_CASE("curve invariants on generated data") {
  const auto d = generate_dataset(GenerationSpec::simulation_default(300, 2, 8), 6.0);
  const auto curve = fit_censoring_km(d);
  const auto& t = curve.jump_times();
  const auto& v = curve.values();
  REQUIRE(t.size() == v.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) {
      CHECK(t[i] > t[i - 1]);
      CHECK(v[i] <= v[i - 1]);
    }
    CHECK(v[i] >= 0.0);
    CHECK(v[i] <= 1.0);
    CHECK(curve.evaluate(t[i]) == v[i]);
  }
  if (!t.empty()) CHECK(curve.evaluate(0.5 * t.front()) == 1.0);
  CHECK(curve.n_fit() == 300);
}

TEST_CASE("ipcw weights") {
  const auto d = make({1, 2, 3}, {1, 0, 1});
  const auto curve = fit_censoring_km(d);
  const auto w = ipcw_weights(d, curve);
  CHECK(w.w[0] == 1.0);
  CHECK(w.w[1] == 0.0);
  CHECK(w.w[2] == 2.0);
  CHECK(w.floor_used == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ipcw floor binds when the last event follows many censorings") {
  // Censorings at 1..5 push G down to 1/6 before the event at 6.
  const auto d = make({1, 2, 3, 4, 5, 6}, {0, 0, 0, 0, 0, 1});
  const auto curve = fit_censoring_km(d);
  CHECK(curve.evaluate(6.0) == doctest::Approx(1.0 / 6.0));
  const auto w = ipcw_weights(d, curve, 0.5);
  CHECK(w.w[5] == doctest::Approx(1.0 / 0.5));
  for (int i = 0; i < 5; ++i) CHECK(w.w[i] == 0.0);
}

TEST_CASE("all censored raises DegenerateWeights") {
  const auto d = make({1, 2}, {0, 0});
  try {
    ipcw_weights(d, fit_censoring_km(d));
    FAIL("expected DegenerateWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateWeights);
  }
}

TEST_CASE("mean over events of w G equals the event fraction") {
  const auto d = generate_dataset(GenerationSpec::simulation_default(400, 2, 4), 9.0);
  const auto curve = fit_censoring_km(d);
  const auto w = ipcw_weights(d, curve, 1e-12);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    if (d.delta()[i] == 1) {
      CHECK(w.w[i] >= 1.0);
      acc += w.w[i] * curve.evaluate(d.y()[i]);
    } else {
      CHECK(w.w[i] == 0.0);
    }
  }
  CHECK(acc / d.n() == doctest::Approx(static_cast<double>(d.events()) / d.n()).epsilon(1e-12));
}
