#include <doctest.h>

#include <set>

#include "censlasso/aggregation.hpp"
#include "censlasso/errors.hpp"

using namespace censlasso;

TEST_CASE("interleaved split examples") {
  const auto g = interleaved_split(6, 2);
  REQUIRE(g.groups.size() == 2);
  CHECK(g.groups[0] == std::vector<int>{0, 2, 4});
  CHECK(g.groups[1] == std::vector<int>{1, 3, 5});
  CHECK(g.warning.empty());
  const auto one = interleaved_split(4, 1);
  CHECK(one.groups[0] == std::vector<int>{0, 1, 2, 3});
  const auto odd = interleaved_split(7, 2);
  CHECK(odd.groups[0].size() == 3);
  CHECK(odd.groups[1].size() == 3);
  CHECK(odd.dropped == 1);
  CHECK(odd.n_used == 6);
  CHECK_FALSE(odd.warning.empty());
  try {
    interleaved_split(3, 4);
    FAIL("expected InvalidK");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidK);
  }
}

TEST_CASE("split partitions the used rows") {
  for (int n = 1; n <= 40; ++n) {
    for (int K = 1; K <= n; ++K) {
      const auto g = interleaved_split(n, K);
      std::set<int> seen;
      for (int k = 0; k < K; ++k) {
        CHECK(static_cast<int>(g.groups[static_cast<std::size_t>(k)].size()) == n / K);
        for (std::size_t r = 0; r < g.groups[static_cast<std::size_t>(k)].size(); ++r) {
          const int i = g.groups[static_cast<std::size_t>(k)][r];
          CHECK(i == static_cast<int>(r) * K + k);
          seen.insert(i);
        }
      }
      CHECK(static_cast<int>(seen.size()) == g.n_used);
      CHECK((seen.empty() || *seen.rbegin() == g.n_used - 1));
    }
  }
}

TEST_CASE("vote examples") {
  const std::vector<IndexSet> s = {{0, 1}, {0}, {0, 2}, {3}, {}};
  CHECK(vote_support(s, 2) == IndexSet{0});
  CHECK(vote_support(s, 1) == IndexSet{0, 1, 2, 3});
  CHECK(vote_support(s, 3) == IndexSet{0});
  CHECK(vote_support(s, 4) == IndexSet{});
  const IntVector c = vote_counts(s, 5);
  CHECK(c[0] == 3);
  CHECK(c[4] == 0);
  CHECK(VoteThreshold::sqrt_k().resolve(25) == 5);
  CHECK(VoteThreshold::sqrt_k().resolve(10) == 3);
  CHECK(VoteThreshold::sqrt_k().resolve(1) == 1);
  CHECK(VoteThreshold::parse("4").resolve(9) == 4);
  CHECK_THROWS_AS(VoteThreshold::parse("0"), Error);
}

TEST_CASE("aggregate examples") {
  EstimatorResult a, b;
  a.beta = Vector::Zero(3);
  b.beta = Vector::Zero(3);
  a.beta[0] = 1.0;
  a.beta[2] = 4.0;
  b.beta[2] = 2.0;
  const Vector m = aggregate({a, b}, {0, 2}, 2);
  CHECK(m[0] == 0.5);
  CHECK(m[1] == 0.0);
  CHECK(m[2] == 3.0);
  CHECK(aggregate({a}, {0, 2}, 1) == a.beta);
  CHECK(aggregate({a, a}, {0, 2}, 2) == a.beta);
  EstimatorResult c;
  c.beta = Vector::Zero(4);
  CHECK_THROWS_AS(aggregate({a, c}, {0}, 2), Error);
}

TEST_CASE("plan validation") {
  AggregationPlan p;
  p.K = 4;
  p.w = VoteThreshold::fixed(5);
  CHECK_THROWS_AS(p.validate(), Error);
  p.K = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("K = 1 reproduces the full-data fit exactly") {
  const SurvivalDataset d = generate_dataset(GenerationSpec::simulation_default(300, 8, 3), 10.0);
  const IpcwWeights w = ipcw_weights(d, fit_censoring_km(d));
  for (const auto& loss : {LossKind::median(), LossKind::expectile(0.3), LossKind::quantile(0.4)}) {
    FitConfig cfg;
    cfg.loss = loss;
    cfg.lambda = 6.0;
    const auto u = fit_unpenalized(d, w, loss, cfg);
    const auto full = fit_adaptive_lasso(d, w, cfg, u.beta);
    AggregationPlan plan;
    plan.per_group_tuning = false;
    const auto agg = fit_aggregated(d, plan, cfg);
    CHECK((agg.beta_check - full.beta).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(agg.voted_support == full.support);

    plan.per_group_tuning = true;
    const auto path = select_lambda(d, w, cfg, BicConfig{}, 1);
    const auto tuned = fit_aggregated(d, plan, cfg, BicConfig{}, 2);
    CHECK((tuned.beta_check - path.best().beta).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("aggregated fit invariants") {
  const SurvivalDataset d = generate_dataset(GenerationSpec::simulation_default(2003, 10, 4), 10.0);
  FitConfig cfg;
  cfg.loss = LossKind::expectile(0.25);
  AggregationPlan plan;
  plan.K = 5;
  const auto r1 = fit_aggregated(d, plan, cfg, BicConfig{}, 1);
  const auto r3 = fit_aggregated(d, plan, cfg, BicConfig{}, 3);
  CHECK(r1.beta_check == r3.beta_check);
  CHECK(r1.w == 2);
  CHECK(r1.n_used == 2000);
  CHECK_FALSE(r1.warning.empty());
  CHECK(nonzero_support(r1.beta_check) == r1.voted_support);
  REQUIRE(r1.group_results.size() == 5);
  for (Eigen::Index j = 0; j < 10; ++j) {
    int votes = 0;
    double sum = 0.0;
    for (const auto& g : r1.group_results) {
      votes += g.beta[j] != 0.0;
      sum += g.beta[j];
    }
    CHECK(votes == r1.vote_counts[j]);
    if (votes >= r1.w) {
      CHECK(r1.beta_check[j] == doctest::Approx(sum / 5.0).epsilon(1e-14));
    } else {
      CHECK(r1.beta_check[j] == 0.0);
    }
  }
  plan.km_scope = KmScope::Global;
  const auto g = fit_aggregated(d, plan, cfg, BicConfig{}, 1);
  CHECK(g.voted_support.size() >= 2);
}

TEST_CASE("group event fractions stay near the global fraction") {
  const SurvivalDataset d = generate_dataset(GenerationSpec::simulation_default(10000, 2, 9), 10.0);
  const double global = static_cast<double>(d.events()) / d.n();
  const auto split = interleaved_split(d.n(), 10);
  for (const auto& rows : split.groups) {
    double ev = 0.0;
    for (int i : rows) ev += d.delta()[i];
    CHECK(std::abs(ev / rows.size() - global) < 0.05);
  }
}

TEST_CASE("a failing group aborts the fit") {
  // Group 2 (odd rows) holds only censored observations.
  Matrix x = Matrix::Random(8, 2);
  Vector y = Vector::LinSpaced(8, 1.0, 8.0);
  IntVector delta(8);
  delta << 1, 0, 1, 0, 1, 0, 1, 0;
  const SurvivalDataset d(y, delta, x);
  AggregationPlan plan;
  plan.K = 2;
  plan.w = VoteThreshold::fixed(1);
  FitConfig cfg;
  CHECK_THROWS_AS(fit_aggregated(d, plan, cfg), Error);
}
