#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "tieopt/errors.hpp"
#include "tieopt/forecast.hpp"

using namespace tieopt;

namespace {

Forecast normal_at_bus1(double mean, double std) {
  Forecast f;
  f.injections.push_back({1, {1}, NormalDist{mean, std}});
  return f;
}

// exact standard normal moments E[X^k]
double normal_moment(int k) {
  if (k % 2 == 1) return 0.0;
  double v = 1.0;
  for (int i = k - 1; i > 1; i -= 2) v *= i;
  return v;
}

}  // namespace

TEST_CASE("order-3 rule has the closed-form nodes and weights") {
  auto [nodes, weights] = gauss_hermite(3);
  CHECK(nodes(0) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
  CHECK(nodes(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(nodes(2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(weights(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(weights(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(weights(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("order-n rule integrates polynomials up to degree 2n-1 exactly") {
  for (int n : {3, 5, 11}) {
    auto [nodes, weights] = gauss_hermite(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0.0, magnitude = 1.0;
      for (int i = 0; i < n; ++i) {
        acc += weights(i) * std::pow(nodes(i), k);
        magnitude += weights(i) * std::pow(std::abs(nodes(i)), k);
      }
      CHECK(std::abs(acc - normal_moment(k)) <= 1e-12 * magnitude);
    }
  }
}

TEST_CASE("normal forecast discretizes to transformed nodes") {
  QuadratureRule rule;
  rule.gh_order = 3;
  ScenarioSet set = discretize_forecast(normal_at_bus1(55.0, 10.0), rule);
  REQUIRE(set.scenarios.size() == 3);
  CHECK(set.provenance == "gauss-hermite(3)");
  CHECK(set.scenarios[0].injections[0].second ==
        doctest::Approx(55.0 - 10.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(set.scenarios[1].injections[0].second == doctest::Approx(55.0).epsilon(1e-12));
  CHECK(set.scenarios[2].injections[0].second ==
        doctest::Approx(55.0 + 10.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(set.scenarios[0].weight == doctest::Approx(1.0 / 6.0));
  CHECK(set.scenarios[1].weight == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero-sigma normal degenerates to a point mass") {
  ScenarioSet set = discretize_forecast(normal_at_bus1(55.0, 0.0));
  REQUIRE(set.scenarios.size() == 1);
  CHECK(set.scenarios[0].injections[0].second == 55.0);
  CHECK(set.scenarios[0].weight == 1.0);
}

TEST_CASE("joint discrete wind levels pass through exactly") {
  Forecast f;
  f.injections.push_back({1, {6}, DiscreteDist{{{10.0}, {100.0}}, {0.5, 0.5}}});
  f.injections.push_back(
      {2, {42, 60}, DiscreteDist{{{10.0, 10.0}, {200.0, 200.0}}, {0.5, 0.5}}});
  ScenarioSet set = discretize_forecast(f);
  CHECK(set.provenance == "exact-discrete");
  REQUIRE(set.scenarios.size() == 4);  // independent regions combine
  double total = 0.0;
  for (const Scenario& s : set.scenarios) {
    total += s.weight;
    REQUIRE(s.injections.size() == 3);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expectation is the weighted sum") {
  Forecast f;
  f.injections.push_back({1, {1}, DiscreteDist{{{0.0}, {1.0}}, {0.5, 0.5}}});
  ScenarioSet set = discretize_forecast(f);
  std::vector<double> values{10.0, 20.0};
  CHECK(expect(set, values) == doctest::Approx(15.0));
  std::vector<double> constant{7.5, 7.5};
  CHECK(expect(set, constant) == doctest::Approx(7.5));
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(expect(set, wrong), DimensionMismatch);
}

TEST_CASE("order-11 rule is exact on affine functions of the wind") {
  QuadratureRule rule;  // default order 11
  ScenarioSet set = discretize_forecast(normal_at_bus1(55.0, 10.0), rule);
  std::vector<double> values;
  for (const Scenario& s : set.scenarios) values.push_back(3.0 * s.injections[0].second - 7.0);
  CHECK(expect(set, values) == doctest::Approx(3.0 * 55.0 - 7.0).epsilon(1e-9));
}

TEST_CASE("certainty equivalent collapses every distribution to its mean") {
  Forecast f;
  f.injections.push_back({1, {1}, NormalDist{55.0, 10.0}});
  f.injections.push_back({2, {42, 60}, DiscreteDist{{{10.0, 10.0}, {200.0, 200.0}}, {0.1, 0.9}}});
  Forecast ce = certainty_equivalent(f);
  REQUIRE(std::holds_alternative<PointMass>(ce.injections[0].distribution));
  CHECK(std::get<PointMass>(ce.injections[0].distribution).value == 55.0);
  const auto& d = std::get<DiscreteDist>(ce.injections[1].distribution);
  REQUIRE(d.values.size() == 1);
  CHECK(d.values[0][0] == doctest::Approx(181.0));  // 0.1*10 + 0.9*200
  CHECK(d.values[0][1] == doctest::Approx(181.0));
  ScenarioSet set = discretize_forecast(ce);
  CHECK(set.scenarios.size() == 1);
}

TEST_CASE("monte carlo fallback is seeded and reproducible") {
  Forecast f;
  for (BusId b = 1; b <= 11; ++b)
    f.injections.push_back({1, {b}, DiscreteDist{{{0.0}, {1.0}}, {0.5, 0.5}}});
  QuadratureRule rule;
  rule.scenario_cap = 1024;  // 2^11 = 2048 exceeds the cap
  rule.mc_samples = 5000;
  ScenarioSet a = discretize_forecast(f, rule);
  ScenarioSet b = discretize_forecast(f, rule);
  REQUIRE(a.scenarios.size() == 5000);
  CHECK(a.provenance == "monte-carlo(5000," + std::to_string(rule.mc_seed) + ")");
  for (size_t k = 0; k < 100; ++k)
    CHECK(a.scenarios[k].injections == b.scenarios[k].injections);

  rule.monte_carlo_fallback = false;
  CHECK_THROWS_AS(discretize_forecast(f, rule), UnsupportedCombination);
}

TEST_CASE("invalid distributions are rejected") {
  Forecast f;
  f.injections.push_back({1, {1}, DiscreteDist{{{1.0}, {2.0}}, {0.6, 0.6}}});
  CHECK_THROWS_AS(discretize_forecast(f), ValidationError);
  Forecast g;
  g.injections.push_back({1, {1}, NormalDist{0.0, -1.0}});
  CHECK_THROWS_AS(discretize_forecast(g), ValidationError);
  Forecast h;
  h.injections.push_back({1, {1, 2}, DiscreteDist{{{1.0}}, {1.0}}});
  CHECK_THROWS_AS(discretize_forecast(h), ValidationError);
}

TEST_CASE("regional restriction merges duplicate scenarios") {
  Forecast f;
  f.injections.push_back({1, {1}, DiscreteDist{{{10.0}, {100.0}}, {0.3, 0.7}}});
  f.injections.push_back({2, {2}, DiscreteDist{{{1.0}, {2.0}}, {0.5, 0.5}}});
  ScenarioSet set = discretize_forecast(f);
  REQUIRE(set.scenarios.size() == 4);

  Network net = testsupport::two_bus();
  RegionalModel m1 = build_regional_view(net, 1);
  ScenarioSet r1 = restrict_to_region(set, m1);
  REQUIRE(r1.scenarios.size() == 2);  // region 2 outcomes collapse
  double w10 = 0.0, w100 = 0.0;
  for (const Scenario& s : r1.scenarios) {
    REQUIRE(s.injections.size() == 1);
    if (s.injections[0].second == 10.0) w10 = s.weight;
    if (s.injections[0].second == 100.0) w100 = s.weight;
  }
  CHECK(w10 == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(w100 == doctest::Approx(0.7).epsilon(1e-12));

  // wind enters as negative load
  Eigen::VectorXd d = apply_scenario(m1, r1.scenarios[0]);
  CHECK(d(0) == doctest::Approx(m1.base_load(0) - r1.scenarios[0].injections[0].second));
}
