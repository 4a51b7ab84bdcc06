#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tieopt/network.hpp"
#include "tieopt/regional.hpp"

namespace tieopt {

struct PointMass {
  double value = 0.0;
};

struct NormalDist {
  double mean = 0.0;
  double std = 0.0;
};

/// Joint discrete distribution over a bus group: outcome k produces
/// values[k][j] MW at the group's j-th bus with probability probs[k].
struct DiscreteDist {
  std::vector<std::vector<double>> values;
  std::vector<double> probs;
};

using Distribution = std::variant<PointMass, NormalDist, DiscreteDist>;

/// A stochastic injection (wind or load deviation) entering the dispatch as
/// negative load at its buses. PointMass/Normal apply to a single bus;
/// Discrete may move a whole bus group jointly.
struct StochasticInjection {
  int region = 0;
  std::vector<BusId> buses;
  Distribution distribution;
};

/// Injections are independent across entries; regions never share an entry.
struct Forecast {
  std::vector<StochasticInjection> injections;

  bool has_region(int region) const;
};

struct Scenario {
  std::vector<std::pair<BusId, double>> injections;  // MW produced per bus
  double weight = 0.0;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::string provenance;  // "exact-discrete", "gauss-hermite(n)", "monte-carlo(n,seed)"
};

struct QuadratureRule {
  int gh_order = 11;
  int scenario_cap = 1024;
  bool monte_carlo_fallback = true;
  int mc_samples = 50000;
  std::uint64_t mc_seed = 20240801;
};

/// Nodes and weights for E[f(X)], X ~ N(0,1): sum_i w_i f(x_i) integrates
/// polynomials of degree <= 2n-1 exactly. Weights sum to 1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n);

/// Reduce a forecast to a weighted scenario set. Discrete entries pass
/// through exactly, Normal entries use Gauss-Hermite of rule.gh_order,
/// independent entries combine by tensor product up to rule.scenario_cap,
/// beyond which seeded Monte Carlo takes over (or UnsupportedCombination is
/// thrown when disabled).
ScenarioSet discretize_forecast(const Forecast& forecast, const QuadratureRule& rule = {});

/// Weighted sum of per-scenario values. Throws DimensionMismatch.
double expect(const ScenarioSet& set, std::span<const double> values);

/// Replace every distribution by a point mass at its mean.
Forecast certainty_equivalent(const Forecast& forecast);

/// Restrict a scenario set to the buses of one region, merging scenarios
/// that coincide there. Keeps per-region expectations exact while avoiding
/// redundant dispatch solves.
ScenarioSet restrict_to_region(const ScenarioSet& set, const RegionalModel& model);

/// Realized load vector: base load minus scenario injections at model buses.
Eigen::VectorXd apply_scenario(const RegionalModel& model, const Scenario& scenario);

}  // namespace tieopt
