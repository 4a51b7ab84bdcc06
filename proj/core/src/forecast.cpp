#include "tieopt/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tieopt/errors.hpp"

namespace tieopt {

bool Forecast::has_region(int region) const {
  return std::any_of(injections.begin(), injections.end(),
                     [&](const StochasticInjection& s) { return s.region == region; });
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  if (n < 1) throw ValidationError("quadrature order must be >= 1");
  if (n == 1) {
    return {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  }
  // Golub-Welsch on the probabilists' Hermite recurrence: nodes/weights for
  // integration against the standard normal density.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub);
  if (es.info() != Eigen::Success) throw NumericalFailure("quadrature eigensolve failed");
  Eigen::VectorXd nodes = es.eigenvalues();
  Eigen::VectorXd weights(n);
  for (int k = 0; k < n; ++k) {
    double v0 = es.eigenvectors()(0, k);
    weights(k) = v0 * v0;
  }
  weights /= weights.sum();
  return {nodes, weights};
}

namespace {

struct EntryOutcomes {
  const StochasticInjection* entry;
  std::vector<std::vector<double>> values;  // per outcome, per bus of the entry
  std::vector<double> weights;
};

void check_entry(const StochasticInjection& entry) {
  if (entry.buses.empty()) throw ValidationError("stochastic injection without buses");
  if (std::holds_alternative<DiscreteDist>(entry.distribution)) {
    const auto& d = std::get<DiscreteDist>(entry.distribution);
    if (d.values.size() != d.probs.size())
      throw ValidationError("discrete distribution: values/probs size mismatch");
    if (d.values.empty()) throw ValidationError("discrete distribution with no outcomes");
    double sum = 0.0;
    for (double p : d.probs) {
      if (!(p > 0.0)) throw ValidationError("discrete probabilities must be positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("discrete probabilities must sum to 1");
    for (const auto& v : d.values)
      if (v.size() != entry.buses.size())
        throw ValidationError("discrete outcome size does not match bus group");
  } else {
    if (entry.buses.size() != 1)
      throw ValidationError("point/normal injections apply to a single bus");
    if (std::holds_alternative<NormalDist>(entry.distribution)) {
      if (std::get<NormalDist>(entry.distribution).std < 0.0)
        throw ValidationError("normal distribution std must be >= 0");
    }
  }
}

EntryOutcomes expand_entry(const StochasticInjection& entry, const QuadratureRule& rule) {
  EntryOutcomes out;
  out.entry = &entry;
  if (std::holds_alternative<PointMass>(entry.distribution)) {
    out.values = {{std::get<PointMass>(entry.distribution).value}};
    out.weights = {1.0};
  } else if (std::holds_alternative<NormalDist>(entry.distribution)) {
    const auto& nd = std::get<NormalDist>(entry.distribution);
    if (nd.std == 0.0) {
      out.values = {{nd.mean}};
      out.weights = {1.0};
    } else {
      auto [nodes, weights] = gauss_hermite(rule.gh_order);
      for (int k = 0; k < nodes.size(); ++k) {
        out.values.push_back({nd.mean + nd.std * nodes(k)});
        out.weights.push_back(weights(k));
      }
    }
  } else {
    const auto& d = std::get<DiscreteDist>(entry.distribution);
    out.values = d.values;
    out.weights = d.probs;
  }
  return out;
}

ScenarioSet monte_carlo(const std::vector<const StochasticInjection*>& entries,
                        const QuadratureRule& rule) {
  std::mt19937_64 rng(rule.mc_seed);
  ScenarioSet set;
  set.provenance =
      "monte-carlo(" + std::to_string(rule.mc_samples) + "," + std::to_string(rule.mc_seed) + ")";
  set.scenarios.reserve(rule.mc_samples);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < rule.mc_samples; ++s) {
    Scenario scen;
    scen.weight = 1.0 / rule.mc_samples;
    for (const StochasticInjection* entry : entries) {
      if (std::holds_alternative<PointMass>(entry->distribution)) {
        scen.injections.emplace_back(entry->buses[0],
                                     std::get<PointMass>(entry->distribution).value);
      } else if (std::holds_alternative<NormalDist>(entry->distribution)) {
        const auto& nd = std::get<NormalDist>(entry->distribution);
        scen.injections.emplace_back(entry->buses[0], nd.mean + nd.std * gauss(rng));
      } else {
        const auto& d = std::get<DiscreteDist>(entry->distribution);
        double u = unif(rng), acc = 0.0;
        size_t pick = d.values.size() - 1;
        for (size_t k = 0; k < d.probs.size(); ++k) {
          acc += d.probs[k];
          if (u <= acc) {
            pick = k;
            break;
          }
        }
        for (size_t j = 0; j < entry->buses.size(); ++j)
          scen.injections.emplace_back(entry->buses[j], d.values[pick][j]);
      }
    }
    set.scenarios.push_back(std::move(scen));
  }
  return set;
}

}  // namespace

ScenarioSet discretize_forecast(const Forecast& forecast, const QuadratureRule& rule) {
  std::vector<const StochasticInjection*> entries;
  for (const StochasticInjection& e : forecast.injections) {
    check_entry(e);
    entries.push_back(&e);
  }

  if (entries.empty()) {
    ScenarioSet set;
    set.provenance = "exact-discrete";
    set.scenarios.push_back(Scenario{{}, 1.0});
    return set;
  }

  std::vector<EntryOutcomes> expanded;
  bool any_normal = false;
  long long combinations = 1;
  for (const StochasticInjection* e : entries) {
    expanded.push_back(expand_entry(*e, rule));
    if (std::holds_alternative<NormalDist>(e->distribution) &&
        std::get<NormalDist>(e->distribution).std > 0.0)
      any_normal = true;
    combinations *= static_cast<long long>(expanded.back().values.size());
    if (combinations > rule.scenario_cap) {
      if (!rule.monte_carlo_fallback)
        throw UnsupportedCombination("scenario tensor product exceeds cap of " +
                                     std::to_string(rule.scenario_cap));
      return monte_carlo(entries, rule);
    }
  }

  ScenarioSet set;
  set.provenance =
      any_normal ? "gauss-hermite(" + std::to_string(rule.gh_order) + ")" : "exact-discrete";
  std::vector<size_t> index(expanded.size(), 0);
  while (true) {
    Scenario scen;
    scen.weight = 1.0;
    for (size_t e = 0; e < expanded.size(); ++e) {
      const EntryOutcomes& eo = expanded[e];
      scen.weight *= eo.weights[index[e]];
      for (size_t j = 0; j < eo.entry->buses.size(); ++j)
        scen.injections.emplace_back(eo.entry->buses[j], eo.values[index[e]][j]);
    }
    set.scenarios.push_back(std::move(scen));
    size_t e = 0;
    while (e < expanded.size() && ++index[e] == expanded[e].values.size()) {
      index[e] = 0;
      ++e;
    }
    if (e == expanded.size()) break;
  }

  double total = 0.0;
  for (const Scenario& s : set.scenarios) total += s.weight;
  for (Scenario& s : set.scenarios) s.weight /= total;
  return set;
}

double expect(const ScenarioSet& set, std::span<const double> values) {
  if (values.size() != set.scenarios.size())
    throw DimensionMismatch("value count does not match scenario count");
  double acc = 0.0;
  for (size_t k = 0; k < values.size(); ++k) acc += set.scenarios[k].weight * values[k];
  return acc;
}

Forecast certainty_equivalent(const Forecast& forecast) {
  Forecast out;
  for (const StochasticInjection& e : forecast.injections) {
    StochasticInjection ce = e;
    if (std::holds_alternative<NormalDist>(e.distribution)) {
      ce.distribution = PointMass{std::get<NormalDist>(e.distribution).mean};
    } else if (std::holds_alternative<DiscreteDist>(e.distribution)) {
      const auto& d = std::get<DiscreteDist>(e.distribution);
      std::vector<double> mean(e.buses.size(), 0.0);
      for (size_t k = 0; k < d.values.size(); ++k)
        for (size_t j = 0; j < mean.size(); ++j) mean[j] += d.probs[k] * d.values[k][j];
      if (e.buses.size() == 1)
        ce.distribution = PointMass{mean[0]};
      else
        ce.distribution = DiscreteDist{{mean}, {1.0}};
    }
    out.injections.push_back(std::move(ce));
  }
  return out;
}

ScenarioSet restrict_to_region(const ScenarioSet& set, const RegionalModel& model) {
  ScenarioSet out;
  out.provenance = set.provenance;
  for (const Scenario& s : set.scenarios) {
    Scenario r;
    r.weight = s.weight;
    for (const auto& [bus, mw] : s.injections) {
      if (std::find(model.bus_ids.begin(), model.bus_ids.end(), bus) != model.bus_ids.end())
        r.injections.emplace_back(bus, mw);
    }
    auto same = [&](const Scenario& a) { return a.injections == r.injections; };
    auto it = std::find_if(out.scenarios.begin(), out.scenarios.end(), same);
    if (it != out.scenarios.end())
      it->weight += r.weight;
    else
      out.scenarios.push_back(std::move(r));
  }
  return out;
}

Eigen::VectorXd apply_scenario(const RegionalModel& model, const Scenario& scenario) {
  Eigen::VectorXd d = model.base_load;
  for (const auto& [bus, mw] : scenario.injections) {
    auto it = std::find(model.bus_ids.begin(), model.bus_ids.end(), bus);
    if (it != model.bus_ids.end()) d(it - model.bus_ids.begin()) -= mw;
  }
  return d;
}

}  // namespace tieopt
