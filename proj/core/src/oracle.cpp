#include "tieopt/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "tieopt/curves.hpp"
#include "tieopt/errors.hpp"

namespace tieopt {

namespace {

struct RegionEval {
  RegionalModel model;
  std::vector<Eigen::VectorXd> loads;
  std::vector<double> weights;
  std::vector<std::vector<int>> warm;

  void init(const Network& network, int region, const ScenarioSet& set) {
    model = build_regional_view(network, region);
    ScenarioSet regional = restrict_to_region(set, model);
    for (const Scenario& s : regional.scenarios) {
      loads.push_back(apply_scenario(model, s));
      weights.push_back(s.weight);
      warm.emplace_back();
    }
  }

  // expected cost and expected proxy price at q; throws InfeasibleDispatch
  std::pair<double, double> evaluate(double q) {
    double cost = 0.0, price = 0.0;
    for (size_t k = 0; k < loads.size(); ++k) {
      DispatchOptions opt;
      opt.warm_start = warm[k];
      DispatchSolution sol;
      try {
        sol = solve_regional_dispatch(model, q, loads[k], opt);
      } catch (const InfeasibleDispatch&) {
        throw InfeasibleScenario("region " + std::to_string(model.region) + " scenario " +
                                 std::to_string(k) + " infeasible at q = " +
                                 std::to_string(q));
      }
      warm[k] = sol.active_set;
      cost += weights[k] * sol.cost;
      price += weights[k] * proxy_price(sol, model);
    }
    return {cost, price};
  }
};

}  // namespace

double expected_total_cost(const Network& network, const Forecast& forecast, double q,
                           const QuadratureRule& rule) {
  ScenarioSet set = discretize_forecast(forecast, rule);
  RegionEval r1, r2;
  r1.init(network, 1, set);
  r2.init(network, 2, set);
  return r1.evaluate(q).first + r2.evaluate(q).first;
}

CostScan grid_search_schedule(const Network& network, const Forecast& forecast, double q_lo,
                              double q_hi, double q_max, const ScanOptions& options) {
  ScenarioSet set = discretize_forecast(forecast, options.rule);
  RegionEval r1, r2;
  r1.init(network, 1, set);
  r2.init(network, 2, set);

  CostScan scan;
  double hi = std::min(q_hi, q_max);
  if (q_lo > hi) throw EmptyDomain("scan interval is empty");

  auto eval_point = [&](double q, std::vector<double>& qs, std::vector<double>& costs,
                        std::vector<double>& gaps) {
    try {
      auto [c1, p1] = r1.evaluate(q);
      auto [c2, p2] = r2.evaluate(q);
      qs.push_back(q);
      costs.push_back(c1 + c2);
      gaps.push_back(p2 - p1);
      return true;
    } catch (const InfeasibleScenario&) {
      ++scan.infeasible_points_dropped;
      return false;
    }
  };

  std::vector<double> qs, costs, gaps;
  int steps = static_cast<int>(std::floor((hi - q_lo) / options.coarse_step)) + 1;
  for (int k = 0; k < steps; ++k) eval_point(q_lo + k * options.coarse_step, qs, costs, gaps);
  if (std::fmod(hi - q_lo, options.coarse_step) > 1e-9) eval_point(hi, qs, costs, gaps);
  if (qs.empty()) throw EmptyDomain("no feasible point in the scan interval");

  int coarse_arg = static_cast<int>(std::min_element(costs.begin(), costs.end()) - costs.begin());
  double center = qs[coarse_arg];
  double w_lo = std::max(qs.front(), center - options.fine_window);
  double w_hi = std::min(qs.back(), center + options.fine_window);
  int fine_steps = static_cast<int>(std::round((w_hi - w_lo) / options.fine_step));
  for (int k = 0; k <= fine_steps; ++k) {
    double q = w_lo + k * options.fine_step;
    if (q > w_hi + 1e-12) break;
    bool dup = false;
    for (double seen : qs)
      if (std::abs(seen - q) < 1e-12) dup = true;
    if (!dup) eval_point(q, qs, costs, gaps);
  }

  std::vector<size_t> order(qs.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return qs[a] < qs[b]; });
  for (size_t k : order) {
    scan.q.push_back(qs[k]);
    scan.expected_cost.push_back(costs[k]);
    scan.expected_gap.push_back(gaps[k]);
  }
  scan.argmin_index = static_cast<int>(
      std::min_element(scan.expected_cost.begin(), scan.expected_cost.end()) -
      scan.expected_cost.begin());
  scan.argmin_q = scan.q[scan.argmin_index];
  scan.shrunk_lo = scan.q.front();
  scan.shrunk_hi = scan.q.back();
  return scan;
}

EnvelopeReport envelope_check(const RegionalModel& model, const ScenarioSet& scenarios,
                              double q, double eps) {
  if (!(eps > 0.0)) throw ValidationError("envelope eps must be > 0");
  ScenarioSet regional = restrict_to_region(scenarios, model);

  auto expected = [&](double at, std::vector<std::vector<int>>* actives) {
    double cost = 0.0, price = 0.0;
    for (size_t k = 0; k < regional.scenarios.size(); ++k) {
      Eigen::VectorXd d = apply_scenario(model, regional.scenarios[k]);
      DispatchSolution sol;
      try {
        sol = solve_regional_dispatch(model, at, d);
      } catch (const InfeasibleDispatch&) {
        throw OutOfDomain("q = " + std::to_string(at) + " infeasible for scenario " +
                          std::to_string(k));
      }
      cost += regional.scenarios[k].weight * sol.cost;
      price += regional.scenarios[k].weight * proxy_price(sol, model);
      if (actives) actives->push_back(sol.active_set);
    }
    return std::make_pair(cost, price);
  };

  std::vector<std::vector<int>> act_minus, act_plus;
  auto [cost_minus, price_minus] = expected(q - eps, &act_minus);
  auto [cost_plus, price_plus] = expected(q + eps, &act_plus);
  auto [cost_mid, price_mid] = expected(q, nullptr);
  (void)cost_mid;
  (void)price_minus;
  (void)price_plus;

  EnvelopeReport report;
  report.q = q;
  report.eps = eps;
  report.fd_value = (cost_plus - cost_minus) / (2.0 * eps);
  report.expected_price = model.sign * price_mid;
  report.abs_error = std::abs(report.fd_value - report.expected_price);
  report.near_breakpoint = act_minus != act_plus;
  return report;
}

}  // namespace tieopt
