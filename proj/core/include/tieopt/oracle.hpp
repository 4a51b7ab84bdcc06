#pragma once

#include <optional>
#include <vector>

#include "tieopt/dispatch.hpp"
#include "tieopt/forecast.hpp"
#include "tieopt/network.hpp"

namespace tieopt {

/// Brute-force scan of the expected total cost J(q). Deliberately shares no
/// code with the schedulers beyond the dispatch solver, so agreement between
/// argmin(J) and the curve-intersection schedule is a real cross-check.
struct CostScan {
  std::vector<double> q;
  std::vector<double> expected_cost;  // $/h
  std::vector<double> expected_gap;   // E[pi_2] - E[pi_1] at each q
  double argmin_q = 0.0;
  int argmin_index = -1;
  double shrunk_lo = 0.0, shrunk_hi = 0.0;  // domain after infeasibility shrink
  int infeasible_points_dropped = 0;
};

struct ScanOptions {
  double coarse_step = 1.0;   // MW
  double fine_step = 0.1;     // MW
  double fine_window = 5.0;   // MW around the coarse argmin
  QuadratureRule rule;
};

/// Scenario-weighted sum of both regions' optimal dispatch costs at q.
/// Throws InfeasibleScenario naming the first infeasible scenario.
double expected_total_cost(const Network& network, const Forecast& forecast, double q,
                           const QuadratureRule& rule = {});

/// J(q) over a coarse grid on [lo, min(hi, Q)] refined around the argmin;
/// also records the expected price gap per point. Infeasible grid points
/// shrink the scanned domain with a count in the result.
CostScan grid_search_schedule(const Network& network, const Forecast& forecast,
                              double q_lo, double q_hi, double q_max,
                              const ScanOptions& options = {});

struct EnvelopeReport {
  double q = 0.0;
  double eps = 0.0;
  double fd_value = 0.0;        // central difference of expected optimal cost
  double expected_price = 0.0;  // sign-adjusted E[pi_i(q)]
  double abs_error = 0.0;
  bool near_breakpoint = false; // active set changed across [q-eps, q+eps]
};

/// Check d/dq E[c_i*(q)] = sign_i * E[pi_i(q)] by central differences.
/// Throws OutOfDomain when q +- eps leaves any scenario's feasible domain.
EnvelopeReport envelope_check(const RegionalModel& model, const ScenarioSet& scenarios,
                              double q, double eps);

}  // namespace tieopt
