#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tieopt/network.hpp"
#include "tieopt/qp.hpp"
#include "tieopt/regional.hpp"

namespace tieopt {

/// Optimal regional dispatch at a fixed interchange level and load.
/// balance_price is the cost of serving one more MW of load measured at the
/// region's reference bus; line_duals is the net congestion dual per
/// monitored line (upper-limit dual minus lower-limit dual, so its sign
/// carries the binding direction).
struct DispatchSolution {
  int region = 0;
  double q = 0.0;
  Eigen::VectorXd load;
  Eigen::VectorXd dispatch;
  double balance_price = 0.0;
  Eigen::VectorXd line_duals;
  Eigen::VectorXd flows;
  double cost = 0.0;
  bool degenerate = false;
  std::vector<int> active_set;  // warm-start key for the next solve
};

struct DispatchOptions {
  double feas_tol = 1e-8;
  double stat_tol = 1e-8;
  std::vector<int> warm_start;
};

/// Solve the region's dispatch problem for (q, d): minimize generation cost
/// subject to the regional power balance, two-sided monitored-line limits and
/// generator boxes. Throws InfeasibleDispatch when no dispatch exists at this
/// q (a curve-domain boundary), NumericalFailure on solver breakdown.
DispatchSolution solve_regional_dispatch(const RegionalModel& model, double q,
                                         const Eigen::VectorXd& d,
                                         const DispatchOptions& options = {});

/// Feasibility probe: true iff solve_regional_dispatch would succeed.
bool regional_dispatch_feasible(const RegionalModel& model, double q,
                                const Eigen::VectorXd& d);

/// Locational marginal price at the region's proxy bus: the incremental
/// dispatch cost of one additional MW of interchange,
///   pi = lambda + s_q' mu.
double proxy_price(const DispatchSolution& solution, const RegionalModel& model);

/// Joint optimum over (g1, g2, q) with both regions' constraints and the
/// interface bound q_min <= q <= Q.
struct JointSolution {
  double q = 0.0;
  double interface_dual = 0.0;  // mu_q, dual of q <= Q
  DispatchSolution region1;
  DispatchSolution region2;
  double total_cost = 0.0;
};

struct CentralizedOptions {
  double feas_tol = 1e-8;
  double stat_tol = 1e-8;
  double q_max_override = kUnlimited;  // effective Q = min(network, override)
};

/// Single-coordinator benchmark: optimize the interchange and both regions'
/// dispatch together. Throws InfeasibleDispatch when no (g1, g2, q) is
/// feasible.
JointSolution solve_centralized(const Network& network, const Eigen::VectorXd& d1,
                                const Eigen::VectorXd& d2,
                                const CentralizedOptions& options = {});

}  // namespace tieopt
