#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tieopt/dispatch.hpp"
#include "tieopt/forecast.hpp"
#include "tieopt/regional.hpp"

namespace tieopt {

/// Piecewise-linear proxy-bus price curve over the interchange level.
/// Region-1 curves are nondecreasing, region-2 curves nonincreasing;
/// construction records the worst violation for the test suite.
struct PriceCurve {
  int region = 0;
  std::string role;              // "deterministic" or "expected"
  std::vector<double> q;         // strictly increasing sample points
  std::vector<double> price;     // $/MWh at each sample
  std::vector<bool> degenerate;  // per-sample dual-degeneracy annotation
  double q_lo = 0.0, q_hi = 0.0; // validity domain
  double monotonicity_violation = 0.0;

  /// Piecewise-linear interpolation; exact at samples. Throws OutOfDomain.
  double value(double at) const;
  bool contains(double at) const { return at >= q_lo && at <= q_hi; }
};

struct GridSpec {
  int points = 201;          // uniform samples before refinement
  double price_tol = 1e-3;   // $/MWh cap on interpolation error
  double min_spacing = 1e-6; // MW floor for refinement (jump guard)
  int max_points = 20000;
  /// Optional window intersected with the detected feasible domain
  /// (typically the case's interface interval).
  std::optional<std::pair<double, double>> window;
};

/// Feasible interchange interval of one region's dispatch at load d, located
/// by bisection on the infeasibility boundary inside [lo_hint, hi_hint].
/// Throws EmptyDomain when no feasible q exists in the hint interval.
std::pair<double, double> feasible_interval(const RegionalModel& model,
                                            const Eigen::VectorXd& d,
                                            double lo_hint, double hi_hint);

/// Deterministic proxy-price curve pi(q) at fixed load, sampled on the grid
/// with warm-started solves and adaptive midpoint refinement.
PriceCurve price_curve(const RegionalModel& model, const Eigen::VectorXd& d,
                       const GridSpec& grid = {});

/// Expected curve E[pi(q, d)] over a scenario set; defined on the
/// intersection of all per-scenario feasible domains.
PriceCurve expected_price_curve(const RegionalModel& model, const ScenarioSet& scenarios,
                                const GridSpec& grid = {});

/// Convenience overload: discretize the forecast (restricted to the model's
/// region) and build the expected curve.
PriceCurve expected_price_curve(const RegionalModel& model, const Forecast& forecast,
                                const QuadratureRule& rule = {}, const GridSpec& grid = {});

/// Free-function form of PriceCurve::value.
double curve_value(const PriceCurve& curve, double at);

}  // namespace tieopt
