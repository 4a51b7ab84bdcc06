#include "tieopt/curves.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tieopt/errors.hpp"

namespace tieopt {

double PriceCurve::value(double at) const {
  if (q.empty()) throw OutOfDomain("empty curve");
  const double pad = 1e-9 * std::max(1.0, std::abs(q_hi) + std::abs(q_lo));
  if (at < q_lo - pad || at > q_hi + pad)
    throw OutOfDomain("q = " + std::to_string(at) + " outside curve domain [" +
                      std::to_string(q_lo) + ", " + std::to_string(q_hi) + "]");
  at = std::clamp(at, q.front(), q.back());
  auto it = std::upper_bound(q.begin(), q.end(), at);
  if (it == q.begin()) return price.front();
  if (it == q.end()) return price.back();
  size_t hi = it - q.begin();
  size_t lo = hi - 1;
  double w = (at - q[lo]) / (q[hi] - q[lo]);
  return price[lo] + w * (price[hi] - price[lo]);
}

double curve_value(const PriceCurve& curve, double at) { return curve.value(at); }

namespace {

// Balance-only interchange bounds (box constraints alone), used to make the
// search interval finite before bisection on the full dispatch problem.
std::pair<double, double> balance_bounds(const RegionalModel& model, const Eigen::VectorXd& d) {
  double gmin = 0.0, gmax = 0.0;
  for (const Generator& g : model.generators) {
    gmin += g.g_min;
    gmax += g.g_max;
  }
  double load = d.sum();
  if (model.sign > 0) return {gmin - load, gmax - load};
  return {load - gmax, load - gmin};
}

}  // namespace

std::pair<double, double> feasible_interval(const RegionalModel& model,
                                            const Eigen::VectorXd& d, double lo_hint,
                                            double hi_hint) {
  auto [b_lo, b_hi] = balance_bounds(model, d);
  double lo = std::max(lo_hint, b_lo);
  double hi = std::min(hi_hint, b_hi);
  if (!std::isfinite(lo)) lo = -1e6;
  if (!std::isfinite(hi)) hi = 1e6;
  if (lo > hi) throw EmptyDomain("region " + std::to_string(model.region) +
                                 ": no interchange satisfies the power balance");

  auto feasible = [&](double q) { return regional_dispatch_feasible(model, q, d); };

  // Find one feasible point; the feasible set in q is an interval.
  double seed = std::numeric_limits<double>::quiet_NaN();
  const int probes = 33;
  for (int k = 0; k < probes; ++k) {
    double q = probes == 1 ? lo : lo + (hi - lo) * k / (probes - 1);
    if (feasible(q)) {
      seed = q;
      break;
    }
  }
  if (std::isnan(seed))
    throw EmptyDomain("region " + std::to_string(model.region) +
                      ": no feasible interchange found in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");

  const double tol = std::max(1e-7, 1e-12 * (hi - lo));
  auto bisect = [&](double bad, double good) {
    // invariant: feasible(good), !feasible(bad)
    while (std::abs(good - bad) > tol) {
      double mid = 0.5 * (good + bad);
      if (feasible(mid))
        good = mid;
      else
        bad = mid;
    }
    return good;
  };

  double left = feasible(lo) ? lo : bisect(lo, seed);
  double right = feasible(hi) ? hi : bisect(hi, seed);
  return {left, right};
}

namespace {

struct SweepContext {
  const RegionalModel& model;
  std::vector<Eigen::VectorXd> loads;
  std::vector<double> weights;
  std::vector<std::vector<int>> warm;

  double price_at(double q, bool& degenerate) {
    double acc = 0.0;
    for (size_t k = 0; k < loads.size(); ++k) {
      DispatchOptions opt;
      opt.warm_start = warm[k];
      DispatchSolution sol = solve_regional_dispatch(model, q, loads[k], opt);
      warm[k] = sol.active_set;
      degenerate = degenerate || sol.degenerate;
      acc += weights[k] * proxy_price(sol, model);
    }
    return acc;
  }
};

PriceCurve build_curve(SweepContext& ctx, const std::string& role, const GridSpec& grid) {
  const RegionalModel& model = ctx.model;

  double lo_hint = -kUnlimited, hi_hint = kUnlimited;
  if (grid.window) {
    lo_hint = grid.window->first;
    hi_hint = grid.window->second;
  }

  // Common feasible domain: intersection over scenarios.
  double q_lo = lo_hint, q_hi = hi_hint;
  bool first = true;
  for (const Eigen::VectorXd& d : ctx.loads) {
    auto [lo, hi] = feasible_interval(model, d, lo_hint, hi_hint);
    if (first) {
      q_lo = lo;
      q_hi = hi;
      first = false;
    } else {
      q_lo = std::max(q_lo, lo);
      q_hi = std::min(q_hi, hi);
    }
  }
  if (q_lo > q_hi)
    throw EmptyDomain("region " + std::to_string(model.region) +
                      ": scenario feasible domains do not intersect");

  PriceCurve curve;
  curve.region = model.region;
  curve.role = role;
  curve.q_lo = q_lo;
  curve.q_hi = q_hi;

  std::map<double, std::pair<double, bool>> samples;  // q -> (price, degenerate)
  auto eval = [&](double q) {
    bool degen = false;
    double p = ctx.price_at(q, degen);
    samples[q] = {p, degen};
    return p;
  };

  int points = std::max(2, grid.points);
  if (q_hi == q_lo) {
    eval(q_lo);
  } else {
    for (int k = 0; k < points; ++k) eval(q_lo + (q_hi - q_lo) * k / (points - 1));

    // midpoint refinement until linear interpolation is accurate to price_tol
    struct Seg {
      double ql, pl, qh, ph;
    };
    std::vector<Seg> work;
    auto it = samples.begin();
    for (auto next = std::next(it); next != samples.end(); ++it, ++next)
      work.push_back({it->first, it->second.first, next->first, next->second.first});
    while (!work.empty() && static_cast<int>(samples.size()) < grid.max_points) {
      Seg s = work.back();
      work.pop_back();
      if (s.qh - s.ql <= grid.min_spacing) continue;
      double qm = 0.5 * (s.ql + s.qh);
      bool degen = false;
      double pm = ctx.price_at(qm, degen);
      if (std::abs(pm - 0.5 * (s.pl + s.ph)) <= grid.price_tol) continue;
      samples[qm] = {pm, degen};
      work.push_back({s.ql, s.pl, qm, pm});
      work.push_back({qm, pm, s.qh, s.ph});
    }
  }

  for (const auto& [q, entry] : samples) {
    curve.q.push_back(q);
    curve.price.push_back(entry.first);
    curve.degenerate.push_back(entry.second);
  }

  double violation = 0.0;
  for (size_t k = 1; k < curve.q.size(); ++k) {
    double step = (curve.price[k] - curve.price[k - 1]) * model.sign;
    violation = std::max(violation, -step);
  }
  curve.monotonicity_violation = violation;
  return curve;
}

}  // namespace

PriceCurve price_curve(const RegionalModel& model, const Eigen::VectorXd& d,
                       const GridSpec& grid) {
  SweepContext ctx{model, {d}, {1.0}, {{}}};
  return build_curve(ctx, "deterministic", grid);
}

PriceCurve expected_price_curve(const RegionalModel& model, const ScenarioSet& scenarios,
                                const GridSpec& grid) {
  ScenarioSet regional = restrict_to_region(scenarios, model);
  if (regional.scenarios.empty()) throw EmptyDomain("empty scenario set");
  SweepContext ctx{model, {}, {}, {}};
  for (const Scenario& s : regional.scenarios) {
    ctx.loads.push_back(apply_scenario(model, s));
    ctx.weights.push_back(s.weight);
    ctx.warm.emplace_back();
  }
  return build_curve(ctx, "expected", grid);
}

PriceCurve expected_price_curve(const RegionalModel& model, const Forecast& forecast,
                                const QuadratureRule& rule, const GridSpec& grid) {
  return expected_price_curve(model, discretize_forecast(forecast, rule), grid);
}

}  // namespace tieopt
