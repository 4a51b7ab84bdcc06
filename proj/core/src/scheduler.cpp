#include "tieopt/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tieopt/errors.hpp"

namespace tieopt {

std::string to_string(Direction direction) {
  switch (direction) {
    case Direction::Region1ToRegion2: return "1->2";
    case Direction::Region2ToRegion1: return "2->1";
    default: return "none";
  }
}

std::string to_string(ScheduleMethod method) {
  switch (method) {
    case ScheduleMethod::TO: return "TO";
    case ScheduleMethod::STO: return "STO";
    default: return "SCTS";
  }
}

double BidCurve::value(double at) const {
  if (cum_quantity.empty() || at >= total_quantity())
    return std::numeric_limits<double>::infinity();
  if (at < 0.0) return price.front();
  auto it = std::upper_bound(cum_quantity.begin(), cum_quantity.end(), at);
  return price[it - cum_quantity.begin()];
}

Direction determine_direction(const PriceCurve& c1, const PriceCurve& c2, double gap_tol) {
  double gap = c2.value(0.0) - c1.value(0.0);
  if (gap > gap_tol) return Direction::Region1ToRegion2;
  if (gap < -gap_tol) return Direction::Region2ToRegion1;
  return Direction::None;
}

namespace {

double overlap_lo(const PriceCurve& a, const PriceCurve& b) {
  return std::max(a.q_lo, b.q_lo);
}
double overlap_hi(const PriceCurve& a, const PriceCurve& b) {
  return std::min(a.q_hi, b.q_hi);
}

std::vector<double> merged_breakpoints(const PriceCurve& a, const PriceCurve& b, double lo,
                                       double hi) {
  std::vector<double> pts{lo, hi};
  for (double q : a.q)
    if (q > lo && q < hi) pts.push_back(q);
  for (double q : b.q)
    if (q > lo && q < hi) pts.push_back(q);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

PriceCurve reflect(const PriceCurve& c) {
  PriceCurve r = c;
  r.q_lo = -c.q_hi;
  r.q_hi = -c.q_lo;
  r.q.assign(c.q.rbegin(), c.q.rend());
  for (double& q : r.q) q = -q;
  r.price.assign(c.price.rbegin(), c.price.rend());
  r.degenerate.assign(c.degenerate.rbegin(), c.degenerate.rend());
  return r;
}

}  // namespace

Schedule intersect_schedule(const PriceCurve& supply, const PriceCurve& demand, double q_max,
                            double q_min, const SchedulerOptions& options) {
  double dom_lo = overlap_lo(supply, demand);
  double dom_hi = overlap_hi(supply, demand);
  double lo = std::max(dom_lo, q_min);
  double hi = std::min(dom_hi, q_max);
  if (lo > hi)
    throw DomainMismatch("price curves and interface interval share no interchange level");

  auto gap_at = [&](double q) { return demand.value(q) - supply.value(q); };

  Schedule sched;
  sched.gap_tol = options.gap_tol;

  double g_lo = gap_at(lo), g_hi = gap_at(hi);
  if (g_lo <= 0.0) {
    // gap nonpositive from the left end: schedule as little as allowed
    sched.q = lo;
    if (g_lo < -options.gap_tol) {
      sched.interface_binding = lo == q_min && q_min > dom_lo;
      sched.boundary = sched.interface_binding ? "interface" : "domain";
    }
  } else if (g_hi > 0.0) {
    // gap positive everywhere: schedule as much as allowed
    sched.q = hi;
    if (g_hi > options.gap_tol) {
      sched.interface_binding = hi == q_max && q_max < dom_hi;
      sched.boundary = sched.interface_binding ? "interface" : "domain";
    }
  } else {
    // walk segments left to right for the leftmost zero of the monotone gap
    std::vector<double> pts = merged_breakpoints(supply, demand, lo, hi);
    double q_star = hi;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      double gl = gap_at(pts[k]), gr = gap_at(pts[k + 1]);
      if (gl <= 0.0) {
        q_star = pts[k];
        break;
      }
      if (gr <= 0.0) {
        q_star = gr == gl ? pts[k] : pts[k] + gl * (pts[k + 1] - pts[k]) / (gl - gr);
        break;
      }
    }
    sched.q = q_star;
  }

  sched.price_region1 = supply.value(sched.q);
  sched.price_region2 = demand.value(sched.q);
  sched.gap = sched.price_region2 - sched.price_region1;
  if (std::abs(sched.q) > 1e-12)
    sched.direction =
        sched.q > 0 ? Direction::Region1ToRegion2 : Direction::Region2ToRegion1;
  else if (supply.contains(0.0) && demand.contains(0.0))
    sched.direction = determine_direction(supply, demand, options.gap_tol);
  return sched;
}

BidCurve stack_bids(std::span<const InterfaceBid> bids, Direction direction) {
  std::vector<int> order;
  BidCurve curve;
  for (int i = 0; i < static_cast<int>(bids.size()); ++i) {
    if (!(bids[i].quantity > 0.0))
      throw ValidationError("interface bid quantity must be > 0");
    if (bids[i].direction == direction)
      order.push_back(i);
    else
      ++curve.ignored_bids;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return bids[a].price < bids[b].price; });
  double cum = 0.0;
  for (int i : order) {
    cum += bids[i].quantity;
    curve.cum_quantity.push_back(cum);
    curve.price.push_back(bids[i].price);
    curve.bid_index.push_back(i);
  }
  return curve;
}

Schedule scts_schedule(const PriceCurve& exp_supply, const PriceCurve& exp_demand,
                       std::span<const InterfaceBid> bids, double q_max, double q_min,
                       const SchedulerOptions& options) {
  double dom_lo = overlap_lo(exp_supply, exp_demand);
  double dom_hi = overlap_hi(exp_supply, exp_demand);
  if (dom_lo > dom_hi) throw DomainMismatch("expected curves share no domain overlap");

  Direction dir;
  if (dom_lo <= 0.0 && dom_hi >= 0.0) {
    dir = determine_direction(exp_supply, exp_demand, options.gap_tol);
  } else {
    // the feasible interchange interval forces the sign
    dir = dom_lo > 0.0 ? Direction::Region1ToRegion2 : Direction::Region2ToRegion1;
  }

  Schedule sched;
  sched.method = ScheduleMethod::SCTS;
  sched.direction = dir;
  sched.gap_tol = options.gap_tol;

  if (dir == Direction::None) {
    sched.q = 0.0;
    sched.price_region1 = exp_supply.value(0.0);
    sched.price_region2 = exp_demand.value(0.0);
    sched.gap = sched.price_region2 - sched.price_region1;
    sched.ignored_bids = static_cast<int>(bids.size());
    return sched;
  }

  // Work on the exporting orientation: positive x, supply below demand at 0.
  bool reflected = dir == Direction::Region2ToRegion1;
  PriceCurve sup = reflected ? reflect(exp_demand) : exp_supply;
  PriceCurve dem = reflected ? reflect(exp_supply) : exp_demand;
  double cap = reflected ? (std::isfinite(q_min) ? -q_min : kUnlimited)
                         : (std::isfinite(q_max) ? q_max : kUnlimited);

  BidCurve stack = stack_bids(bids, dir);
  sched.ignored_bids = stack.ignored_bids;

  double x_lo = std::max(0.0, overlap_lo(sup, dem));
  double x_hi = std::min({overlap_hi(sup, dem), cap, stack.total_quantity()});

  double x_star;
  std::string boundary;
  if (x_hi <= x_lo) {
    x_star = std::max(0.0, std::min(x_lo, x_hi));
    boundary = "bids-exhausted";
    if (stack.total_quantity() > 0.0 && x_hi == cap) boundary = "interface";
    x_star = x_hi < x_lo ? 0.0 : x_star;
  } else {
    std::vector<double> pts = merged_breakpoints(sup, dem, x_lo, x_hi);
    for (double c : stack.cum_quantity)
      if (c > x_lo && c < x_hi) pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    x_star = x_hi;
    bool crossed = false;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      double a = pts[k], b = pts[k + 1];
      double bid_price = stack.value(0.5 * (a + b));  // constant on the segment interior
      double gl = dem.value(a) - sup.value(a) - bid_price;
      double gr = dem.value(b) - sup.value(b) - bid_price;
      if (gl <= 0.0) {
        x_star = a;
        crossed = true;
        break;
      }
      if (gr < 0.0) {
        x_star = a + gl * (b - a) / (gl - gr);
        crossed = true;
        break;
      }
      if (gr == 0.0) {
        x_star = b;  // zero reached exactly at the segment end
        crossed = true;
        break;
      }
    }
    if (!crossed) {
      if (x_star == stack.total_quantity())
        boundary = "bids-exhausted";
      else if (x_star == cap)
        boundary = "interface";
      else
        boundary = "domain";
    }
  }

  // Bid acceptance: everything left of x_star, the marginal step partially.
  double prev = 0.0;
  for (size_t k = 0; k < stack.cum_quantity.size(); ++k) {
    const InterfaceBid& bid = bids[stack.bid_index[k]];
    double take = std::clamp(x_star - prev, 0.0, bid.quantity);
    if (take > 0.0)
      sched.accepted_bids.push_back({bid, take, take >= bid.quantity - 1e-12});
    prev = stack.cum_quantity[k];
  }

  sched.q = reflected ? -x_star : x_star;
  sched.boundary = boundary;
  sched.interface_binding = boundary == "interface";
  sched.price_region1 = exp_supply.value(sched.q);
  sched.price_region2 = exp_demand.value(sched.q);
  sched.gap = sched.price_region2 - sched.price_region1;
  return sched;
}

}  // namespace tieopt
