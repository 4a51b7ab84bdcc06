#pragma once

#include <span>
#include <string>
#include <vector>

#include "tieopt/curves.hpp"

namespace tieopt {

enum class Direction { Region1ToRegion2, Region2ToRegion1, None };

std::string to_string(Direction direction);

/// Market participant's interface bid: a quantity it is willing to move in
/// `direction` whenever the expected price difference is at least `price`.
struct InterfaceBid {
  Direction direction = Direction::Region1ToRegion2;
  double quantity = 0.0;  // MW, > 0
  double price = 0.0;     // $/MWh, minimum acceptable expected price gap
};

/// Aggregated bid stack pi_bid(x): nondecreasing step function of cumulative
/// quantity; +inf beyond the total offered quantity.
struct BidCurve {
  std::vector<double> cum_quantity;  // step right edges, increasing
  std::vector<double> price;        // step prices, nondecreasing
  std::vector<int> bid_index;       // originating bid per step
  int ignored_bids = 0;             // opposite-direction bids (diagnostics)

  double total_quantity() const { return cum_quantity.empty() ? 0.0 : cum_quantity.back(); }
  /// Value on [0, total); +inf at and beyond total_quantity().
  double value(double at) const;
};

enum class ScheduleMethod { TO, STO, SCTS };

std::string to_string(ScheduleMethod method);

struct AcceptedBid {
  InterfaceBid bid;
  double accepted_mw = 0.0;
  bool full = false;
};

/// An interchange schedule: the cleared quantity, prices at the schedule and
/// how the boundary (if any) was hit. q uses the +q = region 1 -> region 2
/// sign convention throughout.
struct Schedule {
  ScheduleMethod method = ScheduleMethod::TO;
  Direction direction = Direction::None;
  double q = 0.0;
  double price_region1 = 0.0;  // supply-side expected price at q
  double price_region2 = 0.0;  // demand-side expected price at q
  double gap = 0.0;            // price_region2 - price_region1
  bool interface_binding = false;
  std::string boundary;        // "", "interface", "domain", "bids-exhausted"
  std::vector<AcceptedBid> accepted_bids;
  double gap_tol = 1e-3;
  int ignored_bids = 0;
};

struct SchedulerOptions {
  double gap_tol = 1e-3;  // $/MWh
};

/// Interchange direction from the prices at q = 0 (ties within gap_tol give
/// None). Throws OutOfDomain when 0 is outside either curve's domain.
Direction determine_direction(const PriceCurve& c1, const PriceCurve& c2,
                              double gap_tol = 1e-3);

/// Schedule at the crossing of the two price curves, clipped to
/// [q_min, q_max] and the curves' domain overlap. Works on signed q, so it
/// serves both flow directions; supply is region 1's curve, demand region
/// 2's. A one-signed gap yields a boundary schedule with the reason flagged
/// rather than an error. Flat crossings resolve to the leftmost q.
/// Used for TO with deterministic curves and STO with expected curves.
Schedule intersect_schedule(const PriceCurve& supply, const PriceCurve& demand,
                            double q_max, double q_min = -kUnlimited,
                            const SchedulerOptions& options = {});

/// Merit-order stack of the bids matching `direction`; opposite-direction
/// bids are counted in `ignored_bids`. Equal prices keep input order.
BidCurve stack_bids(std::span<const InterfaceBid> bids, Direction direction);

/// Bid-cleared schedule: the largest |q| (in the determined direction) for
/// which the expected price gap still covers the marginal bid price, capped
/// by the interface limit and the total bid quantity. Bids left of the
/// schedule are accepted, the marginal one possibly partially.
Schedule scts_schedule(const PriceCurve& exp_supply, const PriceCurve& exp_demand,
                       std::span<const InterfaceBid> bids, double q_max,
                       double q_min = -kUnlimited, const SchedulerOptions& options = {});

}  // namespace tieopt
