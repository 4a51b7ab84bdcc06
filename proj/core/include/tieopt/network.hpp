#pragma once

#include <array>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace tieopt {

using BusId = int;

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

/// Transmission line. Reactance in p.u. on a 100 MVA base, limit in MW
/// (kUnlimited when the line is unconstrained). Flow limits apply in both
/// directions: |flow| <= limit.
struct Line {
  BusId from = 0;
  BusId to = 0;
  double reactance = 0.0;
  double limit = kUnlimited;
};

/// Generator with cost h*g^2 + b*g + c0 ($/h, g in MW) and box limits.
struct Generator {
  BusId bus = 0;
  double h = 0.0;     // $/MW^2 h
  double b = 0.0;     // $/MWh
  double g_min = 0.0; // MW
  double g_max = 0.0; // MW
  double c0 = 0.0;    // $/h fixed term
};

/// Two-region network. Immutable after construction; all operations over it
/// are pure functions, so instances are safe to share across threads.
struct Network {
  std::vector<BusId> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::map<BusId, double> loads;      // MW withdrawals; absent bus = 0
  std::map<BusId, int> region_of;     // bus -> {1, 2}
  std::vector<int> tie_lines;         // indices into `lines`
  std::array<BusId, 2> proxy = {0, 0};  // proxy[r-1] = region r's proxy bus,
                                        // located in the other region
  double q_max = kUnlimited;  // interface limit Q, MW
  double q_min = -kUnlimited; // lower interchange bound, defaults to -Q

  BusId proxy_bus(int region) const { return proxy[region - 1]; }
  double load_at(BusId bus) const {
    auto it = loads.find(bus);
    return it == loads.end() ? 0.0 : it->second;
  }
  int region(BusId bus) const { return region_of.at(bus); }
  std::vector<BusId> region_buses(int region) const;
  std::vector<int> internal_lines(int region) const;
  bool has_bus(BusId bus) const;
};

/// Throws ValidationError naming the violated invariant.
void validate(const Network& network);

/// Parse the native JSON case format (sections `buses`, `lines`, `generators`,
/// `loads`, `regions`, `tie`, `proxy`, `interface`). Ignores the `forecasts`
/// and `bids` sections; see caseio.hpp for the full document.
Network parse_case(const std::string& text);

/// Emit the physical sections as a native case document. Re-parsing the
/// result reproduces the Network exactly.
std::string emit_case(const Network& network);

}  // namespace tieopt
