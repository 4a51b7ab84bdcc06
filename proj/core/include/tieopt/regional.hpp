#pragma once

#include <Eigen/Dense>

#include "tieopt/network.hpp"

namespace tieopt {

/// One region's dispatch problem data after proxy reduction.
///
/// Monitored flows are affine in (g, q):
///   flow = S * (g_by_bus - d) + sign * s_q * q
/// with sign = +1 for region 1 (q > 0 exports) and -1 for region 2 (q > 0
/// imports). s_q is the shift-factor transfer of 1 MW injected at the
/// region's reference bus and withdrawn at its proxy bus, restricted to the
/// monitored lines; S uses the same reference bus as PTDF slack, which makes
/// the affine flow model exact on the balance manifold.
struct RegionalModel {
  int region = 0;
  double sign = 1.0;
  std::vector<Generator> generators;
  std::vector<BusId> bus_ids;       // region buses, column order of S
  Eigen::VectorXd base_load;        // d_i per bus_ids entry (MW)
  std::vector<int> monitored_lines; // network line indices: internal + ties
  Eigen::VectorXd line_limit;       // F per monitored line
  Eigen::MatrixXd S;                // monitored x region buses
  Eigen::VectorXd s_q;              // interchange sensitivity per monitored line
  BusId reference_bus = 0;
  BusId proxy_bus = 0;

  int bus_index(BusId bus) const;
  /// Map each generator to its bus column (generator g injects at
  /// bus_index(generators[g].bus)).
  std::vector<int> generator_bus_index() const;
};

/// Build the proxy-reduced view of one region. The reference bus defaults to
/// the lowest-numbered generator bus in the region.
/// Throws ValidationError when the proxy bus is missing or misplaced.
RegionalModel build_regional_view(const Network& network, int region);

}  // namespace tieopt
