#pragma once

#include <Eigen/Dense>

#include "tieopt/network.hpp"

namespace tieopt {

/// Power transfer distribution factors: factors(l, k) is the MW flow induced
/// on line l (oriented from -> to) per MW injected at bus k and withdrawn at
/// the slack bus. The slack column is identically zero.
struct ShiftFactorMatrix {
  Eigen::MatrixXd factors;        // lines x buses
  BusId slack = 0;
  std::vector<BusId> bus_order;   // column k corresponds to bus_order[k]

  int column_of(BusId bus) const;
  double entry(int line, BusId bus) const { return factors(line, column_of(bus)); }

  /// Sensitivity of every line flow to a balanced transfer (inject 1 MW at
  /// `from`, withdraw 1 MW at `to`). Independent of the slack choice.
  Eigen::VectorXd transfer(BusId from, BusId to) const;
};

/// Standard DC PTDF from the reduced susceptance Laplacian.
/// Throws SingularNetwork on a disconnected graph or non-positive reactance.
ShiftFactorMatrix build_ptdf(const Network& network, BusId slack);

/// DC power flow: line flows for a balanced injection vector (indexed like
/// ShiftFactorMatrix columns). Used as the independent check of the PTDF.
Eigen::VectorXd dc_flow(const Network& network, const Eigen::VectorXd& injections,
                        BusId slack);

}  // namespace tieopt
