#pragma once

#include <string>

#include "tieopt/caseio.hpp"
#include "tieopt/network.hpp"

namespace tieopt {

/// Parse a MATPOWER text case (mpc.bus / mpc.branch / mpc.gen / mpc.gencost
/// tables, polynomial costs of degree <= 2) together with a region
/// annotation document that assigns buses to the two regions, names the
/// proxy buses and optionally overrides branch limits, sets the interface
/// interval and places stochastic injections.
///
/// Throws ParseError on malformed input and UnsupportedCost on
/// piecewise-linear or higher-degree cost rows.
CaseFile parse_matpower_case(const std::string& case_text,
                             const std::string& annotation_text);

}  // namespace tieopt
