#pragma once

#include <string>
#include <vector>

#include "tieopt/forecast.hpp"
#include "tieopt/network.hpp"
#include "tieopt/scheduler.hpp"

namespace tieopt {

/// A full native case document: physical network plus the optional
/// `forecasts` and `bids` sections.
struct CaseFile {
  Network network;
  Forecast forecast;
  std::vector<InterfaceBid> bids;
};

CaseFile parse_case_file(const std::string& text);
std::string emit_case_file(const CaseFile& c);

/// Loads either format by extension: .m (MATPOWER, requires annotation_path)
/// or native JSON.
CaseFile load_case(const std::string& path, const std::string& annotation_path = "");

/// Parse just the `bids` array from a JSON document (the scts --bids file:
/// either a bare array or an object with a "bids" key).
std::vector<InterfaceBid> parse_bids(const std::string& text);

}  // namespace tieopt
