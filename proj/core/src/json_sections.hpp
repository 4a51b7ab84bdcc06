#pragma once

#include <nlohmann/json.hpp>

#include "tieopt/forecast.hpp"
#include "tieopt/network.hpp"

namespace tieopt {

// Shared by the native case reader and the MATPOWER annotation reader.
Forecast parse_forecast_section(const nlohmann::json& doc, const Network& network);

}  // namespace tieopt
