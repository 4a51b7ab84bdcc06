#include "tieopt/caseio.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_sections.hpp"
#include "tieopt/errors.hpp"
#include "tieopt/matpower.hpp"

namespace tieopt {

using nlohmann::json;

namespace {

Distribution parse_distribution(const json& j, const std::string& where) {
  if (!j.contains("type") || !j["type"].is_string())
    throw ParseError(where + ": forecast entry needs a 'type'");
  std::string type = j["type"].get<std::string>();
  if (type == "point") {
    if (!j.contains("value")) throw ParseError(where + ": point forecast needs 'value'");
    return PointMass{j["value"].get<double>()};
  }
  if (type == "normal") {
    if (!j.contains("mean") || !j.contains("std"))
      throw ParseError(where + ": normal forecast needs 'mean' and 'std'");
    return NormalDist{j["mean"].get<double>(), j["std"].get<double>()};
  }
  if (type == "discrete") {
    if (!j.contains("values") || !j.contains("probs"))
      throw ParseError(where + ": discrete forecast needs 'values' and 'probs'");
    DiscreteDist d;
    for (const auto& row : j["values"]) {
      if (row.is_array())
        d.values.push_back(row.get<std::vector<double>>());
      else
        d.values.push_back({row.get<double>()});
    }
    d.probs = j["probs"].get<std::vector<double>>();
    return d;
  }
  throw ParseError(where + ": unknown forecast type '" + type + "'");
}

json distribution_json(const Distribution& dist) {
  if (std::holds_alternative<PointMass>(dist))
    return {{"type", "point"}, {"value", std::get<PointMass>(dist).value}};
  if (std::holds_alternative<NormalDist>(dist)) {
    const auto& n = std::get<NormalDist>(dist);
    return {{"type", "normal"}, {"mean", n.mean}, {"std", n.std}};
  }
  const auto& d = std::get<DiscreteDist>(dist);
  return {{"type", "discrete"}, {"values", d.values}, {"probs", d.probs}};
}

InterfaceBid parse_bid(const json& j, const std::string& where) {
  InterfaceBid bid;
  if (!j.contains("direction") || !j["direction"].is_string())
    throw ParseError(where + ": bid needs a 'direction' of \"1->2\" or \"2->1\"");
  std::string dir = j["direction"].get<std::string>();
  if (dir == "1->2")
    bid.direction = Direction::Region1ToRegion2;
  else if (dir == "2->1")
    bid.direction = Direction::Region2ToRegion1;
  else
    throw ParseError(where + ": bid direction '" + dir + "' not recognized");
  if (!j.contains("quantity") || !j.contains("price"))
    throw ParseError(where + ": bid needs 'quantity' and 'price'");
  bid.quantity = j["quantity"].get<double>();
  bid.price = j["price"].get<double>();
  if (!(bid.quantity > 0.0)) throw ValidationError(where + ": bid quantity must be > 0");
  return bid;
}

}  // namespace

Forecast parse_forecast_section(const json& doc, const Network& network) {
  Forecast forecast;
  if (!doc.contains("forecasts")) return forecast;
  if (!doc["forecasts"].is_array()) throw ParseError("forecasts: must be an array");
  for (size_t i = 0; i < doc["forecasts"].size(); ++i) {
    const json& j = doc["forecasts"][i];
    std::string where = "forecasts[" + std::to_string(i) + "]";
    StochasticInjection entry;
    if (j.contains("buses"))
      entry.buses = j["buses"].get<std::vector<BusId>>();
    else if (j.contains("bus"))
      entry.buses = {j["bus"].get<BusId>()};
    else
      throw ParseError(where + ": needs 'bus' or 'buses'");
    for (BusId b : entry.buses) {
      if (!network.has_bus(b))
        throw ValidationError(where + ": unknown bus " + std::to_string(b));
    }
    entry.region = network.region_of.at(entry.buses.front());
    for (BusId b : entry.buses) {
      if (network.region_of.at(b) != entry.region)
        throw ValidationError(where + ": bus group spans both regions");
    }
    if (j.contains("region") && j["region"].get<int>() != entry.region)
      throw ValidationError(where + ": declared region does not match the buses");
    entry.distribution = parse_distribution(j, where);
    forecast.injections.push_back(std::move(entry));
  }
  return forecast;
}

CaseFile parse_case_file(const std::string& text) {
  CaseFile out;
  out.network = parse_case(text);

  json doc = json::parse(text);
  out.forecast = parse_forecast_section(doc, out.network);
  if (doc.contains("bids")) {
    if (!doc["bids"].is_array()) throw ParseError("bids: must be an array");
    for (size_t i = 0; i < doc["bids"].size(); ++i)
      out.bids.push_back(parse_bid(doc["bids"][i], "bids[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string emit_case_file(const CaseFile& c) {
  json doc = json::parse(emit_case(c.network));
  if (!c.forecast.injections.empty()) {
    doc["forecasts"] = json::array();
    for (const StochasticInjection& e : c.forecast.injections) {
      json j = distribution_json(e.distribution);
      j["region"] = e.region;
      j["buses"] = e.buses;
      doc["forecasts"].push_back(j);
    }
  }
  if (!c.bids.empty()) {
    doc["bids"] = json::array();
    for (const InterfaceBid& b : c.bids) {
      doc["bids"].push_back({{"direction", to_string(b.direction)},
                             {"quantity", b.quantity},
                             {"price", b.price}});
    }
  }
  return doc.dump(2) + "\n";
}

std::vector<InterfaceBid> parse_bids(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bids document: ") + e.what());
  }
  const json& arr = doc.is_array() ? doc : doc.contains("bids") ? doc["bids"] : doc;
  if (!arr.is_array()) throw ParseError("bids document: expected an array of bids");
  std::vector<InterfaceBid> bids;
  for (size_t i = 0; i < arr.size(); ++i)
    bids.push_back(parse_bid(arr[i], "bids[" + std::to_string(i) + "]"));
  return bids;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

CaseFile load_case(const std::string& path, const std::string& annotation_path) {
  std::string text = read_file(path);
  bool matpower = path.size() > 2 && path.substr(path.size() - 2) == ".m";
  if (matpower) {
    if (annotation_path.empty())
      throw ParseError("MATPOWER case " + path + " requires a region annotation document");
    return parse_matpower_case(text, read_file(annotation_path));
  }
  return parse_case_file(text);
}

}  // namespace tieopt
