#include "tieopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tieopt/errors.hpp"

namespace tieopt {

using nlohmann::json;

std::vector<BusId> Network::region_buses(int region) const {
  std::vector<BusId> out;
  for (BusId b : buses)
    if (region_of.at(b) == region) out.push_back(b);
  return out;
}

std::vector<int> Network::internal_lines(int region) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
    const Line& l = lines[i];
    if (region_of.at(l.from) == region && region_of.at(l.to) == region) out.push_back(i);
  }
  return out;
}

bool Network::has_bus(BusId bus) const {
  return std::find(buses.begin(), buses.end(), bus) != buses.end();
}

namespace {

// Union-find over bus ids.
class Components {
 public:
  explicit Components(const std::vector<BusId>& buses) {
    for (BusId b : buses) parent_[b] = b;
  }
  BusId find(BusId b) {
    BusId root = b;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[b] != root) b = std::exchange(parent_[b], root);
    return root;
  }
  void unite(BusId a, BusId b) { parent_[find(a)] = find(b); }

 private:
  std::map<BusId, BusId> parent_;
};

}  // namespace

void validate(const Network& network) {
  if (network.buses.empty()) throw ValidationError("network has no buses");
  std::set<BusId> seen;
  for (BusId b : network.buses) {
    if (!seen.insert(b).second)
      throw ValidationError("duplicate bus id " + std::to_string(b));
  }

  for (const auto& [bus, region] : network.region_of) {
    if (!seen.count(bus))
      throw ValidationError("region assignment references unknown bus " + std::to_string(bus));
    if (region != 1 && region != 2)
      throw ValidationError("bus " + std::to_string(bus) + " assigned to region " +
                            std::to_string(region) + ", expected 1 or 2");
  }
  for (BusId b : network.buses) {
    if (!network.region_of.count(b))
      throw ValidationError("bus " + std::to_string(b) + " has no region assignment");
  }

  for (size_t i = 0; i < network.lines.size(); ++i) {
    const Line& l = network.lines[i];
    if (!seen.count(l.from) || !seen.count(l.to))
      throw ValidationError("line " + std::to_string(i) + " endpoint (" +
                            std::to_string(l.from) + "," + std::to_string(l.to) +
                            ") references an unknown bus");
    if (l.from == l.to)
      throw ValidationError("line " + std::to_string(i) + " is a self-loop at bus " +
                            std::to_string(l.from));
    if (!(l.reactance > 0.0))
      throw ValidationError("line " + std::to_string(i) + " reactance must be > 0");
    if (std::isnan(l.limit) || l.limit < 0.0)
      throw ValidationError("line " + std::to_string(i) + " flow limit must be >= 0");
  }

  // tie_lines must be exactly the lines whose endpoints lie in different regions
  std::set<int> declared(network.tie_lines.begin(), network.tie_lines.end());
  for (int idx : network.tie_lines) {
    if (idx < 0 || idx >= static_cast<int>(network.lines.size()))
      throw ValidationError("tie line index " + std::to_string(idx) + " out of range");
  }
  for (int i = 0; i < static_cast<int>(network.lines.size()); ++i) {
    const Line& l = network.lines[i];
    bool crossing = network.region_of.at(l.from) != network.region_of.at(l.to);
    if (crossing && !declared.count(i))
      throw ValidationError("line " + std::to_string(i) + " crosses the partition but is not a tie line");
    if (!crossing && declared.count(i))
      throw ValidationError("declared tie line " + std::to_string(i) + " does not cross the partition");
  }
  if (network.tie_lines.empty()) throw ValidationError("regions are not connected by any tie line");

  for (size_t i = 0; i < network.generators.size(); ++i) {
    const Generator& g = network.generators[i];
    if (!seen.count(g.bus))
      throw ValidationError("generator " + std::to_string(i) + " sits on unknown bus " +
                            std::to_string(g.bus));
    if (g.g_min > g.g_max)
      throw ValidationError("generator " + std::to_string(i) + " has g_min > g_max");
    if (g.h < 0.0)
      throw ValidationError("generator " + std::to_string(i) + " has negative quadratic cost");
  }
  for (const auto& [bus, mw] : network.loads) {
    (void)mw;
    if (!seen.count(bus))
      throw ValidationError("load references unknown bus " + std::to_string(bus));
  }

  for (int r : {1, 2}) {
    BusId p = network.proxy_bus(r);
    if (!seen.count(p))
      throw ValidationError("region " + std::to_string(r) + " proxy bus " + std::to_string(p) +
                            " is not a known bus");
    if (network.region_of.at(p) == r)
      throw ValidationError("region " + std::to_string(r) + " proxy bus " + std::to_string(p) +
                            " must lie in the other region");
    bool has_gen = false;
    for (const Generator& g : network.generators)
      if (network.region_of.at(g.bus) == r) has_gen = true;
    if (!has_gen)
      throw ValidationError("region " + std::to_string(r) + " has no generator");
  }

  if (std::isnan(network.q_max) || network.q_max < 0.0)
    throw ValidationError("interface limit Q must be >= 0");
  if (network.q_min > network.q_max)
    throw ValidationError("interface lower bound exceeds Q");

  // each region's internal graph plus tie lines must be connected
  for (int r : {1, 2}) {
    Components comp(network.buses);
    std::set<BusId> members;
    for (BusId b : network.buses)
      if (network.region_of.at(b) == r) members.insert(b);
    for (const Line& l : network.lines) {
      bool internal = network.region_of.at(l.from) == r && network.region_of.at(l.to) == r;
      bool crossing = network.region_of.at(l.from) != network.region_of.at(l.to);
      if (internal || crossing) {
        comp.unite(l.from, l.to);
        members.insert(l.from);
        members.insert(l.to);
      }
    }
    std::set<BusId> roots;
    for (BusId b : members) roots.insert(comp.find(b));
    if (roots.size() > 1)
      throw ValidationError("region " + std::to_string(r) +
                            " internal graph plus tie lines is not connected");
  }
}

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw ParseError("case document, " + where + ": " + what);
}

double number_field(const json& j, const std::string& where, const std::string& key,
                    bool required = true, double fallback = 0.0) {
  if (!j.contains(key)) {
    if (required) parse_fail(where, "missing field '" + key + "'");
    return fallback;
  }
  if (!j.at(key).is_number()) parse_fail(where, "field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

BusId bus_field(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) parse_fail(where, "missing field '" + key + "'");
  if (!j.at(key).is_number_integer()) parse_fail(where, "field '" + key + "' must be a bus id");
  return j.at(key).get<BusId>();
}

}  // namespace

Network parse_case(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("case document: top level must be an object");

  Network net;

  if (!doc.contains("buses") || !doc["buses"].is_array())
    parse_fail("buses", "required array missing");
  for (const auto& b : doc["buses"]) {
    if (!b.is_number_integer()) parse_fail("buses", "bus ids must be integers");
    net.buses.push_back(b.get<BusId>());
  }

  if (!doc.contains("lines") || !doc["lines"].is_array())
    parse_fail("lines", "required array missing");
  for (size_t i = 0; i < doc["lines"].size(); ++i) {
    const auto& j = doc["lines"][i];
    std::string where = "lines[" + std::to_string(i) + "]";
    Line l;
    l.from = bus_field(j, where, "from");
    l.to = bus_field(j, where, "to");
    l.reactance = number_field(j, where, "x");
    l.limit = j.contains("limit") ? number_field(j, where, "limit") : kUnlimited;
    net.lines.push_back(l);
  }

  if (!doc.contains("generators") || !doc["generators"].is_array())
    parse_fail("generators", "required array missing");
  for (size_t i = 0; i < doc["generators"].size(); ++i) {
    const auto& j = doc["generators"][i];
    std::string where = "generators[" + std::to_string(i) + "]";
    Generator g;
    g.bus = bus_field(j, where, "bus");
    g.h = number_field(j, where, "h");
    g.b = number_field(j, where, "b");
    g.g_min = number_field(j, where, "g_min");
    g.g_max = number_field(j, where, "g_max");
    g.c0 = number_field(j, where, "c0", false, 0.0);
    net.generators.push_back(g);
  }

  if (doc.contains("loads")) {
    if (!doc["loads"].is_object()) parse_fail("loads", "must map bus id to MW");
    for (const auto& [key, value] : doc["loads"].items()) {
      BusId bus;
      try {
        bus = std::stoi(key);
      } catch (...) {
        parse_fail("loads", "key '" + key + "' is not a bus id");
      }
      if (!value.is_number()) parse_fail("loads", "value for bus " + key + " must be a number");
      net.loads[bus] = value.get<double>();
    }
  }

  if (!doc.contains("regions") || !doc["regions"].is_object())
    parse_fail("regions", "required object missing");
  for (const auto& [key, value] : doc["regions"].items()) {
    int region = 0;
    try {
      region = std::stoi(key);
    } catch (...) {
      parse_fail("regions", "key '" + key + "' is not a region id");
    }
    if (!value.is_array()) parse_fail("regions", "region " + key + " must list its buses");
    for (const auto& b : value) net.region_of[b.get<BusId>()] = region;
  }

  // tie section is optional; when absent it is derived from the partition
  if (doc.contains("tie")) {
    if (!doc["tie"].is_array()) parse_fail("tie", "must be an array of [from, to] pairs");
    for (const auto& pair : doc["tie"]) {
      if (!pair.is_array() || pair.size() != 2) parse_fail("tie", "entries must be [from, to]");
      BusId a = pair[0].get<BusId>(), b = pair[1].get<BusId>();
      int found = -1;
      for (int i = 0; i < static_cast<int>(net.lines.size()); ++i) {
        const Line& l = net.lines[i];
        if ((l.from == a && l.to == b) || (l.from == b && l.to == a)) found = i;
      }
      if (found < 0)
        parse_fail("tie", "no line between " + std::to_string(a) + " and " + std::to_string(b));
      net.tie_lines.push_back(found);
    }
  } else {
    for (int i = 0; i < static_cast<int>(net.lines.size()); ++i) {
      const Line& l = net.lines[i];
      auto fa = net.region_of.find(l.from), fb = net.region_of.find(l.to);
      if (fa != net.region_of.end() && fb != net.region_of.end() && fa->second != fb->second)
        net.tie_lines.push_back(i);
    }
  }

  if (!doc.contains("proxy") || !doc["proxy"].is_object())
    parse_fail("proxy", "required object missing");
  for (int r : {1, 2}) {
    std::string key = std::to_string(r);
    if (!doc["proxy"].contains(key)) parse_fail("proxy", "missing region " + key);
    net.proxy[r - 1] = doc["proxy"][key].get<BusId>();
  }

  if (!doc.contains("interface") || !doc["interface"].is_object())
    parse_fail("interface", "required object missing");
  net.q_max = number_field(doc["interface"], "interface", "Q_max");
  net.q_min = doc["interface"].contains("Q_min")
                  ? number_field(doc["interface"], "interface", "Q_min")
                  : -net.q_max;

  validate(net);
  return net;
}

std::string emit_case(const Network& network) {
  json doc;
  doc["buses"] = network.buses;
  doc["lines"] = json::array();
  for (const Line& l : network.lines) {
    json j{{"from", l.from}, {"to", l.to}, {"x", l.reactance}};
    if (std::isfinite(l.limit)) j["limit"] = l.limit;
    doc["lines"].push_back(j);
  }
  doc["generators"] = json::array();
  for (const Generator& g : network.generators) {
    json j{{"bus", g.bus}, {"h", g.h}, {"b", g.b}, {"g_min", g.g_min}, {"g_max", g.g_max}};
    if (g.c0 != 0.0) j["c0"] = g.c0;
    doc["generators"].push_back(j);
  }
  doc["loads"] = json::object();
  for (const auto& [bus, mw] : network.loads) doc["loads"][std::to_string(bus)] = mw;
  doc["regions"] = json::object();
  for (int r : {1, 2}) doc["regions"][std::to_string(r)] = network.region_buses(r);
  doc["tie"] = json::array();
  for (int idx : network.tie_lines)
    doc["tie"].push_back(json::array({network.lines[idx].from, network.lines[idx].to}));
  doc["proxy"] = {{"1", network.proxy_bus(1)}, {"2", network.proxy_bus(2)}};
  doc["interface"] = {{"Q_max", network.q_max}, {"Q_min", network.q_min}};
  return doc.dump(2) + "\n";
}

}  // namespace tieopt
