#include "tieopt/regional.hpp"

#include <algorithm>
#include <limits>

#include "tieopt/errors.hpp"
#include "tieopt/ptdf.hpp"

namespace tieopt {

int RegionalModel::bus_index(BusId bus) const {
  auto it = std::find(bus_ids.begin(), bus_ids.end(), bus);
  if (it == bus_ids.end())
    throw ValidationError("bus " + std::to_string(bus) + " not in region " +
                          std::to_string(region));
  return static_cast<int>(it - bus_ids.begin());
}

std::vector<int> RegionalModel::generator_bus_index() const {
  std::vector<int> idx;
  idx.reserve(generators.size());
  for (const Generator& g : generators) idx.push_back(bus_index(g.bus));
  return idx;
}

RegionalModel build_regional_view(const Network& network, int region) {
  if (region != 1 && region != 2)
    throw ValidationError("region must be 1 or 2");

  RegionalModel model;
  model.region = region;
  model.sign = region == 1 ? 1.0 : -1.0;
  model.bus_ids = network.region_buses(region);
  if (model.bus_ids.empty())
    throw ValidationError("region " + std::to_string(region) + " has no buses");

  model.proxy_bus = network.proxy_bus(region);
  if (!network.has_bus(model.proxy_bus))
    throw ValidationError("region " + std::to_string(region) + " proxy bus missing");
  if (network.region_of.at(model.proxy_bus) == region)
    throw ValidationError("region " + std::to_string(region) +
                          " proxy bus must lie in the other region");

  BusId ref = std::numeric_limits<BusId>::max();
  for (const Generator& g : network.generators) {
    if (network.region_of.at(g.bus) == region) {
      model.generators.push_back(g);
      ref = std::min(ref, g.bus);
    }
  }
  if (model.generators.empty())
    throw ValidationError("region " + std::to_string(region) + " has no generator");
  model.reference_bus = ref;

  model.base_load.resize(model.bus_ids.size());
  for (size_t k = 0; k < model.bus_ids.size(); ++k)
    model.base_load(k) = network.load_at(model.bus_ids[k]);

  model.monitored_lines = network.internal_lines(region);
  for (int tie : network.tie_lines) model.monitored_lines.push_back(tie);

  ShiftFactorMatrix sf = build_ptdf(network, model.reference_bus);
  const int m = static_cast<int>(model.monitored_lines.size());
  const int nb = static_cast<int>(model.bus_ids.size());
  model.line_limit.resize(m);
  model.S.resize(m, nb);
  Eigen::VectorXd transfer = sf.transfer(model.reference_bus, model.proxy_bus);
  model.s_q.resize(m);
  for (int i = 0; i < m; ++i) {
    int line = model.monitored_lines[i];
    model.line_limit(i) = network.lines[line].limit;
    model.s_q(i) = transfer(line);
    for (int k = 0; k < nb; ++k) model.S(i, k) = sf.entry(line, model.bus_ids[k]);
  }
  return model;
}

}  // namespace tieopt
