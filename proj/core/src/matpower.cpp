#include "tieopt/matpower.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_sections.hpp"
#include "tieopt/errors.hpp"

namespace tieopt {

using nlohmann::json;

namespace {

std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool comment = false;
  for (char c : text) {
    if (c == '%') comment = true;
    if (c == '\n') comment = false;
    out.push_back(comment ? ' ' : c);
  }
  return out;
}

// Extract the numeric table "mpc.<name> = [ ... ];" as rows of doubles.
std::vector<std::vector<double>> read_table(const std::string& text, const std::string& name,
                                            bool required) {
  std::string key = "mpc." + name;
  size_t pos = text.find(key);
  while (pos != std::string::npos) {
    // reject partial identifier matches like mpc.buses
    size_t after = pos + key.size();
    if (after < text.size() && (isalnum(text[after]) || text[after] == '_')) {
      pos = text.find(key, after);
      continue;
    }
    break;
  }
  if (pos == std::string::npos) {
    if (required) throw ParseError("MATPOWER case: missing table mpc." + name);
    return {};
  }
  size_t open = text.find('[', pos);
  size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw ParseError("MATPOWER case: table mpc." + name + " is not delimited by [ ]");

  std::vector<std::vector<double>> rows;
  std::string body = text.substr(open + 1, close - open - 1);
  std::string rowtext;
  auto flush_row = [&]() {
    std::istringstream in(rowtext);
    std::vector<double> row;
    double v;
    while (in >> v) row.push_back(v);
    std::string trailing;
    if (in.fail() && !in.eof()) {
      throw ParseError("MATPOWER case: non-numeric token in mpc." + name);
    }
    if (!row.empty()) rows.push_back(std::move(row));
    rowtext.clear();
  };
  for (char c : body) {
    if (c == ';' || c == '\n') {
      flush_row();
    } else {
      rowtext.push_back(c);
    }
  }
  flush_row();
  return rows;
}

double read_scalar(const std::string& text, const std::string& name, double fallback) {
  std::string key = "mpc." + name;
  size_t pos = text.find(key);
  if (pos == std::string::npos) return fallback;
  size_t eq = text.find('=', pos);
  if (eq == std::string::npos) return fallback;
  std::istringstream in(text.substr(eq + 1));
  double v;
  if (in >> v) return v;
  return fallback;
}

std::set<BusId> region1_from_annotation(const json& ann) {
  if (!ann.contains("region_split"))
    throw ParseError("region annotation: missing 'region_split'");
  const json& split = ann["region_split"];
  const json* r1 = nullptr;
  if (split.contains("region1"))
    r1 = &split["region1"];
  else if (split.contains("1"))
    r1 = &split["1"];
  else
    throw ParseError("region annotation: region_split needs a 'region1' entry");
  std::set<BusId> buses;
  if (r1->is_array()) {
    for (const auto& b : *r1) buses.insert(b.get<BusId>());
  } else if (r1->is_object() && r1->contains("from") && r1->contains("to")) {
    for (BusId b = (*r1)["from"].get<BusId>(); b <= (*r1)["to"].get<BusId>(); ++b)
      buses.insert(b);
  } else {
    throw ParseError("region annotation: region1 must be a bus list or {from, to}");
  }
  return buses;
}

}  // namespace

CaseFile parse_matpower_case(const std::string& case_text, const std::string& annotation_text) {
  std::string text = strip_comments(case_text);
  if (text.find("mpc") == std::string::npos)
    throw ParseError("MATPOWER case: no mpc structure found");

  auto bus_table = read_table(text, "bus", true);
  auto gen_table = read_table(text, "gen", true);
  auto branch_table = read_table(text, "branch", true);
  auto gencost_table = read_table(text, "gencost", true);
  read_scalar(text, "baseMVA", 100.0);  // costs and limits are already in MW

  json ann;
  try {
    ann = json::parse(annotation_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("region annotation: ") + e.what());
  }

  Network net;

  for (const auto& row : bus_table) {
    if (row.size() < 3) throw ParseError("MATPOWER case: bus row with fewer than 3 columns");
    BusId id = static_cast<BusId>(row[0]);
    net.buses.push_back(id);
    if (row[2] != 0.0) net.loads[id] = row[2];  // PD column
  }

  // branch limit overrides apply to the 1-based source row before filtering
  std::map<int, double> overrides;
  if (ann.contains("line_limit_overrides")) {
    for (const auto& o : ann["line_limit_overrides"]) {
      if (!o.contains("branch") || !o.contains("limit"))
        throw ParseError("region annotation: line_limit_overrides entries need branch and limit");
      overrides[o["branch"].get<int>()] = o["limit"].get<double>();
    }
  }

  for (size_t r = 0; r < branch_table.size(); ++r) {
    const auto& row = branch_table[r];
    if (row.size() < 6) throw ParseError("MATPOWER case: branch row with fewer than 6 columns");
    double status = row.size() > 10 ? row[10] : 1.0;
    if (status == 0.0) continue;
    Line line;
    line.from = static_cast<BusId>(row[0]);
    line.to = static_cast<BusId>(row[1]);
    line.reactance = row[3];
    double rate_a = row[5];
    line.limit = rate_a > 0.0 ? rate_a : kUnlimited;
    auto ov = overrides.find(static_cast<int>(r) + 1);
    if (ov != overrides.end()) line.limit = ov->second;
    net.lines.push_back(line);
  }

  if (gencost_table.size() < gen_table.size())
    throw ParseError("MATPOWER case: fewer gencost rows than generators");
  for (size_t g = 0; g < gen_table.size(); ++g) {
    const auto& row = gen_table[g];
    if (row.size() < 10) throw ParseError("MATPOWER case: gen row with fewer than 10 columns");
    double status = row.size() > 7 ? row[7] : 1.0;
    const auto& cost = gencost_table[g];
    if (cost.size() < 4) throw ParseError("MATPOWER case: gencost row with fewer than 4 columns");
    int model = static_cast<int>(cost[0]);
    if (model == 1) throw UnsupportedCost("generator " + std::to_string(g + 1) +
                                          ": piecewise-linear cost tables are not supported");
    if (model != 2)
      throw ParseError("MATPOWER case: unknown cost model " + std::to_string(model));
    int ncost = static_cast<int>(cost[3]);
    if (static_cast<int>(cost.size()) < 4 + ncost)
      throw ParseError("MATPOWER case: gencost row shorter than its NCOST");

    Generator gen;
    gen.bus = static_cast<BusId>(row[0]);
    gen.g_max = row[8];
    gen.g_min = row[9];
    // polynomial coefficients are listed highest degree first
    std::vector<double> coef(cost.begin() + 4, cost.begin() + 4 + ncost);
    for (int k = 0; k < ncost - 3; ++k) {
      if (coef[k] != 0.0)
        throw UnsupportedCost("generator " + std::to_string(g + 1) +
                              ": cost polynomial degree exceeds 2");
    }
    double c2 = ncost >= 3 ? coef[ncost - 3] : 0.0;
    double c1 = ncost >= 2 ? coef[ncost - 2] : 0.0;
    double c0 = ncost >= 1 ? coef[ncost - 1] : 0.0;
    gen.h = c2;
    gen.b = c1;
    gen.c0 = c0;
    if (status == 0.0) continue;
    net.generators.push_back(gen);
  }

  std::set<BusId> region1 = region1_from_annotation(ann);
  for (BusId b : net.buses) net.region_of[b] = region1.count(b) ? 1 : 2;

  for (int i = 0; i < static_cast<int>(net.lines.size()); ++i) {
    const Line& l = net.lines[i];
    if (net.region_of.at(l.from) != net.region_of.at(l.to)) net.tie_lines.push_back(i);
  }

  if (!ann.contains("proxy_buses"))
    throw ParseError("region annotation: missing 'proxy_buses'");
  for (int r : {1, 2}) {
    std::string key = std::to_string(r);
    if (!ann["proxy_buses"].contains(key))
      throw ParseError("region annotation: proxy_buses needs entry '" + key + "'");
    net.proxy[r - 1] = ann["proxy_buses"][key].get<BusId>();
  }

  if (ann.contains("interface")) {
    const json& itf = ann["interface"];
    if (itf.contains("Q_max")) net.q_max = itf["Q_max"].get<double>();
    net.q_min = itf.contains("Q_min") ? itf["Q_min"].get<double>()
                                      : (std::isfinite(net.q_max) ? -net.q_max : -kUnlimited);
  }

  validate(net);

  CaseFile out;
  out.network = std::move(net);
  if (ann.contains("wind")) {
    json wrapped;
    wrapped["forecasts"] = ann["wind"];
    out.forecast = parse_forecast_section(wrapped, out.network);
  }
  return out;
}

}  // namespace tieopt
