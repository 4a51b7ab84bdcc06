#include "tieopt/ptdf.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "tieopt/errors.hpp"

namespace tieopt {

int ShiftFactorMatrix::column_of(BusId bus) const {
  auto it = std::find(bus_order.begin(), bus_order.end(), bus);
  if (it == bus_order.end())
    throw ValidationError("bus " + std::to_string(bus) + " not in shift factor matrix");
  return static_cast<int>(it - bus_order.begin());
}

Eigen::VectorXd ShiftFactorMatrix::transfer(BusId from, BusId to) const {
  return factors.col(column_of(from)) - factors.col(column_of(to));
}

namespace {

void require_connected(const Network& network) {
  if (network.buses.empty()) throw SingularNetwork("empty network");
  std::map<BusId, std::vector<BusId>> adj;
  for (const Line& l : network.lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::set<BusId> seen;
  std::queue<BusId> frontier;
  frontier.push(network.buses.front());
  seen.insert(network.buses.front());
  while (!frontier.empty()) {
    BusId b = frontier.front();
    frontier.pop();
    for (BusId n : adj[b])
      if (seen.insert(n).second) frontier.push(n);
  }
  if (seen.size() != network.buses.size())
    throw SingularNetwork("network graph is disconnected");
}

}  // namespace

ShiftFactorMatrix build_ptdf(const Network& network, BusId slack) {
  if (!network.has_bus(slack))
    throw ValidationError("slack bus " + std::to_string(slack) + " is not a known bus");
  for (const Line& l : network.lines)
    if (!(l.reactance > 0.0)) throw SingularNetwork("line with non-positive reactance");
  require_connected(network);

  const int n = static_cast<int>(network.buses.size());
  const int m = static_cast<int>(network.lines.size());

  std::map<BusId, int> col;
  for (int k = 0; k < n; ++k) col[network.buses[k]] = k;
  const int slack_col = col.at(slack);

  // Susceptance Laplacian B = A' diag(1/x) A over all buses.
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (const Line& l : network.lines) {
    double y = 1.0 / l.reactance;
    int a = col.at(l.from), b = col.at(l.to);
    laplacian(a, a) += y;
    laplacian(b, b) += y;
    laplacian(a, b) -= y;
    laplacian(b, a) -= y;
  }

  // Reduce by deleting the slack row/column, invert, and re-embed.
  Eigen::MatrixXd reduced(n - 1, n - 1);
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int k = 0; k < n; ++k)
    if (k != slack_col) keep.push_back(k);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) reduced(i, j) = laplacian(keep[i], keep[j]);

  Eigen::LDLT<Eigen::MatrixXd> factor(reduced);
  if (factor.info() != Eigen::Success)
    throw SingularNetwork("susceptance matrix factorization failed");
  Eigen::MatrixXd theta_reduced = factor.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
  double solve_err = (reduced * theta_reduced - Eigen::MatrixXd::Identity(n - 1, n - 1))
                         .cwiseAbs()
                         .maxCoeff();
  if (!std::isfinite(solve_err) || solve_err > 1e-6)
    throw SingularNetwork("susceptance matrix is numerically singular");

  // theta(k, j): angle at kept bus k for unit injection at kept bus j.
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) theta(keep[i], keep[j]) = theta_reduced(i, j);

  ShiftFactorMatrix sf;
  sf.slack = slack;
  sf.bus_order = network.buses;
  sf.factors.resize(m, n);
  for (int l = 0; l < m; ++l) {
    const Line& line = network.lines[l];
    double y = 1.0 / line.reactance;
    int a = col.at(line.from), b = col.at(line.to);
    for (int j = 0; j < n; ++j) sf.factors(l, j) = y * (theta(a, j) - theta(b, j));
  }
  sf.factors.col(slack_col).setZero();
  return sf;
}

Eigen::VectorXd dc_flow(const Network& network, const Eigen::VectorXd& injections,
                        BusId slack) {
  const int n = static_cast<int>(network.buses.size());
  if (injections.size() != n) throw DimensionMismatch("injection vector size mismatch");
  require_connected(network);

  std::map<BusId, int> col;
  for (int k = 0; k < n; ++k) col[network.buses[k]] = k;
  const int slack_col = col.at(slack);

  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (const Line& l : network.lines) {
    double y = 1.0 / l.reactance;
    int a = col.at(l.from), b = col.at(l.to);
    laplacian(a, a) += y;
    laplacian(b, b) += y;
    laplacian(a, b) -= y;
    laplacian(b, a) -= y;
  }

  std::vector<int> keep;
  for (int k = 0; k < n; ++k)
    if (k != slack_col) keep.push_back(k);
  Eigen::MatrixXd reduced(n - 1, n - 1);
  Eigen::VectorXd rhs(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    rhs(i) = injections(keep[i]);
    for (int j = 0; j < n - 1; ++j) reduced(i, j) = laplacian(keep[i], keep[j]);
  }
  Eigen::VectorXd theta_reduced = reduced.ldlt().solve(rhs);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n - 1; ++i) theta(keep[i]) = theta_reduced(i);

  Eigen::VectorXd flows(network.lines.size());
  for (int l = 0; l < static_cast<int>(network.lines.size()); ++l) {
    const Line& line = network.lines[l];
    flows(l) = (theta(col.at(line.from)) - theta(col.at(line.to))) / line.reactance;
  }
  return flows;
}

}  // namespace tieopt
