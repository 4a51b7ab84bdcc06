#include "tieopt/dispatch.hpp"

#include <cmath>

#include "tieopt/errors.hpp"

namespace tieopt {

namespace {

// Generator-to-monitored-line coefficients: column per generator, the PTDF
// entry of its bus.
Eigen::MatrixXd line_coefficients(const RegionalModel& model) {
  const int m = static_cast<int>(model.monitored_lines.size());
  const int ng = static_cast<int>(model.generators.size());
  Eigen::MatrixXd A(m, ng);
  std::vector<int> gidx = model.generator_bus_index();
  for (int g = 0; g < ng; ++g) A.col(g) = model.S.col(gidx[g]);
  return A;
}

struct LineRows {
  Eigen::MatrixXd matrix;  // stacked upper then lower rows (finite limits only)
  Eigen::VectorXd rhs;
  std::vector<int> monitored;  // monitored-line index per upper row
  int upper_count = 0;
};

// Two-sided |S(g - d) + sign * s_q * q| <= F as <= rows over g.
LineRows build_line_rows(const RegionalModel& model, const Eigen::MatrixXd& coeff,
                         const Eigen::VectorXd& d, double q) {
  const int m = static_cast<int>(model.monitored_lines.size());
  Eigen::VectorXd offset = model.S * d - model.sign * model.s_q * q;  // flow = coeff*g - offset

  std::vector<int> finite;
  for (int i = 0; i < m; ++i)
    if (std::isfinite(model.line_limit(i))) finite.push_back(i);

  LineRows rows;
  rows.upper_count = static_cast<int>(finite.size());
  rows.matrix.resize(2 * finite.size(), coeff.cols());
  rows.rhs.resize(2 * finite.size());
  for (size_t k = 0; k < finite.size(); ++k) {
    int i = finite[k];
    rows.matrix.row(k) = coeff.row(i);
    rows.rhs(k) = model.line_limit(i) + offset(i);
    rows.matrix.row(finite.size() + k) = -coeff.row(i);
    rows.rhs(finite.size() + k) = model.line_limit(i) - offset(i);
    rows.monitored.push_back(i);
  }
  return rows;
}

double dispatch_cost(const RegionalModel& model, const Eigen::VectorXd& g) {
  double cost = 0.0;
  for (size_t j = 0; j < model.generators.size(); ++j) {
    const Generator& gen = model.generators[j];
    cost += gen.h * g(j) * g(j) + gen.b * g(j) + gen.c0;
  }
  return cost;
}

}  // namespace

DispatchSolution solve_regional_dispatch(const RegionalModel& model, double q,
                                         const Eigen::VectorXd& d,
                                         const DispatchOptions& options) {
  const int ng = static_cast<int>(model.generators.size());
  if (d.size() != static_cast<Eigen::Index>(model.bus_ids.size()))
    throw DimensionMismatch("load vector size does not match region buses");

  Eigen::MatrixXd coeff = line_coefficients(model);
  LineRows rows = build_line_rows(model, coeff, d, q);

  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Zero(ng, ng);
  qp.linear.resize(ng);
  qp.lower.resize(ng);
  qp.upper.resize(ng);
  for (int j = 0; j < ng; ++j) {
    qp.hessian(j, j) = 2.0 * model.generators[j].h;
    qp.linear(j) = model.generators[j].b;
    qp.lower(j) = model.generators[j].g_min;
    qp.upper(j) = model.generators[j].g_max;
  }
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, ng, -1.0);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, -(d.sum() + model.sign * q));
  qp.in_matrix = rows.matrix;
  qp.in_rhs = rows.rhs;

  QpOptions qopt;
  qopt.feas_tol = options.feas_tol;
  qopt.stat_tol = options.stat_tol;
  qopt.warm_start = options.warm_start;
  QpSolution qsol = solve_convex_qp(qp, qopt);

  if (qsol.status == QpStatus::Infeasible)
    throw InfeasibleDispatch("region " + std::to_string(model.region) +
                             " has no feasible dispatch at q = " + std::to_string(q));
  if (qsol.status != QpStatus::Optimal)
    throw NumericalFailure("regional dispatch did not reach an optimum");

  DispatchSolution out;
  out.region = model.region;
  out.q = q;
  out.load = d;
  out.dispatch = qsol.x;
  out.balance_price = qsol.eq_duals(0);
  out.degenerate = qsol.degenerate;
  out.active_set = qsol.active_set;
  out.cost = dispatch_cost(model, qsol.x);

  const int m = static_cast<int>(model.monitored_lines.size());
  out.line_duals = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < rows.upper_count; ++k) {
    int i = rows.monitored[k];
    out.line_duals(i) = qsol.in_duals(k) - qsol.in_duals(rows.upper_count + k);
  }
  out.flows = coeff * qsol.x - (model.S * d - model.sign * model.s_q * q);
  return out;
}

bool regional_dispatch_feasible(const RegionalModel& model, double q,
                                const Eigen::VectorXd& d) {
  try {
    solve_regional_dispatch(model, q, d);
    return true;
  } catch (const InfeasibleDispatch&) {
    return false;
  }
}

double proxy_price(const DispatchSolution& solution, const RegionalModel& model) {
  if (solution.line_duals.size() != model.s_q.size())
    throw DimensionMismatch("solution does not match model's monitored lines");
  return solution.balance_price + model.s_q.dot(solution.line_duals);
}

JointSolution solve_centralized(const Network& network, const Eigen::VectorXd& d1,
                                const Eigen::VectorXd& d2,
                                const CentralizedOptions& options) {
  RegionalModel m1 = build_regional_view(network, 1);
  RegionalModel m2 = build_regional_view(network, 2);
  const int n1 = static_cast<int>(m1.generators.size());
  const int n2 = static_cast<int>(m2.generators.size());
  const int n = n1 + n2 + 1;  // interchange is the last variable
  const int qi = n - 1;

  if (d1.size() != static_cast<Eigen::Index>(m1.bus_ids.size()) ||
      d2.size() != static_cast<Eigen::Index>(m2.bus_ids.size()))
    throw DimensionMismatch("load vector sizes do not match regional views");

  Eigen::MatrixXd coeff1 = line_coefficients(m1);
  Eigen::MatrixXd coeff2 = line_coefficients(m2);
  LineRows rows1 = build_line_rows(m1, coeff1, d1, 0.0);
  LineRows rows2 = build_line_rows(m2, coeff2, d2, 0.0);
  const int l1 = static_cast<int>(rows1.matrix.rows());
  const int l2 = static_cast<int>(rows2.matrix.rows());

  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Zero(n, n);
  qp.linear = Eigen::VectorXd::Zero(n);
  qp.lower.resize(n);
  qp.upper.resize(n);
  for (int j = 0; j < n1; ++j) {
    qp.hessian(j, j) = 2.0 * m1.generators[j].h;
    qp.linear(j) = m1.generators[j].b;
    qp.lower(j) = m1.generators[j].g_min;
    qp.upper(j) = m1.generators[j].g_max;
  }
  for (int j = 0; j < n2; ++j) {
    qp.hessian(n1 + j, n1 + j) = 2.0 * m2.generators[j].h;
    qp.linear(n1 + j) = m2.generators[j].b;
    qp.lower(n1 + j) = m2.generators[j].g_min;
    qp.upper(n1 + j) = m2.generators[j].g_max;
  }
  qp.lower(qi) = network.q_min;
  qp.upper(qi) = std::min(network.q_max, options.q_max_override);

  qp.eq_matrix = Eigen::MatrixXd::Zero(2, n);
  qp.eq_rhs.resize(2);
  qp.eq_matrix.block(0, 0, 1, n1).setConstant(-1.0);
  qp.eq_matrix(0, qi) = 1.0;
  qp.eq_rhs(0) = -d1.sum();
  qp.eq_matrix.block(1, n1, 1, n2).setConstant(-1.0);
  qp.eq_matrix(1, qi) = -1.0;
  qp.eq_rhs(1) = -d2.sum();

  // Monitored flows as functions of (g, q); the rhs from build_line_rows is
  // for q = 0, so move the q term into the constraint matrix.
  qp.in_matrix = Eigen::MatrixXd::Zero(l1 + l2, n);
  qp.in_rhs.resize(l1 + l2);
  qp.in_matrix.block(0, 0, l1, n1) = rows1.matrix;
  qp.in_rhs.head(l1) = rows1.rhs;
  for (int k = 0; k < rows1.upper_count; ++k) {
    int i = rows1.monitored[k];
    qp.in_matrix(k, qi) = m1.sign * m1.s_q(i);
    qp.in_matrix(rows1.upper_count + k, qi) = -m1.sign * m1.s_q(i);
  }
  qp.in_matrix.block(l1, n1, l2, n2) = rows2.matrix;
  qp.in_rhs.tail(l2) = rows2.rhs;
  for (int k = 0; k < rows2.upper_count; ++k) {
    int i = rows2.monitored[k];
    qp.in_matrix(l1 + k, qi) = m2.sign * m2.s_q(i);
    qp.in_matrix(l1 + rows2.upper_count + k, qi) = -m2.sign * m2.s_q(i);
  }

  QpOptions qopt;
  qopt.feas_tol = options.feas_tol;
  qopt.stat_tol = options.stat_tol;
  QpSolution qsol = solve_convex_qp(qp, qopt);
  if (qsol.status == QpStatus::Infeasible)
    throw InfeasibleDispatch("no jointly feasible dispatch and interchange");
  if (qsol.status != QpStatus::Optimal)
    throw NumericalFailure("centralized dispatch did not reach an optimum");

  JointSolution joint;
  joint.q = qsol.x(qi);
  joint.interface_dual = qsol.upper_duals(qi);

  auto fill_region = [&](const RegionalModel& model, const LineRows& rows,
                         const Eigen::MatrixXd& coeff, const Eigen::VectorXd& d, int offset,
                         int row_offset, int ng) {
    DispatchSolution r;
    r.region = model.region;
    r.q = joint.q;
    r.load = d;
    r.dispatch = qsol.x.segment(offset, ng);
    r.balance_price = qsol.eq_duals(model.region - 1);
    r.degenerate = qsol.degenerate;
    const int m = static_cast<int>(model.monitored_lines.size());
    r.line_duals = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < rows.upper_count; ++k) {
      int i = rows.monitored[k];
      r.line_duals(i) =
          qsol.in_duals(row_offset + k) - qsol.in_duals(row_offset + rows.upper_count + k);
    }
    r.flows = coeff * r.dispatch - (model.S * d - model.sign * model.s_q * joint.q);
    r.cost = dispatch_cost(model, r.dispatch);
    return r;
  };
  joint.region1 = fill_region(m1, rows1, coeff1, d1, 0, 0, n1);
  joint.region2 = fill_region(m2, rows2, coeff2, d2, n1, l1, n2);
  joint.total_cost = joint.region1.cost + joint.region2.cost;
  return joint;
}

}  // namespace tieopt
