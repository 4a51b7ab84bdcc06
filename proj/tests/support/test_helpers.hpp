#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tieopt/caseio.hpp"
#include "tieopt/errors.hpp"
#include "tieopt/network.hpp"
#include "tieopt/qp.hpp"

namespace testsupport {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(static_cast<bool>(in), "cannot open " << path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string case_path(const std::string& name) {
  return std::string(TIEOPT_CASES_DIR) + "/" + name;
}

inline tieopt::CaseFile load_sixbus() {
  return tieopt::parse_case_file(read_file(case_path("sixbus.json")));
}

// bus 1 (region 1, generator) -- tie -- bus 2 (region 2, generator)
inline tieopt::Network two_bus(double b1 = 10.0, double b2 = 45.0, double load2 = 100.0,
                               double cap = 200.0) {
  tieopt::Network net;
  net.buses = {1, 2};
  net.lines = {{1, 2, 0.1, tieopt::kUnlimited}};
  net.generators = {{1, 0.01, b1, 0.0, cap, 0.0}, {2, 0.01, b2, 0.0, cap, 0.0}};
  net.loads = {{2, load2}};
  net.region_of = {{1, 1}, {2, 2}};
  net.tie_lines = {0};
  net.proxy = {2, 1};
  net.q_max = 200.0;
  net.q_min = -200.0;
  tieopt::validate(net);
  return net;
}

// --- independent re-solve: projected gradient ascent on the dual ---------
//
// Folds bounds into inequality rows, eliminates x through the strictly
// convex Hessian and climbs the dual with FISTA, projecting the inequality
// multipliers onto z >= 0. Returns the best dual value found, a lower bound
// on the optimal objective that tightens to it as iterations grow.
struct PgResult {
  double dual_objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// target: optional early-exit threshold (stop once the lower bound reaches
// it); the caller's assertion still validates the final gap.
inline PgResult projected_gradient_solve(
    const tieopt::QuadraticProgram& qp, int max_iterations = 300000,
    double target = std::numeric_limits<double>::infinity()) {
  const int n = qp.num_vars();
  Eigen::MatrixXd H = qp.hessian;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  REQUIRE(llt.info() == Eigen::Success);  // oracle needs a strictly convex problem

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  const int m_eq = qp.eq_matrix.size() ? qp.eq_matrix.rows() : 0;
  for (int i = 0; i < m_eq; ++i) {
    rows.push_back(qp.eq_matrix.row(i).transpose());
    rhs.push_back(qp.eq_rhs(i));
  }
  const int m_in = qp.in_matrix.size() ? qp.in_matrix.rows() : 0;
  for (int i = 0; i < m_in; ++i) {
    rows.push_back(qp.in_matrix.row(i).transpose());
    rhs.push_back(qp.in_rhs(i));
  }
  for (int j = 0; j < n; ++j) {
    if (qp.lower.size() && std::isfinite(qp.lower(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = -1;
      rows.push_back(e);
      rhs.push_back(-qp.lower(j));
    }
    if (qp.upper.size() && std::isfinite(qp.upper(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = 1;
      rows.push_back(e);
      rhs.push_back(qp.upper(j));
    }
  }
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd M(m, n);
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) {
    M.row(i) = rows[i].transpose();
    r(i) = rhs[i];
  }

  auto x_of = [&](const Eigen::VectorXd& mult) -> Eigen::VectorXd {
    return llt.solve(-(qp.linear + M.transpose() * mult));
  };
  auto theta = [&](const Eigen::VectorXd& mult) {
    Eigen::VectorXd x = x_of(mult);
    return 0.5 * x.dot(H * x) + qp.linear.dot(x) + mult.dot(M * x - r);
  };

  if (m == 0) {
    PgResult out;
    out.dual_objective = theta(Eigen::VectorXd::Zero(0));
    return out;
  }

  Eigen::MatrixXd MHM = M * llt.solve(M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(MHM);
  double lip = es.eigenvalues().maxCoeff();
  double step = 1.0 / std::max(lip, 1e-12);

  // FISTA with gradient restarts; theta is concave and smooth, so the value
  // converges even when the multipliers are not unique.
  Eigen::VectorXd mult = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd carry = mult;
  double t_acc = 1.0;
  PgResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd grad = M * x_of(carry) - r;
    Eigen::VectorXd next = carry + step * grad;
    for (int i = m_eq; i < m; ++i) next(i) = std::max(0.0, next(i));
    if (grad.dot(next - mult) < 0.0) t_acc = 1.0;  // restart on overshoot
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    carry = next + ((t_acc - 1.0) / t_next) * (next - mult);
    mult = next;
    t_acc = t_next;
    out.iterations = it + 1;
    if ((it & 31) == 0) {
      best = std::max(best, theta(mult));
      if (best >= target) break;
    }
  }
  best = std::max(best, theta(mult));
  out.dual_objective = best;
  return out;
}

// --- brute-force KKT enumeration for tiny problems ------------------------
//
// Enumerates active subsets of the inequalities (rows + finite bounds),
// solves each equality-constrained KKT system and keeps the unique
// primal-feasible, dual-feasible point. Exponential; n and row counts must
// stay single-digit.
inline std::optional<tieopt::QpSolution> kkt_enumerate(const tieopt::QuadraticProgram& qp) {
  const int n = qp.num_vars();
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  const int m_in = qp.in_matrix.size() ? qp.in_matrix.rows() : 0;
  for (int i = 0; i < m_in; ++i) {
    rows.push_back(qp.in_matrix.row(i).transpose());
    rhs.push_back(qp.in_rhs(i));
  }
  for (int j = 0; j < n; ++j) {
    if (qp.lower.size() && std::isfinite(qp.lower(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = -1;
      rows.push_back(e);
      rhs.push_back(-qp.lower(j));
    }
    if (qp.upper.size() && std::isfinite(qp.upper(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = 1;
      rows.push_back(e);
      rhs.push_back(qp.upper(j));
    }
  }
  const int m = static_cast<int>(rows.size());
  const int m_eq = qp.eq_matrix.size() ? qp.eq_matrix.rows() : 0;
  REQUIRE(m <= 20);

  std::optional<tieopt::QpSolution> best;
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (mask & (1ul << i)) active.push_back(i);
    int q = m_eq + static_cast<int>(active.size());
    if (q > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + q, n + q);
    kkt.topLeftCorner(n, n) = qp.hessian;
    Eigen::VectorXd b(n + q);
    b.head(n) = -qp.linear;
    for (int i = 0; i < m_eq; ++i) {
      kkt.block(0, n + i, n, 1) = qp.eq_matrix.row(i).transpose();
      kkt.block(n + i, 0, 1, n) = qp.eq_matrix.row(i);
      b(n + i) = qp.eq_rhs(i);
    }
    for (size_t k = 0; k < active.size(); ++k) {
      kkt.block(0, n + m_eq + k, n, 1) = rows[active[k]];
      kkt.block(n + m_eq + k, 0, 1, n) = rows[active[k]].transpose();
      b(n + m_eq + k) = rhs[active[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd sol = lu.solve(b);
    Eigen::VectorXd x = sol.head(n);

    bool ok = true;
    for (int i = 0; i < m && ok; ++i)
      if (rows[i].dot(x) > rhs[i] + 1e-8) ok = false;
    for (size_t k = 0; k < active.size() && ok; ++k)
      if (sol(n + m_eq + k) < -1e-8) ok = false;
    if (!ok) continue;

    tieopt::QpSolution cand;
    cand.x = x;
    cand.objective = 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x);
    cand.status = tieopt::QpStatus::Optimal;
    cand.eq_duals = sol.segment(n, m_eq);
    cand.in_duals = Eigen::VectorXd::Zero(m_in);
    cand.lower_duals = Eigen::VectorXd::Zero(n);
    cand.upper_duals = Eigen::VectorXd::Zero(n);
    int bound_cursor = m_in;
    std::vector<int> bound_kind;  // parallel to rows beyond m_in
    (void)bound_cursor;
    (void)bound_kind;
    for (size_t k = 0; k < active.size(); ++k) {
      int idx = active[k];
      double dual = sol(n + m_eq + k);
      if (idx < m_in) {
        cand.in_duals(idx) = dual;
      } else {
        // bounds were appended lower-then-upper per variable in order
        int pos = idx - m_in;
        int j = 0, seen = -1;
        for (j = 0; j < n; ++j) {
          if (qp.lower.size() && std::isfinite(qp.lower(j))) {
            if (++seen == pos) {
              cand.lower_duals(j) = dual;
              break;
            }
          }
          if (qp.upper.size() && std::isfinite(qp.upper(j))) {
            if (++seen == pos) {
              cand.upper_duals(j) = dual;
              break;
            }
          }
        }
      }
    }
    if (!best || cand.objective < best->objective - 1e-12) best = cand;
  }
  return best;
}

}  // namespace testsupport
