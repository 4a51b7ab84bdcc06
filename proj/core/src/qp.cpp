#include "tieopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tieopt/errors.hpp"

namespace tieopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal inequality ids: [0, m_in) are in_matrix rows, then per variable j
// id m_in + 2j is the lower bound and m_in + 2j + 1 the upper bound.
struct IneqView {
  const QuadraticProgram& qp;
  int m_in;
  int n;

  int count() const { return m_in + 2 * n; }

  bool exists(int id) const {
    if (id < m_in) return true;
    int j = (id - m_in) / 2;
    bool lower = ((id - m_in) % 2) == 0;
    double v = lower ? (qp.lower.size() ? qp.lower(j) : -kInf)
                     : (qp.upper.size() ? qp.upper(j) : kInf);
    return std::isfinite(v);
  }

  // normal' x <= rhs
  Eigen::VectorXd normal(int id) const {
    if (id < m_in) return qp.in_matrix.row(id).transpose();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    int j = (id - m_in) / 2;
    e(j) = ((id - m_in) % 2) == 0 ? -1.0 : 1.0;
    return e;
  }

  double rhs(int id) const {
    if (id < m_in) return qp.in_rhs(id);
    int j = (id - m_in) / 2;
    return ((id - m_in) % 2) == 0 ? -qp.lower(j) : qp.upper(j);
  }

  double slack(int id, const Eigen::VectorXd& x) const {
    if (id < m_in) return qp.in_matrix.row(id) * x - qp.in_rhs(id);
    int j = (id - m_in) / 2;
    return ((id - m_in) % 2) == 0 ? qp.lower(j) - x(j) : x(j) - qp.upper(j);
  }
};

struct ActiveSetState {
  int n = 0;
  int q = 0;               // active count
  Eigen::MatrixXd J;       // n x n
  Eigen::MatrixXd R;       // n x n, upper-left q x q in use
  std::vector<int> ids;    // negative: -(eq index)-1, nonnegative: inequality id
  std::vector<double> u;   // duals aligned with ids
  double r_norm = 1.0;
};

// Rotate d's tail to a single component and absorb the rotations into J;
// append the new R column. Returns false when the normal is linearly
// dependent on the active set.
bool add_to_basis(ActiveSetState& st, Eigen::VectorXd& d) {
  const int n = st.n, q = st.q;
  for (int j = n - 1; j >= q + 1; --j) {
    double cc = d(j - 1), ss = d(j);
    double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    double c = cc / h, s = ss / h;
    d(j - 1) = h;
    d(j) = 0.0;
    Eigen::VectorXd t1 = st.J.col(j - 1), t2 = st.J.col(j);
    st.J.col(j - 1) = c * t1 + s * t2;
    st.J.col(j) = -s * t1 + c * t2;
  }
  if (std::abs(d(q)) <= 1e-12 * st.r_norm) return false;
  st.R.col(q).head(q + 1) = d.head(q + 1);
  st.q = q + 1;
  st.r_norm = std::max(st.r_norm, std::abs(d(q)));
  return true;
}

// Remove active constraint at position l and restore R to triangular form.
void drop_from_basis(ActiveSetState& st, int l) {
  int q = st.q;
  st.ids.erase(st.ids.begin() + l);
  st.u.erase(st.u.begin() + l);
  for (int j = l; j < q - 1; ++j) st.R.col(j).head(q) = st.R.col(j + 1).head(q);
  st.R.col(q - 1).head(q).setZero();
  st.q = --q;
  for (int j = l; j < q; ++j) {
    double cc = st.R(j, j), ss = st.R(j + 1, j);
    double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    double c = cc / h, s = ss / h;
    for (int k = j; k < q; ++k) {
      double a = st.R(j, k), b = st.R(j + 1, k);
      st.R(j, k) = c * a + s * b;
      st.R(j + 1, k) = -s * a + c * b;
    }
    Eigen::VectorXd t1 = st.J.col(j), t2 = st.J.col(j + 1);
    st.J.col(j) = c * t1 + s * t2;
    st.J.col(j + 1) = -s * t1 + c * t2;
  }
}

struct Residuals {
  KktResiduals kkt;
  double worst_neg_dual = 0.0;
};

Residuals evaluate_kkt(const QuadraticProgram& qp, const QpSolution& sol) {
  const int n = qp.num_vars();
  Eigen::VectorXd grad = qp.linear;
  if (qp.hessian.size()) grad += qp.hessian * sol.x;
  if (qp.eq_matrix.size()) grad += qp.eq_matrix.transpose() * sol.eq_duals;
  if (qp.in_matrix.size()) grad += qp.in_matrix.transpose() * sol.in_duals;
  for (int j = 0; j < n; ++j) {
    if (sol.lower_duals.size()) grad(j) -= sol.lower_duals(j);
    if (sol.upper_duals.size()) grad(j) += sol.upper_duals(j);
  }

  Residuals out;
  out.kkt.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

  double feas = 0.0, comp = 0.0, neg = 0.0;
  if (qp.eq_matrix.size()) {
    Eigen::VectorXd r = qp.eq_matrix * sol.x - qp.eq_rhs;
    feas = std::max(feas, r.cwiseAbs().maxCoeff());
  }
  if (qp.in_matrix.size()) {
    Eigen::VectorXd s = qp.in_matrix * sol.x - qp.in_rhs;
    for (int i = 0; i < s.size(); ++i) {
      feas = std::max(feas, s(i));
      comp = std::max(comp, std::abs(sol.in_duals(i) * std::min(s(i), 0.0)));
      neg = std::min(neg, sol.in_duals(i));
    }
  }
  for (int j = 0; j < n; ++j) {
    if (qp.lower.size() && std::isfinite(qp.lower(j))) {
      double s = qp.lower(j) - sol.x(j);
      feas = std::max(feas, s);
      comp = std::max(comp, std::abs(sol.lower_duals(j) * std::min(s, 0.0)));
      neg = std::min(neg, sol.lower_duals(j));
    }
    if (qp.upper.size() && std::isfinite(qp.upper(j))) {
      double s = sol.x(j) - qp.upper(j);
      feas = std::max(feas, s);
      comp = std::max(comp, std::abs(sol.upper_duals(j) * std::min(s, 0.0)));
      neg = std::min(neg, sol.upper_duals(j));
    }
  }
  out.kkt.feasibility = feas;
  out.kkt.complementarity = comp;
  out.worst_neg_dual = -neg;
  return out;
}

void scatter_duals(const IneqView& view, const ActiveSetState& st, QpSolution& sol,
                   const std::vector<double>& active_duals) {
  const int m_eq = static_cast<int>(sol.eq_duals.size());
  (void)m_eq;
  sol.eq_duals.setZero();
  sol.in_duals.setZero();
  sol.lower_duals.setZero();
  sol.upper_duals.setZero();
  for (size_t k = 0; k < st.ids.size(); ++k) {
    int id = st.ids[k];
    double val = active_duals[k];
    if (id < 0) {
      sol.eq_duals(-id - 1) = val;
    } else if (id < view.m_in) {
      sol.in_duals(id) = val;
    } else {
      int j = (id - view.m_in) / 2;
      if (((id - view.m_in) % 2) == 0)
        sol.lower_duals(j) = val;
      else
        sol.upper_duals(j) = val;
    }
  }
}

double objective_of(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  double v = qp.linear.dot(x);
  if (qp.hessian.size()) v += 0.5 * x.dot(qp.hessian * x);
  return v;
}

// Re-solve the KKT system of the final active set against the original
// (unregularized) Hessian. Returns false when the system is singular or the
// result is not a valid KKT point of the original problem.
bool purify(const QuadraticProgram& qp, const IneqView& view, const ActiveSetState& st,
            const QpOptions& opt, QpSolution& sol) {
  const int n = qp.num_vars();
  const int q = st.q;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + q, n + q);
  if (qp.hessian.size()) kkt.topLeftCorner(n, n) = qp.hessian;
  Eigen::VectorXd rhs(n + q);
  rhs.head(n) = -qp.linear;
  for (int k = 0; k < q; ++k) {
    int id = st.ids[k];
    Eigen::VectorXd nk;
    double bk;
    if (id < 0) {
      nk = qp.eq_matrix.row(-id - 1).transpose();
      bk = qp.eq_rhs(-id - 1);
    } else {
      nk = view.normal(id);
      bk = view.rhs(id);
    }
    kkt.block(0, n + k, n, 1) = nk;
    kkt.block(n + k, 0, 1, n) = nk.transpose();
    rhs(n + k) = bk;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd z = lu.solve(rhs);

  QpSolution cand = sol;
  cand.x = z.head(n);
  std::vector<double> duals(q);
  for (int k = 0; k < q; ++k) duals[k] = z(n + k);
  for (int k = 0; k < q; ++k)
    if (st.ids[k] >= 0 && duals[k] < -10 * opt.stat_tol) return false;
  for (int k = 0; k < q; ++k) duals[k] = std::max(duals[k], st.ids[k] >= 0 ? 0.0 : duals[k]);
  scatter_duals(view, st, cand, duals);
  Residuals res = evaluate_kkt(qp, cand);
  Residuals cur = evaluate_kkt(qp, sol);
  double cand_worst = std::max({res.kkt.stationarity, res.kkt.feasibility, res.kkt.complementarity});
  double cur_worst = std::max({cur.kkt.stationarity, cur.kkt.feasibility, cur.kkt.complementarity});
  if (cand_worst > cur_worst) return false;
  cand.objective = objective_of(qp, cand.x);
  cand.kkt = res.kkt;
  sol = cand;
  return true;
}

bool detect_degenerate_duals(const QuadraticProgram& qp, const IneqView& view,
                             const QpSolution& sol, double feas_tol) {
  const int n = qp.num_vars();
  std::vector<Eigen::VectorXd> normals;
  int m_eq = qp.eq_matrix.size() ? static_cast<int>(qp.eq_matrix.rows()) : 0;
  for (int i = 0; i < m_eq; ++i) normals.push_back(qp.eq_matrix.row(i).transpose());
  for (int id = 0; id < view.count(); ++id) {
    if (!view.exists(id)) continue;
    if (view.slack(id, sol.x) > -100 * feas_tol) normals.push_back(view.normal(id));
  }
  if (normals.empty()) return false;
  Eigen::MatrixXd N(n, normals.size());
  for (size_t k = 0; k < normals.size(); ++k) N.col(k) = normals[k];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(N);
  qr.setThreshold(1e-9);
  return qr.rank() < static_cast<Eigen::Index>(normals.size());
}

}  // namespace

QpSolution solve_convex_qp(const QuadraticProgram& qp, const QpOptions& options) {
  const int n = qp.num_vars();
  if (n == 0) throw DimensionMismatch("empty quadratic program");
  if (qp.hessian.size() && (qp.hessian.rows() != n || qp.hessian.cols() != n))
    throw DimensionMismatch("hessian dimensions inconsistent with linear term");
  const int m_eq = qp.eq_matrix.size() ? static_cast<int>(qp.eq_matrix.rows()) : 0;
  const int m_in = qp.in_matrix.size() ? static_cast<int>(qp.in_matrix.rows()) : 0;
  if (m_eq && qp.eq_matrix.cols() != n) throw DimensionMismatch("eq_matrix column count");
  if (m_eq && qp.eq_rhs.size() != m_eq) throw DimensionMismatch("eq_rhs size");
  if (m_in && qp.in_matrix.cols() != n) throw DimensionMismatch("in_matrix column count");
  if (m_in && qp.in_rhs.size() != m_in) throw DimensionMismatch("in_rhs size");
  if (qp.lower.size() && qp.upper.size()) {
    for (int j = 0; j < n; ++j)
      if (qp.lower(j) > qp.upper(j)) throw ValidationError("bounds lower > upper");
  }

  IneqView view{qp, m_in, n};

  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  sol.eq_duals = Eigen::VectorXd::Zero(m_eq);
  sol.in_duals = Eigen::VectorXd::Zero(m_in);
  sol.lower_duals = Eigen::VectorXd::Zero(n);
  sol.upper_duals = Eigen::VectorXd::Zero(n);

  // Cholesky with a deterministic ridge ladder for semidefinite Hessians.
  double scale = 1.0;
  if (qp.hessian.size()) scale = std::max(1.0, qp.hessian.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd G;
  double ridge = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double factor : {0.0, 1e-9, 1e-7, 1e-5}) {
    ridge = factor * scale;
    G = Eigen::MatrixXd::Identity(n, n) * ridge;
    if (qp.hessian.size()) G += qp.hessian;
    llt.compute(G);
    if (llt.info() == Eigen::Success) {
      // LLT can succeed on barely-indefinite input; verify the diagonal.
      if (llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-12 * std::sqrt(scale)) break;
    }
    if (factor == 1e-5) throw NumericalFailure("hessian factorization failed after regularization");
  }
  const bool regularized = ridge > 0.0;

  ActiveSetState st;
  st.n = n;
  st.J = llt.matrixL().toDenseMatrix().transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(n, n));
  st.R = Eigen::MatrixXd::Zero(n, n);

  // Unconstrained minimum of the (ridged) objective.
  Eigen::VectorXd x = llt.solve(-qp.linear);

  bool dependent_seen = false;

  // Install equality constraints first; they are never dropped.
  for (int i = 0; i < m_eq; ++i) {
    Eigen::VectorXd np = qp.eq_matrix.row(i).transpose();
    Eigen::VectorXd d = st.J.transpose() * np;
    int q = st.q;
    Eigen::VectorXd z = st.J.rightCols(n - q) * d.tail(n - q);
    Eigen::VectorXd r =
        q > 0 ? st.R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q))
              : Eigen::VectorXd();
    double denom = z.dot(np);
    double s = np.dot(x) - qp.eq_rhs(i);
    if (denom <= 1e-14 * std::max(1.0, np.squaredNorm())) {
      // normal lies in the span of the current active set
      if (std::abs(s) > options.feas_tol * std::max(1.0, std::abs(qp.eq_rhs(i)))) {
        sol.status = QpStatus::Infeasible;
        sol.iterations = 0;
        return sol;
      }
      dependent_seen = true;
      continue;
    }
    double t = s / denom;
    x -= t * z;
    for (int k = 0; k < q; ++k) st.u[k] -= t * r(k);
    Eigen::VectorXd dcopy = d;
    if (!add_to_basis(st, dcopy)) {
      dependent_seen = true;
      continue;
    }
    st.ids.push_back(-i - 1);
    st.u.push_back(t);
  }

  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 50 * (n + m_eq + m_in) + 200;
  int iter = 0;

  auto violation = [&](int id) { return view.slack(id, x) - options.feas_tol; };

  while (true) {
    if (++iter > max_iter) throw IterationLimit("active-set iteration limit exceeded");

    // Pick the next violated inequality: warm-start hints first, then the
    // most violated overall.
    int p = -1;
    for (int id : options.warm_start) {
      if (id >= 0 && id < view.count() && view.exists(id) &&
          std::find(st.ids.begin(), st.ids.end(), id) == st.ids.end() && violation(id) > 0) {
        p = id;
        break;
      }
    }
    if (p < 0) {
      double worst = 0.0;
      for (int id = 0; id < view.count(); ++id) {
        if (!view.exists(id)) continue;
        if (std::find(st.ids.begin(), st.ids.end(), id) != st.ids.end()) continue;
        double v = violation(id);
        if (v > worst) {
          worst = v;
          p = id;
        }
      }
    }
    if (p < 0) break;  // primal feasible: optimal

    Eigen::VectorXd np = view.normal(p);
    double u_p = 0.0;

    while (true) {
      if (++iter > max_iter) throw IterationLimit("active-set iteration limit exceeded");
      const int q = st.q;
      Eigen::VectorXd d = st.J.transpose() * np;
      Eigen::VectorXd z = st.J.rightCols(n - q) * d.tail(n - q);
      Eigen::VectorXd r =
          q > 0 ? st.R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q))
                : Eigen::VectorXd();

      // dual step limit among active inequalities
      double t1 = kInf;
      int blocking = -1;
      for (int k = 0; k < q; ++k) {
        if (st.ids[k] < 0) continue;
        if (r(k) > 1e-12) {
          double lim = st.u[k] / r(k);
          if (lim < t1) {
            t1 = lim;
            blocking = k;
          }
        }
      }
      double denom = z.dot(np);
      double s_p = np.dot(x) - view.rhs(p);
      double t2 = denom > 1e-14 * std::max(1.0, np.squaredNorm()) ? s_p / denom : kInf;
      double t = std::min(t1, t2);

      if (!std::isfinite(t)) {
        sol.status = QpStatus::Infeasible;
        sol.iterations = iter;
        return sol;
      }

      if (!std::isfinite(t2)) {
        // dual-only step, then retry the same constraint
        for (int k = 0; k < q; ++k) st.u[k] -= t * r(k);
        u_p += t;
        drop_from_basis(st, blocking);
        continue;
      }

      x -= t * z;
      for (int k = 0; k < q; ++k) st.u[k] -= t * r(k);
      u_p += t;

      if (t == t2) {
        Eigen::VectorXd dcopy = d;
        if (!add_to_basis(st, dcopy)) {
          // satisfied exactly but dependent; do not carry a basis column
          dependent_seen = true;
          break;
        }
        st.ids.push_back(p);
        st.u.push_back(u_p);
        break;
      }
      drop_from_basis(st, blocking);
    }
  }

  sol.x = x;
  scatter_duals(view, st, sol, st.u);
  sol.objective = objective_of(qp, x);
  sol.iterations = iter;
  sol.active_set.clear();
  for (int id : st.ids)
    if (id >= 0) sol.active_set.push_back(id);

  Residuals raw = evaluate_kkt(qp, sol);
  sol.kkt = raw.kkt;

  // The active-set path ran on the ridged Hessian; certify against the
  // original problem and fall back to the raw result when that fails.
  bool purified = purify(qp, view, st, options, sol);

  if (!purified && regularized) {
    // Unbounded originals surface as ridged solutions of size ~ scale/ridge.
    double data_scale = std::max(1.0, qp.linear.cwiseAbs().maxCoeff());
    if (sol.x.cwiseAbs().maxCoeff() > 1e-3 * data_scale / ridge) {
      sol.status = QpStatus::Unbounded;
      return sol;
    }
  }

  sol.degenerate = dependent_seen || detect_degenerate_duals(qp, view, sol, options.feas_tol);
  bool ok = sol.kkt.stationarity <= std::max(options.stat_tol, regularized && !purified
                                                                   ? 10 * ridge * sol.x.norm()
                                                                   : 0.0) &&
            sol.kkt.feasibility <= 10 * options.feas_tol;
  if (!ok) {
    // Residuals beyond tolerance: report honestly rather than claim optimality.
    if (sol.kkt.feasibility > 10 * options.feas_tol)
      throw NumericalFailure("qp solve left feasibility residual " +
                             std::to_string(sol.kkt.feasibility));
    throw NumericalFailure("qp solve left stationarity residual " +
                           std::to_string(sol.kkt.stationarity));
  }
  sol.status = QpStatus::Optimal;
  return sol;
}

}  // namespace tieopt
