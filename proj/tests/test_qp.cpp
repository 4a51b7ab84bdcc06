#include <doctest.h>

#include <random>

#include "test_helpers.hpp"
#include "tieopt/errors.hpp"
#include "tieopt/qp.hpp"

using namespace tieopt;

namespace {

QuadraticProgram make_qp(int n) {
  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Zero(n, n);
  qp.linear = Eigen::VectorXd::Zero(n);
  return qp;
}

// random strictly convex QP with a known feasible point
QuadraticProgram random_qp(std::mt19937_64& rng, int max_vars = 50) {
  std::uniform_int_distribution<int> nvars(1, max_vars);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = nvars(rng);
  QuadraticProgram qp = make_qp(n);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = unit(rng);
  qp.hessian = B.transpose() * B + 0.3 * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) qp.linear(i) = 10 * unit(rng);

  Eigen::VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = 2 * unit(rng);

  int m_eq = static_cast<int>(rng() % std::max(1, n / 3));
  if (m_eq) {
    qp.eq_matrix.resize(m_eq, n);
    for (int i = 0; i < m_eq; ++i)
      for (int j = 0; j < n; ++j) qp.eq_matrix(i, j) = unit(rng);
    qp.eq_rhs = qp.eq_matrix * x0;
  }
  int m_in = static_cast<int>(rng() % (2 * n + 1));
  if (m_in) {
    qp.in_matrix.resize(m_in, n);
    qp.in_rhs.resize(m_in);
    std::uniform_real_distribution<double> slack(0.0, 2.0);
    for (int i = 0; i < m_in; ++i) {
      for (int j = 0; j < n; ++j) qp.in_matrix(i, j) = unit(rng);
      qp.in_rhs(i) = qp.in_matrix.row(i) * x0 + slack(rng);
    }
  }
  if (rng() % 2) {
    qp.lower.resize(n);
    qp.upper.resize(n);
    std::uniform_real_distribution<double> pad(0.1, 3.0);
    for (int j = 0; j < n; ++j) {
      qp.lower(j) = x0(j) - pad(rng);
      qp.upper(j) = x0(j) + pad(rng);
    }
  }
  return qp;
}

}  // namespace

TEST_CASE("scalar bound: min x^2 with x >= 1") {
  // as a bound
  QuadraticProgram qp = make_qp(1);
  qp.hessian(0, 0) = 2.0;
  qp.lower = Eigen::VectorXd::Constant(1, 1.0);
  qp.upper = Eigen::VectorXd::Constant(1, kUnlimited);
  QpSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.lower_duals(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-10));

  // same constraint as a general inequality row -x <= -1
  QuadraticProgram qp2 = make_qp(1);
  qp2.hessian(0, 0) = 2.0;
  qp2.in_matrix = Eigen::MatrixXd::Constant(1, 1, -1.0);
  qp2.in_rhs = Eigen::VectorXd::Constant(1, -1.0);
  QpSolution sol2 = solve_convex_qp(qp2);
  REQUIRE(sol2.status == QpStatus::Optimal);
  CHECK(sol2.in_duals(0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("symmetric equality: min x^2+y^2 with x+y=2") {
  QuadraticProgram qp = make_qp(2);
  qp.hessian = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, 2, 1.0);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, 2.0);
  QpSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.eq_duals(0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single generator marginal cost") {
  // min 0.01 g^2 + 10 g  s.t. g = 100, 0 <= g <= 120
  QuadraticProgram qp = make_qp(1);
  qp.hessian(0, 0) = 0.02;
  qp.linear(0) = 10.0;
  qp.eq_matrix = Eigen::MatrixXd::Constant(1, 1, 1.0);
  qp.eq_rhs = Eigen::VectorXd::Constant(1, 100.0);
  qp.lower = Eigen::VectorXd::Constant(1, 0.0);
  qp.upper = Eigen::VectorXd::Constant(1, 120.0);
  QpSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(100.0));
  CHECK(sol.eq_duals(0) == doctest::Approx(-12.0).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(1100.0).epsilon(1e-12));
}

TEST_CASE("conflicting constraints are infeasible") {
  QuadraticProgram qp = make_qp(1);
  qp.hessian(0, 0) = 2.0;
  qp.in_matrix.resize(2, 1);
  qp.in_matrix << 1.0, -1.0;
  qp.in_rhs.resize(2);
  qp.in_rhs << 0.0, -1.0;  // x <= 0 and x >= 1
  CHECK(solve_convex_qp(qp).status == QpStatus::Infeasible);
}

TEST_CASE("linear descent without curvature is unbounded") {
  QuadraticProgram qp = make_qp(1);
  qp.linear(0) = -1.0;
  qp.lower = Eigen::VectorXd::Constant(1, 0.0);
  qp.upper = Eigen::VectorXd::Constant(1, kUnlimited);
  CHECK(solve_convex_qp(qp).status == QpStatus::Unbounded);
}

TEST_CASE("semidefinite hessian still yields exact duals") {
  // one quadratic leg, one linear leg pinned by bounds
  QuadraticProgram qp = make_qp(2);
  qp.hessian(0, 0) = 2.0;
  qp.linear << 0.0, 1.0;
  qp.eq_matrix.resize(1, 2);
  qp.eq_matrix << 1.0, 1.0;
  qp.eq_rhs = Eigen::VectorXd::Constant(1, 1.0);
  qp.lower = Eigen::VectorXd::Constant(2, -5.0);
  qp.upper = Eigen::VectorXd::Constant(2, 5.0);
  QpSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  // stationarity in y: 1 + dual = 0; in x: 2x + dual = 0 -> x = 1/2
  CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.x(1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.eq_duals(0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sol.kkt.stationarity < 1e-7);
}

TEST_CASE("duplicate constraints flag dual degeneracy") {
  QuadraticProgram qp = make_qp(1);
  qp.hessian(0, 0) = 2.0;
  qp.in_matrix.resize(2, 1);
  qp.in_matrix << -1.0, -1.0;
  qp.in_rhs.resize(2);
  qp.in_rhs << -1.0, -1.0;  // x >= 1 twice
  QpSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0));
  CHECK(sol.degenerate);
}

TEST_CASE("perturbing an inactive constraint leaves the solution alone") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticProgram qp = random_qp(rng, 12);
    if (!qp.in_matrix.size()) continue;
    QpSolution sol = solve_convex_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    int loose = -1;
    for (int i = 0; i < qp.in_matrix.rows(); ++i) {
      double slack = qp.in_rhs(i) - qp.in_matrix.row(i) * sol.x;
      if (slack > 0.5) loose = i;
    }
    if (loose < 0) continue;
    QuadraticProgram pert = qp;
    pert.in_rhs(loose) += 0.3;  // still inactive
    QpSolution sol2 = solve_convex_qp(pert);
    REQUIRE(sol2.status == QpStatus::Optimal);
    CHECK((sol.x - sol2.x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sol.objective == doctest::Approx(sol2.objective).epsilon(1e-10));
  }
}

TEST_CASE("random QPs agree with the projected-gradient re-solve") {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    QuadraticProgram qp = random_qp(rng);
    QpSolution sol = solve_convex_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.kkt.stationarity <= 1e-7);
    CHECK(sol.kkt.feasibility <= 1e-7);
    CHECK(sol.kkt.complementarity <= 1e-6);

    double scale = 1.0 + std::abs(sol.objective);
    testsupport::PgResult pg =
        testsupport::projected_gradient_solve(qp, 300000, sol.objective - 5e-7 * scale);
    // the dual value is a lower bound that meets the optimum at convergence
    CHECK(sol.objective >= pg.dual_objective - 1e-6 * scale);
    CHECK(std::abs(sol.objective - pg.dual_objective) <= 1e-6 * scale);
    ++solved;
  }
  CHECK(solved == 200);
}

TEST_CASE("tiny random QPs match exhaustive KKT enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    QuadraticProgram qp = random_qp(rng, 3);
    if (qp.in_matrix.size() && qp.in_matrix.rows() > 8) continue;
    auto reference = testsupport::kkt_enumerate(qp);
    REQUIRE(reference.has_value());
    QpSolution sol = solve_convex_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(reference->objective).epsilon(1e-8));
  }
}

TEST_CASE("warm start reproduces the cold answer") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    QuadraticProgram qp = random_qp(rng, 20);
    QpSolution cold = solve_convex_qp(qp);
    REQUIRE(cold.status == QpStatus::Optimal);
    QpOptions opt;
    opt.warm_start = cold.active_set;
    QpSolution warm = solve_convex_qp(qp, opt);
    REQUIRE(warm.status == QpStatus::Optimal);
    CHECK((cold.x - warm.x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(cold.objective == doctest::Approx(warm.objective).epsilon(1e-12));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  QuadraticProgram qp = make_qp(2);
  qp.hessian = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_convex_qp(qp), DimensionMismatch);
}
