#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <limits>
#include <random>
#include <vector>

#include "mfp/qp_solver.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

mfp::SparseMatrix sparse(const Eigen::MatrixXd& m) {
  return m.sparseView();
}

mfp::QpData make(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                 const Eigen::MatrixXd& A, const Eigen::VectorXd& l,
                 const Eigen::VectorXd& u) {
  return {sparse(P), q, sparse(A), l, u};
}

TEST(SolveQp, BoxedScalar) {
  const auto qp = make(Eigen::MatrixXd::Identity(1, 1),
                       Eigen::VectorXd::Constant(1, -3.0),
                       Eigen::MatrixXd::Identity(1, 1),
                       Eigen::VectorXd::Constant(1, 0.0),
                       Eigen::VectorXd::Constant(1, 1.0));
  const auto sol = mfp::solve_qp(qp);
  ASSERT_EQ(sol.status, mfp::SolverStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.5 - 3.0, 1e-6);
  EXPECT_NEAR(sol.y[0], 2.0, 1e-5);
}

TEST(SolveQp, EqualityConstrained) {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  const auto qp = make(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
                       A, Eigen::VectorXd::Constant(1, 1.0),
                       Eigen::VectorXd::Constant(1, 1.0));
  const auto sol = mfp::solve_qp(qp);
  ASSERT_EQ(sol.status, mfp::SolverStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 0.5, 1e-6);
  EXPECT_NEAR(sol.x[1], 0.5, 1e-6);
  EXPECT_NEAR(sol.y[0], -0.5, 1e-5);
}

TEST(SolveQp, LinearObjectiveOnBox) {
  const auto qp = make(Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(1.0, -2.0),
                       Eigen::MatrixXd::Identity(2, 2),
                       Eigen::VectorXd::Constant(2, -1.0),
                       Eigen::VectorXd::Constant(2, 1.0));
  const auto sol = mfp::solve_qp(qp);
  ASSERT_EQ(sol.status, mfp::SolverStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], -1.0, 1e-5);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-5);
  EXPECT_NEAR(sol.objective, -3.0, 1e-5);
}

TEST(SolveQp, ContradictoryRowsAreInfeasible) {
  Eigen::MatrixXd A(2, 1);
  A << 1, 1;
  const auto qp = make(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                       A, Eigen::Vector2d(2.0, -kInf), Eigen::Vector2d(kInf, 1.0));
  EXPECT_EQ(mfp::solve_qp(qp).status, mfp::SolverStatus::kInfeasible);
}

TEST(SolveQp, InfeasibleChain) {
  // x0 = 0, x_{i+1} - x_i in [-1, 1], x_4 >= 10.
  const int n = 5;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n);
  Eigen::VectorXd l(n + 1), u(n + 1);
  A(0, 0) = 1;
  l[0] = u[0] = 0;
  for (int i = 0; i + 1 < n; ++i) {
    A(i + 1, i) = -1;
    A(i + 1, i + 1) = 1;
    l[i + 1] = -1;
    u[i + 1] = 1;
  }
  A(n, n - 1) = 1;
  l[n] = 10;
  u[n] = kInf;
  const auto qp = make(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n),
                       A, l, u);
  EXPECT_EQ(mfp::solve_qp(qp).status, mfp::SolverStatus::kInfeasible);
  // Reachable target: x_4 >= 3.
  auto ok = qp;
  ok.l[n] = 3;
  const auto sol = mfp::solve_qp(ok);
  ASSERT_EQ(sol.status, mfp::SolverStatus::kOptimal);
  EXPECT_NEAR(sol.x[n - 1], 3.0, 1e-5);
}

TEST(SolveQp, IterationCapReported) {
  mfp::SolverSettings s;
  s.max_iter = 1;
  s.polish = false;
  Eigen::MatrixXd P(2, 2);
  P << 4, 1, 1, 2;
  Eigen::MatrixXd A(3, 2);
  A << 1, 1, 1, 0, 0, 1;
  const auto qp = make(P, Eigen::Vector2d(1, 1), A, Eigen::Vector3d(1, 0, 0),
                       Eigen::Vector3d(1, 0.7, 0.7));
  EXPECT_EQ(mfp::solve_qp(qp, s).status, mfp::SolverStatus::kMaxIter);
}

// Box-constrained strictly convex QPs against exhaustive active-set
// enumeration: each variable is free, at its lower or at its upper bound.
TEST(SolveQp, MatchesActiveSetEnumeration) {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 4;
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = g(rng);
    const Eigen::MatrixXd P = M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      q[i] = 3.0 * g(rng);
      lo[i] = -1.0 + 0.5 * g(rng);
      hi[i] = lo[i] + 0.2 + std::abs(g(rng));
    }
    double best = kInf;
    Eigen::VectorXd best_x;
    int states = 1;
    for (int i = 0; i < n; ++i) states *= 3;
    for (int code = 0; code < states; ++code) {
      std::vector<int> mode(n);
      for (int i = 0, c = code; i < n; ++i, c /= 3) mode[i] = c % 3;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      std::vector<int> free;
      for (int i = 0; i < n; ++i) {
        if (mode[i] == 1) x[i] = lo[i];
        else if (mode[i] == 2) x[i] = hi[i];
        else free.push_back(i);
      }
      if (!free.empty()) {
        const int f = static_cast<int>(free.size());
        Eigen::MatrixXd Pff(f, f);
        Eigen::VectorXd rhs(f);
        for (int a = 0; a < f; ++a) {
          rhs[a] = -q[free[a]];
          for (int i = 0; i < n; ++i)
            if (mode[i] != 0) rhs[a] -= P(free[a], i) * x[i];
          for (int b = 0; b < f; ++b) Pff(a, b) = P(free[a], free[b]);
        }
        const Eigen::VectorXd xf = Pff.ldlt().solve(rhs);
        for (int a = 0; a < f; ++a) x[free[a]] = xf[a];
      }
      bool inside = true;
      for (int i = 0; i < n; ++i)
        inside &= x[i] >= lo[i] - 1e-12 && x[i] <= hi[i] + 1e-12;
      if (!inside) continue;
      const double obj = 0.5 * x.dot(P * x) + q.dot(x);
      if (obj < best) {
        best = obj;
        best_x = x;
      }
    }
    const auto qp = make(P, q, Eigen::MatrixXd::Identity(n, n), lo, hi);
    const auto sol = mfp::solve_qp(qp);
    ASSERT_EQ(sol.status, mfp::SolverStatus::kOptimal) << trial;
    EXPECT_NEAR(sol.objective, best, 1e-6) << trial;
    EXPECT_LT((sol.x - best_x).lpNorm<Eigen::Infinity>(), 1e-4) << trial;
  }
}

TEST(SolveQp, BitIdenticalRepeats) {
  Eigen::MatrixXd P(3, 3);
  P << 2, 0.5, 0, 0.5, 1, 0.1, 0, 0.1, 3;
  Eigen::MatrixXd A(2, 3);
  A << 1, 1, 1, 1, -1, 0;
  const auto qp = make(P, Eigen::Vector3d(-1, 2, -3), A, Eigen::Vector2d(1, -0.5),
                       Eigen::Vector2d(2, 0.5));
  const auto a = mfp::solve_qp(qp);
  const auto b = mfp::solve_qp(qp);
  ASSERT_EQ(a.status, b.status);
  EXPECT_EQ(a.iterations, b.iterations);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.x[i], b.x[i]);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(QpData, ObjectiveValue) {
  const auto qp = make(2.0 * Eigen::MatrixXd::Identity(2, 2),
                       Eigen::Vector2d(1, -1), Eigen::MatrixXd::Identity(2, 2),
                       Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5));
  EXPECT_DOUBLE_EQ(qp.objective(Eigen::Vector2d(1, 2)), 1 + 4 + 1 - 2);
}

}  // namespace
