#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mfp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u.
/// P is stored in full (both triangles). Equality rows have l == u.
struct QpData {
  SparseMatrix P;
  Eigen::VectorXd q;
  SparseMatrix A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;

  Eigen::Index variables() const { return q.size(); }
  Eigen::Index constraints() const { return l.size(); }
  double objective(const Eigen::VectorXd& x) const;
};

struct SolverSettings {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 20000;
  double eps_prim_inf = 1e-5;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int scaling_iter = 10;
  bool adaptive_rho = true;
  int adaptive_rho_interval = 25;
  int check_interval = 5;
  bool polish = true;
};

enum class SolverStatus { kOptimal, kInfeasible, kMaxIter };

const char* to_string(SolverStatus status) noexcept;

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double objective = 0.0;
  SolverStatus status = SolverStatus::kMaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

/// Operator-splitting (ADMM) solve of the KKT system with over-relaxation.
///
/// The data is Ruiz-equilibrated before iterating. Termination tests are
/// evaluated on unscaled residuals:
///   ||Ax - z||_inf   <= eps_abs + eps_rel * max(||Ax||, ||z||)
///   ||Px + q + A'y|| <= eps_abs + eps_rel * max(||Px||, ||A'y||, ||q||)
/// Primal infeasibility is reported when the successive dual difference
/// forms a Farkas certificate to within eps_prim_inf. Once converged (and
/// periodically before that) the active set is guessed from the iterates
/// and the equality-constrained KKT system is solved directly; the polished
/// point replaces the ADMM iterate when its residuals are no worse and its
/// multipliers carry the right signs.
///
/// Deterministic: identical inputs give bit-identical outputs.
QpSolution solve_qp(const QpData& data, const SolverSettings& settings = {});

}  // namespace mfp
