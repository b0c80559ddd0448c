#include "mfp/qp_solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <limits>
#include <vector>

#include "mfp/errors.hpp"

namespace mfp {

namespace {

using Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kInfinity = 1e20;
constexpr double kEqualityRhoScale = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kPolishDelta = 1e-7;
constexpr int kPolishRefineIter = 3;
constexpr int kPolishRounds = 10;
// Periodic polish is attempted only once the primal residual is within this
// factor of its tolerance.
constexpr double kPolishGate = 1e3;
constexpr double kDivisionTol = 1e-30;

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

double limit_scaling(double norm) {
  if (norm < kMinScaling) return 1.0;
  return std::min(norm, kMaxScaling);
}

// Column inf-norms of a column-major sparse matrix.
VectorXd column_norms(const SparseMatrix& m) {
  VectorXd out = VectorXd::Zero(m.cols());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out[k] = std::max(out[k], std::abs(it.value()));
    }
  }
  return out;
}

VectorXd row_norms(const SparseMatrix& m) {
  VectorXd out = VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
    }
  }
  return out;
}

struct Scaling {
  VectorXd d;      // variable scaling
  VectorXd e;      // constraint scaling
  double c = 1.0;  // cost scaling
};

struct ScaledProblem {
  SparseMatrix P;
  VectorXd q;
  SparseMatrix A;
  SparseMatrix At;
  VectorXd l;
  VectorXd u;
  Scaling s;
};

ScaledProblem scale(const QpData& data, int iterations) {
  ScaledProblem p;
  const auto n = data.variables();
  const auto m = data.constraints();
  p.P = data.P;
  p.q = data.q;
  p.A = data.A;
  p.s.d = VectorXd::Ones(n);
  p.s.e = VectorXd::Ones(m);
  p.s.c = 1.0;

  for (int it = 0; it < iterations; ++it) {
    const VectorXd p_cols = column_norms(p.P);
    const VectorXd a_cols = column_norms(p.A);
    VectorXd d_step(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      d_step[j] = 1.0 / std::sqrt(limit_scaling(std::max(p_cols[j], a_cols[j])));
    }
    const VectorXd a_rows = row_norms(p.A);
    VectorXd e_step(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      e_step[i] = 1.0 / std::sqrt(limit_scaling(a_rows[i]));
    }
    p.P = d_step.asDiagonal() * p.P * d_step.asDiagonal();
    p.A = e_step.asDiagonal() * p.A * d_step.asDiagonal();
    p.q = d_step.cwiseProduct(p.q);
    p.s.d = p.s.d.cwiseProduct(d_step);
    p.s.e = p.s.e.cwiseProduct(e_step);

    const VectorXd p_cols_new = column_norms(p.P);
    const double mean_p = n > 0 ? p_cols_new.mean() : 0.0;
    const double cost_norm = std::max(mean_p, inf_norm(p.q));
    const double c_step = 1.0 / limit_scaling(cost_norm);
    p.P *= c_step;
    p.q *= c_step;
    p.s.c *= c_step;
  }

  p.l = data.l;
  p.u = data.u;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.l[i] > -kInfinity) p.l[i] *= p.s.e[i];
    if (p.u[i] < kInfinity) p.u[i] *= p.s.e[i];
  }
  p.P.makeCompressed();
  p.A.makeCompressed();
  p.At = p.A.transpose();
  p.At.makeCompressed();
  return p;
}

struct Residuals {
  double prim = 0.0;
  double dual = 0.0;
  double eps_prim = 0.0;
  double eps_dual = 0.0;
  bool converged() const { return prim <= eps_prim && dual <= eps_dual; }
};

// Residuals of (x, z, y) in scaled space, reported unscaled.
Residuals residuals(const ScaledProblem& p, const VectorXd& x,
                    const VectorXd& z, const VectorXd& y,
                    const SolverSettings& settings) {
  const VectorXd ax = p.A * x;
  const VectorXd e_inv = p.s.e.cwiseInverse();
  const VectorXd d_inv = p.s.d.cwiseInverse();
  Residuals r;
  r.prim = inf_norm(e_inv.cwiseProduct(ax - z));
  const VectorXd px = p.P * x;
  const VectorXd aty = p.At * y;
  const double c_inv = 1.0 / p.s.c;
  r.dual = c_inv * inf_norm(d_inv.cwiseProduct(px + p.q + aty));
  r.eps_prim = settings.eps_abs +
               settings.eps_rel * std::max(inf_norm(e_inv.cwiseProduct(ax)),
                                           inf_norm(e_inv.cwiseProduct(z)));
  r.eps_dual =
      settings.eps_abs +
      settings.eps_rel * c_inv *
          std::max({inf_norm(d_inv.cwiseProduct(px)),
                    inf_norm(d_inv.cwiseProduct(aty)),
                    inf_norm(d_inv.cwiseProduct(p.q))});
  return r;
}

// Eliminates variables from the last index to the first. The multi-future
// layout is a tree (prefix chain, suffix chains hanging off its end), and
// eliminating each suffix from its leaf toward the seam creates no fill.
struct ReverseOrdering {
  template <typename MatrixType>
  void operator()(const MatrixType& mat,
                  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>&
                      perm) const {
    const auto n = static_cast<int>(mat.cols());
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm.indices()[i] = n - 1 - i;
  }
};

class KktSystem {
 public:
  KktSystem(const ScaledProblem& p, double sigma) : p_(p), sigma_(sigma) {}

  bool factor(const VectorXd& rho) {
    SparseMatrix k = p_.At * rho.asDiagonal() * p_.A;
    k += p_.P;
    for (Eigen::Index j = 0; j < k.cols(); ++j) k.coeffRef(j, j) += sigma_;
    k.makeCompressed();
    if (!analyzed_) {
      solver_.analyzePattern(k);
      analyzed_ = true;
    }
    solver_.factorize(k);
    return solver_.info() == Eigen::Success;
  }

  VectorXd solve(const VectorXd& rhs) const { return solver_.solve(rhs); }

 private:
  const ScaledProblem& p_;
  double sigma_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, ReverseOrdering> solver_;
};

VectorXd rho_vector(const ScaledProblem& p, double rho) {
  VectorXd out(p.l.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const bool lo_inf = p.l[i] <= -kInfinity;
    const bool hi_inf = p.u[i] >= kInfinity;
    if (lo_inf && hi_inf) {
      out[i] = kRhoMin;
    } else if (p.u[i] - p.l[i] < 1e-12) {
      out[i] = kEqualityRhoScale * rho;
    } else {
      out[i] = rho;
    }
  }
  return out;
}

bool primal_infeasible(const ScaledProblem& p, VectorXd delta_y,
                       double eps) {
  for (Eigen::Index i = 0; i < delta_y.size(); ++i) {
    const bool lo_inf = p.l[i] <= -kInfinity;
    const bool hi_inf = p.u[i] >= kInfinity;
    if (hi_inf && lo_inf) {
      delta_y[i] = 0.0;
    } else if (hi_inf) {
      delta_y[i] = std::min(delta_y[i], 0.0);
    } else if (lo_inf) {
      delta_y[i] = std::max(delta_y[i], 0.0);
    }
  }
  const double norm = inf_norm(p.s.e.cwiseProduct(delta_y));
  if (norm <= kDivisionTol) return false;
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < delta_y.size(); ++i) {
    if (delta_y[i] > 0.0) {
      lhs += p.u[i] * delta_y[i];
    } else if (delta_y[i] < 0.0) {
      lhs += p.l[i] * delta_y[i];
    }
  }
  if (lhs >= -eps * norm) return false;
  const VectorXd aty = p.s.d.cwiseInverse().cwiseProduct(p.At * delta_y);
  return inf_norm(aty) < eps * norm;
}

struct PolishResult {
  bool ok = false;
  VectorXd x;
  VectorXd z;
  VectorXd y;
  Residuals res;
};

// Guesses the active set from (z, y) and solves the reduced KKT system with
// iterative refinement. Rows whose multiplier has the wrong sign are
// released and violated rows are added, for a few rounds.
PolishResult polish(const ScaledProblem& p, const VectorXd& z,
                    const VectorXd& y, const SolverSettings& settings) {
  const auto n = p.q.size();
  const auto m = p.l.size();
  // 0 inactive, -1 lower active, +1 upper active, 2 equality.
  std::vector<int> state(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto& st = state[static_cast<std::size_t>(i)];
    if (p.u[i] - p.l[i] < 1e-12) {
      st = 2;
    } else if (z[i] - p.l[i] < -y[i]) {
      st = -1;
    } else if (p.u[i] - z[i] < y[i]) {
      st = 1;
    }
  }

  std::vector<Triplet> base;
  for (int c = 0; c < p.P.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(p.P, c); it; ++it) {
      base.emplace_back(it.row(), it.col(), it.value());
    }
  }

  PolishResult out;
  for (int round = 0; round < kPolishRounds; ++round) {
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (state[static_cast<std::size_t>(i)] != 0) rows.push_back(static_cast<int>(i));
    }
    const auto k = static_cast<Eigen::Index>(rows.size());

    // Each multiplier sits right after the last variable of its row, so the
    // system stays banded in time and needs no fill-reducing ordering.
    std::vector<Eigen::Index> last_col(static_cast<std::size_t>(k), 0);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (SparseMatrix::InnerIterator it(p.At, rows[static_cast<std::size_t>(r)]);
           it; ++it) {
        last_col[static_cast<std::size_t>(r)] =
            std::max(last_col[static_cast<std::size_t>(r)], it.row());
      }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n + k));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto key = [&](Eigen::Index v) {
      return v < n ? std::pair{v, Eigen::Index{0}}
                   : std::pair{last_col[static_cast<std::size_t>(v - n)],
                               Eigen::Index{1}};
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return key(a) < key(b); });
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }
    const auto at = [&](Eigen::Index v) { return pos[static_cast<std::size_t>(v)]; };

    std::vector<Triplet> trip;
    std::vector<Triplet> trip_exact;
    for (const Triplet& t : base) {
      trip.emplace_back(at(t.row()), at(t.col()), t.value());
    }
    trip_exact = trip;
    for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(at(j), at(j), kPolishDelta);
    VectorXd rhs(n + k);
    for (Eigen::Index j = 0; j < n; ++j) rhs[at(j)] = -p.q[j];
    for (Eigen::Index r = 0; r < k; ++r) {
      const int row = rows[static_cast<std::size_t>(r)];
      const int col = at(n + r);
      for (SparseMatrix::InnerIterator it(p.At, row); it; ++it) {
        const int var = at(it.row());
        trip.emplace_back(col, var, it.value());
        trip.emplace_back(var, col, it.value());
        trip_exact.emplace_back(col, var, it.value());
        trip_exact.emplace_back(var, col, it.value());
      }
      trip.emplace_back(col, col, -kPolishDelta);
      rhs[col] = state[static_cast<std::size_t>(row)] > 0 ? p.u[row] : p.l[row];
    }
    SparseMatrix kkt(n + k, n + k);
    kkt.setFromTriplets(trip.begin(), trip.end());
    SparseMatrix kkt_exact(n + k, n + k);
    kkt_exact.setFromTriplets(trip_exact.begin(), trip_exact.end());

    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower,
                          Eigen::NaturalOrdering<int>>
        ldlt;
    ldlt.compute(kkt);
    if (ldlt.info() != Eigen::Success) return out;
    VectorXd permuted = ldlt.solve(rhs);
    for (int it = 0; it < kPolishRefineIter; ++it) {
      const VectorXd resid = rhs - kkt_exact * permuted;
      permuted += ldlt.solve(resid);
    }
    if (!permuted.allFinite()) return out;
    VectorXd sol(n + k);
    for (Eigen::Index v = 0; v < n + k; ++v) sol[v] = permuted[at(v)];

    const VectorXd x = sol.head(n);
    const VectorXd ax = p.A * x;
    VectorXd yy = VectorXd::Zero(m);
    bool changed = false;
    for (Eigen::Index r = 0; r < k; ++r) {
      const int row = rows[static_cast<std::size_t>(r)];
      auto& st = state[static_cast<std::size_t>(row)];
      const double yi = sol[n + r];
      if ((st == -1 && yi > settings.eps_abs) ||
          (st == 1 && yi < -settings.eps_abs)) {
        st = 0;
        changed = true;
      } else if ((st == -1 && yi > 0.0) || (st == 1 && yi < 0.0)) {
        yy[row] = 0.0;
      } else {
        yy[row] = yi;
      }
    }
    const double tol = settings.eps_abs;
    for (Eigen::Index i = 0; i < m; ++i) {
      auto& st = state[static_cast<std::size_t>(i)];
      if (st != 0) continue;
      if (ax[i] < p.l[i] - tol) {
        st = -1;
        changed = true;
      } else if (ax[i] > p.u[i] + tol) {
        st = 1;
        changed = true;
      }
    }
    if (changed) continue;

    out.x = x;
    out.y = yy;
    out.z = ax.cwiseMax(p.l).cwiseMin(p.u);
    out.res = residuals(p, out.x, out.z, out.y, settings);
    out.ok = true;
    return out;
  }
  return out;
}

}  // namespace

double QpData::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(P * x) + q.dot(x);
}

const char* to_string(SolverStatus status) noexcept {
  switch (status) {
    case SolverStatus::kOptimal:
      return "optimal";
    case SolverStatus::kInfeasible:
      return "infeasible";
    case SolverStatus::kMaxIter:
      return "max_iter";
  }
  return "unknown";
}

QpSolution solve_qp(const QpData& data, const SolverSettings& settings) {
  const auto n = data.variables();
  const auto m = data.constraints();
  if (data.P.rows() != n || data.P.cols() != n || data.A.cols() != n ||
      data.A.rows() != m || data.u.size() != m) {
    throw DimensionMismatch("QP data dimensions disagree");
  }

  const ScaledProblem p = scale(data, settings.scaling_iter);
  double rho = settings.rho;
  VectorXd rho_vec = rho_vector(p, rho);
  KktSystem kkt(p, settings.sigma);
  kkt.factor(rho_vec);

  VectorXd x = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(m);
  VectorXd y = VectorXd::Zero(m);
  VectorXd x_prev;
  VectorXd y_prev;

  QpSolution sol;
  sol.status = SolverStatus::kMaxIter;
  const double alpha = settings.alpha;
  int next_polish = 25;
  bool done = false;
  Residuals res;
  int iter = 0;

  auto finish_polished = [&](const PolishResult& pr) {
    x = pr.x;
    z = pr.z;
    y = pr.y;
    res = pr.res;
    sol.polished = true;
  };

  for (iter = 1; iter <= settings.max_iter && !done; ++iter) {
    x_prev = x;
    y_prev = y;
    const VectorXd rhs =
        settings.sigma * x - p.q + p.At * (rho_vec.cwiseProduct(z) - y);
    const VectorXd x_tilde = kkt.solve(rhs);
    const VectorXd z_tilde = p.A * x_tilde;
    x = alpha * x_tilde + (1.0 - alpha) * x_prev;
    const VectorXd z_hat = alpha * z_tilde + (1.0 - alpha) * z;
    const VectorXd z_next =
        (z_hat + rho_vec.cwiseInverse().cwiseProduct(y)).cwiseMax(p.l).cwiseMin(p.u);
    y += rho_vec.cwiseProduct(z_hat - z_next);
    z = z_next;

    const bool check = iter % settings.check_interval == 0 ||
                       iter == settings.max_iter;
    if (!check) continue;

    res = residuals(p, x, z, y, settings);
    if (res.converged()) {
      sol.status = SolverStatus::kOptimal;
      if (settings.polish) {
        const PolishResult pr = polish(p, z, y, settings);
        if (pr.ok && pr.res.prim <= std::max(res.prim, 1e-10) * (1.0 + 1e-9) &&
            pr.res.dual <= std::max(res.dual, 1e-10) * (1.0 + 1e-9)) {
          finish_polished(pr);
        } else if (pr.ok && pr.res.converged()) {
          finish_polished(pr);
        }
      }
      done = true;
      break;
    }
    if (primal_infeasible(p, y - y_prev, settings.eps_prim_inf)) {
      sol.status = SolverStatus::kInfeasible;
      done = true;
      break;
    }
    if (settings.polish && iter >= next_polish &&
        res.prim <= kPolishGate * res.eps_prim) {
      next_polish *= 2;
      const PolishResult pr = polish(p, z, y, settings);
      if (pr.ok && pr.res.converged()) {
        finish_polished(pr);
        sol.status = SolverStatus::kOptimal;
        done = true;
        break;
      }
    }
    if (settings.adaptive_rho && iter % settings.adaptive_rho_interval == 0) {
      const VectorXd ax = p.A * x;
      const double prim_norm =
          inf_norm(ax - z) / std::max({inf_norm(ax), inf_norm(z), 1e-30});
      const VectorXd px = p.P * x;
      const VectorXd aty = p.At * y;
      const double dual_norm =
          inf_norm(px + p.q + aty) /
          std::max({inf_norm(px), inf_norm(aty), inf_norm(p.q), 1e-30});
      double rho_new = rho * std::sqrt(prim_norm / std::max(dual_norm, 1e-30));
      rho_new = std::clamp(rho_new, kRhoMin, kRhoMax);
      if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
        rho = rho_new;
        rho_vec = rho_vector(p, rho);
        kkt.factor(rho_vec);
      }
    }
  }

  sol.iterations = std::min(iter, settings.max_iter);
  sol.x = p.s.d.cwiseProduct(x);
  sol.y = p.s.e.cwiseProduct(y) / p.s.c;
  sol.primal_residual = res.prim;
  sol.dual_residual = res.dual;
  sol.objective = data.objective(sol.x);
  return sol;
}

}  // namespace mfp
