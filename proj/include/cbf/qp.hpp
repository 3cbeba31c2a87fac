#pragma once

#include <Eigen/Dense>
#include <vector>

// Small dense convex QP solver for point-wise control problems:
//
//   minimize    1/2 w'Hw + F'w
//   subject to  A w <= b
//
// with H symmetric positive definite. Solved by a primal active-set method
// over a Cholesky factorization of H, preceded by a phase-1 slack
// minimization (a Bland-rule simplex on min_w max_i(A_i w - b_i)) that
// either produces a feasible starting point or an infeasibility certificate.
// Everything is deterministic: identical inputs give bit-identical outputs.
namespace cbf::qp {

// Tolerances shared by the solver and the KKT report.
inline constexpr double kFeasTol = 1e-8;   // primal feasibility / phase-1 slack
inline constexpr double kStatTol = 1e-6;   // stationarity residual
inline constexpr double kCompTol = 1e-6;   // complementary slackness
inline constexpr double kMultTol = 1e-10;  // multiplier nonnegativity slack

struct Problem {
  Eigen::MatrixXd hessian;  // H, n x n, symmetric positive definite
  Eigen::VectorXd linear;   // F, n
  Eigen::MatrixXd rows;     // A, m x n (m may be 0)
  Eigen::VectorXd bounds;   // b, m

  int num_vars() const { return static_cast<int>(hessian.rows()); }
  int num_rows() const { return static_cast<int>(rows.rows()); }
};

enum class Status { Optimal, Infeasible };

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd solution;     // size n iff Optimal, else empty
  Eigen::VectorXd multipliers;  // size m iff Optimal (0 for inactive rows)
  std::vector<int> active_set;  // ascending row indices
  double objective = 0.0;       // 1/2 w'Hw + F'w at the solution (NaN if infeasible)
  // Minimized phase-1 slack s* = min_w max_i(A_i w - b_i), floored at -1.
  // Infeasible iff s* > kFeasTol; for Optimal results this is <= kFeasTol.
  double infeasibility = 0.0;
};

struct FeasibilityReport {
  bool feasible = false;
  Eigen::VectorXd witness;  // satisfies A w <= b + kFeasTol when feasible
  double slack = 0.0;       // s* as above (exact certificate when > kFeasTol)
};

struct KktReport {
  double primal_violation = 0.0;   // max_i(A_i w - b_i), floored at 0
  double stationarity = 0.0;       // ||Hw + F + A'lambda||_inf
  double comp_slackness = 0.0;     // max_i |lambda_i (A_i w - b_i)|
  double min_multiplier = 0.0;     // min_i lambda_i (0 if no rows)
  bool ok() const {
    return primal_violation <= kFeasTol && stationarity <= kStatTol &&
           comp_slackness <= kCompTol && min_multiplier >= -kMultTol;
  }
};

// Throws std::invalid_argument on dimension mismatch, asymmetric H
// (tolerance 1e-12) or H not positive definite.
void validate(const Problem& problem);

// Phase-1 pass: decides feasibility of {w : A w <= b} and returns either a
// witness or the minimized max-violation s* as certificate.
FeasibilityReport check_feasible(const Problem& problem);

// Full solve. Never disagrees with check_feasible on the status.
Result solve(const Problem& problem);

// KKT residuals of an Optimal result. Throws if the result is not Optimal.
KktReport kkt_report(const Problem& problem, const Result& result);

}  // namespace cbf::qp
