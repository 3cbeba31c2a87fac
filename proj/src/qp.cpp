#include "cbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cbf::qp {
namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau simplex for the phase-1 LP
//
//   min sigma  s.t.  A(w+ - w-) - 1 sigma + s = b - 1,   w+,w-,sigma,s >= 0
//
// which is min_w max_i(A_i w - b_i) with the slack variable shifted by one
// (sigma = s* + 1) so that sigma >= 0 makes the LP bounded and a basic
// feasible start exists without artificial variables. Bland's rule keeps the
// pivoting deterministic and cycle-free.
struct Phase1 {
  double slack = 0.0;        // s* floored at -1
  Eigen::VectorXd argmin;    // minimizing w
};

Phase1 phase1_simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Phase1 out;
  out.argmin = Eigen::VectorXd::Zero(n);
  if (m == 0) {
    out.slack = -1.0;
    return out;
  }

  const int sigma_col = 2 * n;
  const int cols = 2 * n + 1 + m;
  Eigen::MatrixXd T(m, cols);
  T.setZero();
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, n) = -A;
  T.col(sigma_col).setConstant(-1.0);
  T.block(0, 2 * n + 1, m, m).setIdentity();
  Eigen::VectorXd rhs = b.array() - 1.0;

  // Objective row for min sigma, kept in canonical form under pivots.
  Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
  obj(sigma_col) = 1.0;
  double obj_val = 0.0;  // current -objective (tableau convention: z = -obj_val)

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = 2 * n + 1 + i;

  auto pivot = [&](int r, int c) {
    const double piv = T(r, c);
    T.row(r) /= piv;
    rhs(r) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = T(i, c);
      if (f != 0.0) {
        T.row(i) -= f * T.row(r);
        rhs(i) -= f * rhs(r);
      }
    }
    const double fo = obj(c);
    if (fo != 0.0) {
      obj -= fo * T.row(r);
      obj_val -= fo * rhs(r);
    }
    basis[r] = c;
  };

  // Initial basis: if some rhs < 0, bring sigma in at the most negative row
  // (ties: lowest row); the sigma column is -1 everywhere so this restores
  // rhs >= 0. Otherwise w = 0 already satisfies A w <= b - 1.
  int worst = -1;
  double worst_val = 0.0;
  for (int i = 0; i < m; ++i) {
    if (rhs(i) < worst_val) {
      worst_val = rhs(i);
      worst = i;
    }
  }
  if (worst < 0) {
    out.slack = -1.0;
    return out;
  }
  pivot(worst, sigma_col);

  const int max_pivots = 200 * (m + n + 2);
  for (int iter = 0; iter < max_pivots; ++iter) {
    // Bland entering rule: lowest column index with negative reduced cost.
    int enter = -1;
    for (int j = 0; j < cols; ++j) {
      if (obj(j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    // Ratio test; ties resolved by lowest basic-variable index (Bland).
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double d = T(i, enter);
      if (d > kPivotTol) {
        const double ratio = rhs(i) / d;
        if (ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 &&
             (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0)
      throw std::runtime_error("phase-1 simplex: unbounded column");  // cannot happen: sigma >= 0 bounds the LP
    pivot(leave, enter);
  }

  double sigma = 0.0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int v = basis[i];
    if (v == sigma_col) sigma = rhs(i);
    else if (v < n) w(v) += rhs(i);
    else if (v < 2 * n) w(v - n) -= rhs(i);
  }
  out.slack = sigma - 1.0;
  out.argmin = w;
  return out;
}

double objective_of(const Problem& p, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(p.hessian * w) + p.linear.dot(w);
}

}  // namespace

void validate(const Problem& p) {
  const int n = p.num_vars();
  if (p.hessian.cols() != n)
    throw std::invalid_argument("qp: H must be square");
  if (p.linear.size() != n)
    throw std::invalid_argument("qp: F size must match H");
  if (p.rows.rows() != p.bounds.size())
    throw std::invalid_argument("qp: A rows must match b size");
  if (p.rows.rows() > 0 && p.rows.cols() != n)
    throw std::invalid_argument("qp: A cols must match H");
  if (n == 0) throw std::invalid_argument("qp: empty problem");
  if ((p.hessian - p.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("qp: H must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(p.hessian);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("qp: H must be positive definite");
}

FeasibilityReport check_feasible(const Problem& p) {
  validate(p);
  const Phase1 ph = phase1_simplex(p.rows, p.bounds);
  FeasibilityReport rep;
  rep.slack = ph.slack;
  rep.witness = ph.argmin;
  rep.feasible = ph.slack <= kFeasTol;
  return rep;
}

Result solve(const Problem& p) {
  const FeasibilityReport rep = check_feasible(p);  // also validates
  const int n = p.num_vars();
  const int m = p.num_rows();

  Result res;
  res.infeasibility = rep.slack;
  if (!rep.feasible) {
    res.status = Status::Infeasible;
    res.objective = std::numeric_limits<double>::quiet_NaN();
    return res;
  }

  // Rows with an all-zero coefficient vector carry no geometry; the phase-1
  // pass has already vetted their bounds, so drop them (multiplier 0).
  std::vector<int> live;
  live.reserve(m);
  for (int i = 0; i < m; ++i)
    if (p.rows.row(i).cwiseAbs().maxCoeff() != 0.0) live.push_back(i);
  const int mr = static_cast<int>(live.size());
  Eigen::MatrixXd A(mr, n);
  Eigen::VectorXd b(mr);
  for (int i = 0; i < mr; ++i) {
    A.row(i) = p.rows.row(live[i]);
    b(i) = p.bounds(live[i]);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(p.hessian);
  Eigen::VectorXd w = rep.witness;
  std::vector<int> work;            // working set, ascending
  std::vector<int> added_order;     // same rows, in insertion order
  std::vector<char> in_work(mr, 0);
  Eigen::VectorXd lambda_work;

  const int max_iter = 50 * (mr + 1) + 20;
  int iter = 0;
  // Set after a full unblocked step: w then sits exactly on the working-set
  // minimizer, so the next pass must go straight to the multiplier check. On
  // ill-conditioned H the recomputed step is rounding noise that can sit
  // above any relative threshold and would otherwise loop forever.
  bool at_minimizer = false;
  for (; iter < max_iter; ++iter) {
    // Minimizer of the objective restricted to the working rows being tight,
    // from the bordered KKT system. Solving for the point itself (instead of
    // a correction from w) keeps active rows exactly tight: drift from
    // earlier partial steps and phase-1 slop is repaired, not carried along.
    Eigen::VectorXd target;
    const int k = static_cast<int>(work.size());
    if (k == 0) {
      target = -llt.solve(p.linear);
      lambda_work.resize(0);
    } else {
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
      K.topLeftCorner(n, n) = p.hessian;
      Eigen::VectorXd rhs(n + k);
      rhs.head(n) = -p.linear;
      for (int j = 0; j < k; ++j) {
        K.block(n + j, 0, 1, n) = A.row(work[j]);
        K.block(0, n + j, n, 1) = A.row(work[j]).transpose();
        rhs(n + j) = b(work[j]);
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
      if (!lu.isInvertible()) {
        // Dependent working rows; the newest is redundant, drop it.
        const int victim = added_order.back();
        added_order.pop_back();
        in_work[victim] = 0;
        work.erase(std::find(work.begin(), work.end(), victim));
        at_minimizer = false;
        continue;
      }
      const Eigen::VectorXd sol = lu.solve(rhs);
      target = sol.head(n);
      lambda_work = sol.tail(k);
    }

    const Eigen::VectorXd path = target - w;
    const double pnorm = path.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (at_minimizer || pnorm <= 1e-11 * scale) {
      if (k == 0) break;  // unconstrained minimum, feasible
      int drop = -1;
      double most_negative = -kPivotTol;
      for (int j = 0; j < k; ++j) {
        if (lambda_work(j) < most_negative) {
          most_negative = lambda_work(j);
          drop = j;
        }
      }
      if (drop < 0) break;  // all multipliers nonnegative: optimal
      const int victim = work[drop];
      in_work[victim] = 0;
      work.erase(work.begin() + drop);
      added_order.erase(std::find(added_order.begin(), added_order.end(),
                                  victim));
      at_minimizer = false;
      continue;
    }

    // Step to the nearest blocking constraint (ties: lowest row index).
    double alpha = 1.0;
    int blocker = -1;
    for (int i = 0; i < mr; ++i) {
      if (in_work[i]) continue;
      const double d = A.row(i).dot(path);
      if (d <= 1e-13 * std::max(1.0, A.row(i).cwiseAbs().maxCoeff() * pnorm))
        continue;
      const double gap = std::max(0.0, b(i) - A.row(i).dot(w));
      const double ratio = gap / d;
      if (ratio < alpha) {
        alpha = ratio;
        blocker = i;
      }
    }
    if (blocker >= 0) {
      w += alpha * path;
      in_work[blocker] = 1;
      work.insert(std::upper_bound(work.begin(), work.end(), blocker), blocker);
      added_order.push_back(blocker);
      at_minimizer = false;
    } else {
      w = target;  // full unblocked step lands exactly on the minimizer
      at_minimizer = true;
    }
  }
  if (iter >= max_iter)
    throw std::runtime_error("qp: active-set iteration limit exceeded");

  res.status = Status::Optimal;
  res.solution = w;
  res.multipliers = Eigen::VectorXd::Zero(m);
  for (size_t j = 0; j < work.size(); ++j)
    res.multipliers(live[work[j]]) = lambda_work(static_cast<int>(j));
  res.active_set.clear();
  for (int i : work) res.active_set.push_back(live[i]);
  std::sort(res.active_set.begin(), res.active_set.end());
  res.objective = objective_of(p, w);
  return res;
}

KktReport kkt_report(const Problem& p, const Result& r) {
  if (r.status != Status::Optimal)
    throw std::invalid_argument("kkt_report: result is not Optimal");
  KktReport k;
  const Eigen::VectorXd station =
      p.hessian * r.solution + p.linear + p.rows.transpose() * r.multipliers;
  k.stationarity = station.size() ? station.cwiseAbs().maxCoeff() : 0.0;
  if (p.num_rows() > 0) {
    const Eigen::VectorXd resid = p.rows * r.solution - p.bounds;
    k.primal_violation = std::max(0.0, resid.maxCoeff());
    k.comp_slackness = (r.multipliers.array() * resid.array()).abs().maxCoeff();
    k.min_multiplier = r.multipliers.minCoeff();
  }
  return k;
}

}  // namespace cbf::qp
