#pragma once

// Brute-force oracles for cross-checking the QP solver. Everything here is
// deliberately independent of the solver implementation: plain lattice
// enumeration plus a seeded instance generator with planted feasibility
// status, so status agreement is provable rather than probabilistic.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "cbf/qp.hpp"

namespace testsupport {

struct GridResult {
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd argmin;
};

// Uniform lattice search over [lo, hi]^n with `steps` intervals per axis.
// A lattice point counts as feasible only if it satisfies every row exactly
// (violation <= 0), so planted-infeasible instances can never pass.
inline GridResult grid_solve(const cbf::qp::Problem& p,
                             const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, int steps) {
  const int n = p.num_vars();
  GridResult best;
  Eigen::VectorXd w(n);
  std::vector<int> idx(n, 0);
  const Eigen::VectorXd span = (hi - lo) / steps;
  while (true) {
    for (int d = 0; d < n; ++d) w(d) = lo(d) + span(d) * idx[d];
    bool ok = true;
    for (int i = 0; i < p.num_rows() && ok; ++i)
      if (p.rows.row(i).dot(w) - p.bounds(i) > 0.0) ok = false;
    if (ok) {
      const double obj = 0.5 * w.dot(p.hessian * w) + p.linear.dot(w);
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.argmin = w;
      }
    }
    int d = 0;
    for (; d < n; ++d) {
      if (++idx[d] <= steps) break;
      idx[d] = 0;
    }
    if (d == n) break;
  }
  return best;
}

// Exact combinatorial oracle: for every subset of rows with size <= n, solve
// the equality-constrained stationarity system with a fully pivoted LU and
// keep the best candidate that satisfies every inequality. For a strictly
// convex objective the optimum is the equality-constrained minimizer of its
// own active set, so the subset sweep always visits it; any other feasible
// candidate can only score worse. No lattice resolution enters the result.
inline GridResult enumerate_solve(const cbf::qp::Problem& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  GridResult best;
  std::vector<int> subset;
  const auto consider = [&](const std::vector<int>& rows_in) {
    const int k = static_cast<int>(rows_in.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = p.hessian;
    rhs.head(n) = -p.linear;
    for (int i = 0; i < k; ++i) {
      kkt.block(n + i, 0, 1, n) = p.rows.row(rows_in[i]);
      kkt.block(0, n + i, n, 1) = p.rows.row(rows_in[i]).transpose();
      rhs(n + i) = p.bounds(rows_in[i]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return;
    const Eigen::VectorXd w = lu.solve(rhs).head(n);
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (m > 0 && (p.rows * w - p.bounds).maxCoeff() > 1e-9 * scale) return;
    const double obj = 0.5 * w.dot(p.hessian * w) + p.linear.dot(w);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.objective = obj;
      best.argmin = w;
    }
  };
  const std::function<void(int)> recurse = [&](int start) {
    consider(subset);
    if (static_cast<int>(subset.size()) == n) return;
    for (int i = start; i < m; ++i) {
      subset.push_back(i);
      recurse(i + 1);
      subset.pop_back();
    }
  };
  recurse(0);
  return best;
}

// Seeded random instance with a planted status. Feasible instances contain a
// ball of radius >= 0.2 (so a 0.02 lattice always finds a point); infeasible
// ones contain an opposing half-space pair with gap >= 0.1 (so the phase-1
// slack is >= 0.05 and no lattice point can satisfy both rows). Constraint
// normals are kept at least ~15 degrees apart so optimal vertices are never
// needle-thin and the lattice argmin lands within one step of the truth.
struct RandomInstance {
  cbf::qp::Problem problem;
  bool feasible = false;
};

inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = unit(rng) < 0.5 ? 1 : 2;
  std::uniform_real_distribution<double> eig(1.0, 3.0);
  std::uniform_real_distribution<double> box(-0.5, 0.5);

  RandomInstance inst;
  cbf::qp::Problem& p = inst.problem;
  if (n == 1) {
    p.hessian = Eigen::MatrixXd::Constant(1, 1, eig(rng));
  } else {
    const double th = unit(rng) * M_PI;
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    d(0, 0) = eig(rng);
    d(1, 1) = eig(rng);
    p.hessian = rot * d * rot.transpose();
    p.hessian = 0.5 * (p.hessian + p.hessian.transpose().eval());
  }
  Eigen::VectorXd w_uc(n);
  for (int i = 0; i < n; ++i) w_uc(i) = box(rng);
  p.linear = -(p.hessian * w_uc);

  inst.feasible = unit(rng) < 0.75;
  std::vector<double> angles;  // normal directions already used (2-D only)
  auto fresh_normal = [&](Eigen::RowVectorXd& a) {
    if (n == 1) {
      a.resize(1);
      a(0) = unit(rng) < 0.5 ? -1.0 : 1.0;
      return;
    }
    a.resize(2);
    for (int tries = 0; tries < 64; ++tries) {
      const double th = unit(rng) * 2.0 * M_PI;
      bool ok = true;
      for (double prev : angles) {
        double d = std::fmod(std::abs(th - prev), M_PI);
        d = std::min(d, M_PI - d);
        if (d < 15.0 * M_PI / 180.0) ok = false;
      }
      if (ok) {
        angles.push_back(th);
        a << std::cos(th), std::sin(th);
        return;
      }
    }
    a << 1.0, 0.0;  // degenerate fallback; practically unreachable
  };

  Eigen::VectorXd w0(n);
  for (int i = 0; i < n; ++i) w0(i) = box(rng);
  std::uniform_int_distribution<int> extra_rows(0, 4);
  std::uniform_real_distribution<double> slack(0.2, 1.2);

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> bounds;
  if (!inst.feasible) {
    Eigen::RowVectorXd a;
    fresh_normal(a);
    const double c = box(rng);
    const double gap = 0.1 + 0.4 * unit(rng);
    rows.push_back(a);
    bounds.push_back(c);
    rows.push_back(-a);
    bounds.push_back(-c - gap);
  }
  const int m_extra = inst.feasible ? 1 + extra_rows(rng) : extra_rows(rng);
  for (int i = 0; i < m_extra; ++i) {
    Eigen::RowVectorXd a;
    fresh_normal(a);
    rows.push_back(a);
    bounds.push_back(a.dot(w0) + slack(rng));
  }
  p.rows.resize(static_cast<int>(rows.size()), n);
  p.bounds.resize(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    p.rows.row(static_cast<int>(i)) = rows[i];
    p.bounds(static_cast<int>(i)) = bounds[i];
  }
  return inst;
}

}  // namespace testsupport
