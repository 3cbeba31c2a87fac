#pragma once

// Declarative layer between barrier/Lyapunov specifications and the QP:
// builds affine-in-decision inequality rows a·w <= beta for a decision
// vector w = (u_1..u_q, delta). Lie derivatives are supplied as closed-form
// callables; finite-difference helpers are provided to cross-check them.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "cbf/dynamics.hpp"

namespace cbf {

// Class-K function. Only the linear family alpha(s) = slope * s ships; the
// kind tag keeps the extension point explicit.
struct ClassK {
  enum class Kind { Linear };
  Kind kind = Kind::Linear;
  double slope = 1.0;

  explicit ClassK(double k);
  double operator()(double s) const;
};

// One inequality coeffs * w <= bound over the decision vector (u..., delta).
struct ConstraintRow {
  Eigen::RowVectorXd coeffs;
  double bound = 0.0;
  std::string label;
};

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using RowFn = std::function<Eigen::RowVectorXd(const Eigen::VectorXd&)>;

// Barrier with relative degree 1 or 2. The caller supplies the Lie
// derivative chain in closed form:
//   degree 1: value, lf_value, lg_value
//   degree 2: value, lf_value, lf2_value, lglf_value, mixed_term
// where mixed_term is the derivative cross-term of the inner class-K layer
// (slope_1 * L_f b for a linear first layer).
struct HocbfSpec {
  int relative_degree = 1;
  ScalarFn value;       // b
  ScalarFn lf_value;    // L_f b
  RowFn lg_value;       // L_g b            (degree 1)
  ScalarFn lf2_value;   // L_f^2 b          (degree 2)
  RowFn lglf_value;     // L_g L_f b        (degree 2)
  ScalarFn mixed_term;  // S(b)             (degree 2)
  std::vector<ClassK> alphas;  // one per degree, innermost first

  void validate() const;
  // Drift part of the highest derivative: L_f b (deg 1), L_f^2 b + S(b) (deg 2).
  double top_lf(const Eigen::VectorXd& x) const;
  // Control part of the highest derivative: L_g b (deg 1), L_g L_f b (deg 2).
  Eigen::RowVectorXd top_lg(const Eigen::VectorXd& x) const;
};

// Lyapunov certificate with relaxed exponential decay rate epsilon and
// penalty weight on the scalar relaxation delta.
struct ClfSpec {
  ScalarFn value;     // V
  ScalarFn lf_value;  // L_f V
  RowFn lg_value;     // L_g V
  double epsilon = 1.0;
  double relax_weight = 1.0;

  void validate() const;
};

// psi_0 = b, psi_{i} = d(psi_{i-1})/dt|_drift + alpha_i(psi_{i-1}); returns
// psi_0..psi_{m-1}.
std::vector<double> psi_chain(const HocbfSpec& spec, const Eigen::VectorXd& x);

// Safety row: -top_lg(x) u <= top_lf(x) + alpha_m(psi_{m-1}(x)); delta
// coefficient 0; label "safety".
ConstraintRow hocbf_row(const HocbfSpec& spec, const Eigen::VectorXd& x);

// Relaxed stabilization row: (L_g V) u - delta <= -L_f V - epsilon V;
// label "clf".
ConstraintRow clf_row(const ClfSpec& spec, const Eigen::VectorXd& x,
                      int control_dim);

// Box rows per channel i: (+e_i) u <= upper_i then (-e_i) u <= -lower_i,
// labels "u_upper" / "u_lower".
std::vector<ConstraintRow> bound_rows(const ControlBounds& bounds);

// Central-difference Lie derivatives for validating hand-coded callables:
// directional derivative of h along the drift / along each input column.
double fd_lie_f(const ScalarFn& h, const AffineSystem& sys,
                const Eigen::VectorXd& x, double step = 1e-6);
Eigen::RowVectorXd fd_lie_g(const ScalarFn& h, const AffineSystem& sys,
                            const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace cbf
