#pragma once

// Feasibility-constraint synthesis: transforms control boxes into scalar
// intervals on the barrier axis, builds the auxiliary barrier that keeps the
// safety row and the control bounds jointly satisfiable, and checks the
// sampled sufficient conditions under which the point-wise QPs stay feasible
// along the whole closed-loop trajectory.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "cbf/constraints.hpp"
#include "cbf/dynamics.hpp"

namespace cbf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Auxiliary relative-degree <= 1 function phi whose invariance keeps the
// safety row compatible with the control box. gamma is the proportionality
// constant tying L_g phi to the safety row's control coefficient.
struct PhiSpec {
  ScalarFn value;     // phi
  ScalarFn lf_value;  // L_f phi
  RowFn lg_value;     // L_g phi
  ClassK alpha_u{1.0};
  double gamma = 1.0;
  int relative_degree = 1;  // 0: control appears in phi itself; 1: in phi'

  void validate() const;
};

// Sampled sufficient-condition check: all four must hold for the point-wise
// QPs to stay feasible along the trajectory.
struct FeasibilityCertificate {
  bool phi_x0_ok = false;  // phi(x0) >= 0
  double phi_x0 = 0.0;
  bool lf_phi_ok = false;  // L_f phi >= 0 at every sampled state
  double worst_lf_phi = 0.0;
  bool lg_proportional_ok = false;  // L_g phi == gamma * (safety row L_g term)
  double max_lg_deviation = 0.0;
  bool zero_in_bounds = false;  // 0 in the control box
  bool verdict = false;         // conjunction of the four flags
};

// Image of the control box under u -> -lg_row * u (componentwise products
// summed). Every component of lg_row must be <= 0 with at least one nonzero;
// apply sign_normalize first otherwise.
Interval transformed_bounds(const ControlBounds& bounds,
                            const Eigen::RowVectorXd& lg_row);

// Largest symmetric limit inside channel i's box: min(|lower_i|, upper_i).
// Requires lower_i < 0 < upper_i.
double sign_normalize(const ControlBounds& bounds, int i);

// Worst-case margin of the safety row against the control box: the row's
// bound minus its tightest achievable left-hand side over the box. The
// safety row and the box are jointly satisfiable at x iff this is >= 0.
double feasibility_value(const HocbfSpec& spec, const ControlBounds& bounds,
                         const Eigen::VectorXd& x);

// Closed-form Lie derivatives of the auxiliary barrier, supplied by the
// caller (the margin above depends on the box, so they cannot be derived
// from the HocbfSpec chain alone).
struct LieDerivatives {
  ScalarFn lf;
  RowFn lg;
};

// Invariance row for the margin barrier:
//   -L_g bF * u <= L_f bF + alpha_f(bF(x)),  label "feasibility".
ConstraintRow feasibility_row(const HocbfSpec& spec, const ControlBounds& bounds,
                              const Eigen::VectorXd& x, const ClassK& alpha_f,
                              const LieDerivatives& grads);

// Car-following synthesis: phi = gamma*(v_p - v) + c_d*grav with
// gamma = p1 p2/(p1 + p2), unit alpha_u slope, relative degree 1.
// phi >= 0 is exactly the speed bound v <= v_p + c_d*grav*(p1+p2)/(p1 p2).
PhiSpec acc_synthesize_phi(double p1, double p2, const AccParams& params);

// Invariance row for a relative-degree-1 phi:
//   -L_g phi * u <= L_f phi + alpha_u(phi(x)),  label "feasibility".
ConstraintRow phi_row(const PhiSpec& spec, const Eigen::VectorXd& x);

// Relative-degree-0 branch: phi_u(x, u) >= 0 read off as an affine row in u
// by probing. Throws if phi_u is not affine in u at x.
ConstraintRow phi_zero_row(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        phi_u,
    const Eigen::VectorXd& x, int control_dim);

// Evaluate the four sufficient conditions at x0 and across sample_states.
FeasibilityCertificate check_certificate(
    const PhiSpec& spec, const HocbfSpec& hocbf, const ControlBounds& bounds,
    const Eigen::VectorXd& x0, const std::vector<Eigen::VectorXd>& sample_states);

}  // namespace cbf
