#pragma once

// Control-affine system descriptions plus the car-following instance used
// throughout the toolkit: state (v, z) with v the ego speed, z the gap to a
// constant-speed lead vehicle, one control input u (wheel force).

#include <Eigen/Dense>
#include <functional>

namespace cbf {

// System of the form x' = f(x) + g(x) u.
struct AffineSystem {
  int state_dim = 0;
  int control_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;         // f
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> input_matrix;  // g

  // f(x) + g(x) u with dimension checks.
  Eigen::VectorXd derivative(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const;
};

// Box bounds on the control input, one entry per channel.
struct ControlBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Parameters of the car-following scenario. Defaults are the benchmark
// values used by the regression suite and the command-line tool.
struct AccParams {
  double mass = 1650.0;   // vehicle mass [kg]
  double grav = 9.81;     // gravitational acceleration [m/s^2]
  double f0 = 0.1;        // rolling resistance [N]
  double f1 = 5.0;        // linear drag [N s/m]
  double f2 = 0.25;       // quadratic drag [N s^2/m^2]
  double v_p = 13.89;     // lead vehicle speed [m/s]
  double v_d = 24.0;      // desired cruising speed [m/s]
  double l0 = 10.0;       // minimum standoff distance [m]
  double c_a = 0.4;       // max acceleration, fraction of g
  double c_d = 0.4;       // max deceleration, fraction of g

  // Throws std::invalid_argument on non-physical values.
  void validate() const;
};

// Aerodynamic/rolling resistance f0*sgn(v) + f1*v + f2*v^2 (sgn(0) = 0).
double resistance_force(const AccParams& params, double v);

// Two-state system: v' = (u - F_r(v)) / M, z' = v_p - v.
AffineSystem acc_system(const AccParams& params);

// Wheel-force limits [-c_d M g, c_a M g].
ControlBounds acc_bounds(const AccParams& params);

}  // namespace cbf
