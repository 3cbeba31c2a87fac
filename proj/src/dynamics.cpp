#include "cbf/dynamics.hpp"

#include <stdexcept>

namespace cbf {

Eigen::VectorXd AffineSystem::derivative(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) const {
  if (x.size() != state_dim)
    throw std::invalid_argument("derivative: state has wrong dimension");
  if (u.size() != control_dim)
    throw std::invalid_argument("derivative: control has wrong dimension");
  return drift(x) + input_matrix(x) * u;
}

void AccParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (!(grav > 0.0)) throw std::invalid_argument("grav must be positive");
  if (!(c_a > 0.0)) throw std::invalid_argument("c_a must be positive");
  if (!(c_d > 0.0)) throw std::invalid_argument("c_d must be positive");
  if (f0 < 0.0 || f1 < 0.0 || f2 < 0.0)
    throw std::invalid_argument("resistance coefficients must be nonnegative");
  if (l0 < 0.0) throw std::invalid_argument("l0 must be nonnegative");
}

double resistance_force(const AccParams& params, double v) {
  const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return params.f0 * sgn + params.f1 * v + params.f2 * v * v;
}

AffineSystem acc_system(const AccParams& params) {
  params.validate();
  AffineSystem sys;
  sys.state_dim = 2;
  sys.control_dim = 1;
  sys.drift = [params](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(2);
    f << -resistance_force(params, x(0)) / params.mass, params.v_p - x(0);
    return f;
  };
  sys.input_matrix = [params](const Eigen::VectorXd&) {
    Eigen::MatrixXd g(2, 1);
    g << 1.0 / params.mass, 0.0;
    return g;
  };
  return sys;
}

ControlBounds acc_bounds(const AccParams& params) {
  params.validate();
  ControlBounds b;
  b.lower = Eigen::VectorXd::Constant(1, -params.c_d * params.mass * params.grav);
  b.upper = Eigen::VectorXd::Constant(1, params.c_a * params.mass * params.grav);
  return b;
}

}  // namespace cbf
