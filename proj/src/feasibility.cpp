#include "cbf/feasibility.hpp"

#include <cmath>
#include <stdexcept>

namespace cbf {

namespace {

void require_finite(const ConstraintRow& row) {
  if (!row.coeffs.allFinite() || !std::isfinite(row.bound))
    throw std::invalid_argument("constraint row has non-finite entries at " +
                                row.label);
}

}  // namespace

void PhiSpec::validate() const {
  if (relative_degree != 0 && relative_degree != 1)
    throw std::invalid_argument("phi relative degree must be 0 or 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (relative_degree == 1 && (!value || !lf_value || !lg_value))
    throw std::invalid_argument("phi Lie derivative callables missing");
}

Interval transformed_bounds(const ControlBounds& bounds,
                            const Eigen::RowVectorXd& lg_row) {
  if (bounds.lower.size() != lg_row.size() ||
      bounds.upper.size() != lg_row.size())
    throw std::invalid_argument("lg_row size does not match control box");
  if (lg_row.maxCoeff() > 0.0)
    throw std::invalid_argument(
        "lg_row has a positive component; apply sign_normalize first");
  if (lg_row.isZero(0.0))
    throw std::invalid_argument("lg_row is identically zero");
  Interval out;
  out.lo = (-lg_row) * bounds.lower;
  out.hi = (-lg_row) * bounds.upper;
  return out;
}

double sign_normalize(const ControlBounds& bounds, int i) {
  if (i < 0 || i >= bounds.lower.size())
    throw std::invalid_argument("control index out of range");
  const double lo = bounds.lower(i), hi = bounds.upper(i);
  if (!(lo < 0.0 && 0.0 < hi))
    throw std::invalid_argument("control box must straddle zero");
  return std::min(std::abs(lo), hi);
}

double feasibility_value(const HocbfSpec& spec, const ControlBounds& bounds,
                         const Eigen::VectorXd& x) {
  spec.validate();
  const Eigen::RowVectorXd lg = spec.top_lg(x);
  if (bounds.lower.size() != lg.size())
    throw std::invalid_argument("control box size does not match spec");
  const std::vector<double> psi = psi_chain(spec, x);
  // Highest derivative's drift part + class-K term + the u_min corner of the
  // box. Under the standing sign convention (control coefficients <= 0) that
  // corner is the most favorable one, so >= 0 here means the safety row and
  // the box intersect.
  return spec.top_lf(x) + spec.alphas.back()(psi.back()) + lg * bounds.lower;
}

ConstraintRow feasibility_row(const HocbfSpec& spec, const ControlBounds& bounds,
                              const Eigen::VectorXd& x, const ClassK& alpha_f,
                              const LieDerivatives& grads) {
  if (!grads.lf || !grads.lg)
    throw std::invalid_argument(
        "feasibility_row needs closed-form Lie derivatives of the margin");
  const double bf = feasibility_value(spec, bounds, x);
  const Eigen::RowVectorXd lg = grads.lg(x);
  ConstraintRow row;
  row.coeffs = Eigen::RowVectorXd::Zero(lg.size() + 1);
  row.coeffs.head(lg.size()) = -lg;
  row.bound = grads.lf(x) + alpha_f(bf);
  row.label = "feasibility";
  require_finite(row);
  return row;
}

PhiSpec acc_synthesize_phi(double p1, double p2, const AccParams& params) {
  if (!(p1 > 0.0) || !(p2 > 0.0))
    throw std::invalid_argument("chain slopes must be positive");
  params.validate();
  const double gamma = p1 * p2 / (p1 + p2);
  PhiSpec spec;
  spec.value = [gamma, params](const Eigen::VectorXd& x) {
    return gamma * (params.v_p - x(0)) + params.c_d * params.grav;
  };
  spec.lf_value = [gamma, params](const Eigen::VectorXd& x) {
    return gamma * resistance_force(params, x(0)) / params.mass;
  };
  spec.lg_value = [gamma, params](const Eigen::VectorXd&) {
    return Eigen::RowVectorXd::Constant(1, -gamma / params.mass);
  };
  spec.alpha_u = ClassK(1.0);
  spec.gamma = gamma;
  spec.relative_degree = 1;
  return spec;
}

ConstraintRow phi_row(const PhiSpec& spec, const Eigen::VectorXd& x) {
  spec.validate();
  if (spec.relative_degree != 1)
    throw std::invalid_argument(
        "phi has relative degree 0; use phi_zero_row instead");
  const Eigen::RowVectorXd lg = spec.lg_value(x);
  ConstraintRow row;
  row.coeffs = Eigen::RowVectorXd::Zero(lg.size() + 1);
  row.coeffs.head(lg.size()) = -lg;
  row.bound = spec.lf_value(x) + spec.alpha_u(spec.value(x));
  row.label = "feasibility";
  require_finite(row);
  return row;
}

ConstraintRow phi_zero_row(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        phi_u,
    const Eigen::VectorXd& x, int control_dim) {
  if (!phi_u) throw std::invalid_argument("phi callable missing");
  if (control_dim <= 0)
    throw std::invalid_argument("control dimension must be positive");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(control_dim);
  const double c0 = phi_u(x, zero);
  Eigen::RowVectorXd coeff(control_dim);
  for (int i = 0; i < control_dim; ++i) {
    Eigen::VectorXd e = zero;
    e(i) = 1.0;
    coeff(i) = phi_u(x, e) - c0;
    // Affineness probe: doubling the input must double the increment.
    e(i) = 2.0;
    const double twice = phi_u(x, e) - c0;
    if (std::abs(twice - 2.0 * coeff(i)) >
        1e-9 * std::max(1.0, std::abs(twice)))
      throw std::invalid_argument("phi is not affine in the control");
  }
  // Cross-channel probe at a fixed point.
  const Eigen::VectorXd probe = Eigen::VectorXd::Constant(control_dim, 0.5);
  const double mixed = phi_u(x, probe);
  if (std::abs(mixed - (c0 + coeff * probe)) >
      1e-9 * std::max(1.0, std::abs(mixed)))
    throw std::invalid_argument("phi is not affine in the control");

  ConstraintRow row;
  row.coeffs = Eigen::RowVectorXd::Zero(control_dim + 1);
  row.coeffs.head(control_dim) = -coeff;
  row.bound = c0;
  row.label = "feasibility";
  require_finite(row);
  return row;
}

FeasibilityCertificate check_certificate(
    const PhiSpec& spec, const HocbfSpec& hocbf, const ControlBounds& bounds,
    const Eigen::VectorXd& x0,
    const std::vector<Eigen::VectorXd>& sample_states) {
  spec.validate();
  hocbf.validate();
  if (sample_states.empty())
    throw std::invalid_argument("certificate needs at least one sample state");

  FeasibilityCertificate cert;
  cert.phi_x0 = spec.value(x0);
  cert.phi_x0_ok = cert.phi_x0 >= 0.0;

  cert.worst_lf_phi = spec.lf_value(x0);
  cert.max_lg_deviation = 0.0;
  auto visit = [&](const Eigen::VectorXd& x) {
    cert.worst_lf_phi = std::min(cert.worst_lf_phi, spec.lf_value(x));
    const Eigen::RowVectorXd dev =
        spec.lg_value(x) - spec.gamma * hocbf.top_lg(x);
    cert.max_lg_deviation =
        std::max(cert.max_lg_deviation, dev.cwiseAbs().maxCoeff());
  };
  visit(x0);
  for (const auto& x : sample_states) visit(x);
  cert.lf_phi_ok = cert.worst_lf_phi >= 0.0;
  cert.lg_proportional_ok = cert.max_lg_deviation <= 1e-9;

  cert.zero_in_bounds =
      (bounds.lower.array() <= 0.0).all() && (bounds.upper.array() >= 0.0).all();
  cert.verdict = cert.phi_x0_ok && cert.lf_phi_ok && cert.lg_proportional_ok &&
                 cert.zero_in_bounds;
  return cert;
}

}  // namespace cbf
