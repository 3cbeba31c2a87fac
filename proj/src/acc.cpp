#include "cbf/acc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace cbf::acc {

void Scenario::validate() const {
  params.validate();
  if (!(p1 > 0.0)) throw std::invalid_argument("acc: p1 must be > 0");
  if (!(p2 > 0.0)) throw std::invalid_argument("acc: p2 must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("acc: epsilon must be > 0");
  if (!(p_acc > 0.0)) throw std::invalid_argument("acc: p_acc must be > 0");
}

HocbfSpec gap_barrier(const Scenario& s) {
  const AccParams p = s.params;
  const double p1 = s.p1;
  HocbfSpec spec;
  spec.relative_degree = 2;
  spec.value = [p](const Eigen::VectorXd& x) { return x(1) - p.l0; };
  spec.lf_value = [p](const Eigen::VectorXd& x) { return p.v_p - x(0); };
  spec.lf2_value = [p](const Eigen::VectorXd& x) {
    return resistance_force(p, x(0)) / p.mass;
  };
  spec.lglf_value = [p](const Eigen::VectorXd&) {
    return Eigen::RowVectorXd::Constant(1, -1.0 / p.mass);
  };
  spec.mixed_term = [p, p1](const Eigen::VectorXd& x) {
    return p1 * (p.v_p - x(0));
  };
  spec.alphas = {ClassK(s.p1), ClassK(s.p2)};
  return spec;
}

ClfSpec speed_clf(const Scenario& s) {
  const AccParams p = s.params;
  ClfSpec spec;
  spec.value = [p](const Eigen::VectorXd& x) {
    const double e = x(0) - p.v_d;
    return e * e;
  };
  spec.lf_value = [p](const Eigen::VectorXd& x) {
    return 2.0 * (x(0) - p.v_d) * (-resistance_force(p, x(0)) / p.mass);
  };
  spec.lg_value = [p](const Eigen::VectorXd& x) {
    return Eigen::RowVectorXd::Constant(1, 2.0 * (x(0) - p.v_d) / p.mass);
  };
  spec.epsilon = s.epsilon;
  spec.relax_weight = s.p_acc;
  return spec;
}

HocbfSpec braking_barrier(const Scenario& s) {
  const AccParams p = s.params;
  const double cd_g = p.c_d * p.grav;
  HocbfSpec spec;
  spec.relative_degree = 1;
  spec.value = [p, cd_g](const Eigen::VectorXd& x) {
    const double dv = p.v_p - x(0);
    return x(1) - dv * dv / (2.0 * cd_g) - p.l0;
  };
  // d/dt b_bk = (v_p - v) + (v_p - v) vdot / (c_d g); the drift part of vdot
  // is -F_r/M, the control part u/M.
  spec.lf_value = [p, cd_g](const Eigen::VectorXd& x) {
    const double dv = p.v_p - x(0);
    return dv * (1.0 - resistance_force(p, x(0)) / (p.mass * cd_g));
  };
  spec.lg_value = [p, cd_g](const Eigen::VectorXd& x) {
    return Eigen::RowVectorXd::Constant(1,
                                        (p.v_p - x(0)) / (p.mass * cd_g));
  };
  spec.alphas = {ClassK(2.0)};
  return spec;
}

PhiSpec phi_spec(const Scenario& s) {
  return acc_synthesize_phi(s.p1, s.p2, s.params);
}

double speed_bound(const Scenario& s) {
  return s.params.v_p +
         s.params.c_d * s.params.grav * (s.p1 + s.p2) / (s.p1 * s.p2);
}

bool reachable_speed_check(const Scenario& s) {
  return speed_bound(s) >= s.params.v_d;
}

double b_hf(const Scenario& s, const Eigen::VectorXd& x) {
  const AccParams& p = s.params;
  return resistance_force(p, x(0)) / p.mass +
         2.0 * (s.p1 + s.p2) * (p.v_p - x(0)) +
         s.p1 * s.p2 * (x(1) - p.l0) + p.c_d * p.grav;
}

sim::Scenario build(const Scenario& s) {
  s.validate();
  const AccParams params = s.params;
  const bool braking = s.baseline == Baseline::MinBrakingDistance;
  const HocbfSpec safety = braking ? braking_barrier(s) : gap_barrier(s);
  const ClfSpec clf = speed_clf(s);
  const ControlBounds bounds = acc_bounds(params);
  const bool with_phi = s.feasibility_on && !braking;
  const PhiSpec phi = phi_spec(s);
  const Scenario scen = s;

  sim::Scenario out;
  out.system = acc_system(params);
  out.rows = [safety, clf, bounds, phi, with_phi](const Eigen::VectorXd& x) {
    std::vector<ConstraintRow> rows;
    rows.reserve(5);
    rows.push_back(clf_row(clf, x, 1));
    for (auto& r : bound_rows(bounds)) rows.push_back(std::move(r));
    rows.push_back(hocbf_row(safety, x));
    if (with_phi) rows.push_back(phi_row(phi, x));
    return rows;
  };
  out.cost.hessian_diag = Eigen::VectorXd(2);
  out.cost.hessian_diag << 2.0 / (params.mass * params.mass), 2.0 * s.p_acc;
  out.cost.linear = [params](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(2);
    f << -2.0 * resistance_force(params, x(0)) / (params.mass * params.mass),
        0.0;
    return f;
  };
  if (braking) {
    out.observe = [safety](const Eigen::VectorXd& x) {
      sim::Observables o;
      o.b = safety.value(x);
      return o;  // psi1/phi/b_hF stay NaN: the m=2 chain is not in force
    };
  } else {
    out.observe = [safety, phi, scen](const Eigen::VectorXd& x) {
      sim::Observables o;
      o.b = safety.value(x);
      o.psi1 = psi_chain(safety, x)[1];
      o.phi = phi.value(x);
      o.b_hf = b_hf(scen, x);
      return o;
    };
  }
  out.state_warning = [](const Eigen::VectorXd& x) { return x(0) < 0.0; };
  out.initial_set_check = [safety](const Eigen::VectorXd& x) {
    for (double psi : psi_chain(safety, x))
      if (psi < 0.0) return false;
    return true;
  };
  if (with_phi)
    out.compatibility_labels = {"safety", "feasibility", "u_upper", "u_lower"};
  return out;
}

}  // namespace cbf::acc
