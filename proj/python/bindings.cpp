// Python bindings for the core operations: QP solve/feasibility check,
// vehicle-model helpers, constraint-row introspection, the feasibility
// certificate, and the closed-loop simulation.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "cbf/acc.hpp"
#include "cbf/dynamics.hpp"
#include "cbf/feasibility.hpp"
#include "cbf/qp.hpp"
#include "cbf/sim.hpp"

namespace py = pybind11;

namespace {

cbf::acc::Scenario make_scenario(const cbf::AccParams& params, double p1,
                                 double p2, double epsilon, double p_acc,
                                 bool feasibility_on,
                                 const std::string& baseline) {
  cbf::acc::Scenario s;
  s.params = params;
  s.p1 = p1;
  s.p2 = p2;
  s.epsilon = epsilon;
  s.p_acc = p_acc;
  s.feasibility_on = feasibility_on;
  if (baseline == "none")
    s.baseline = cbf::acc::Baseline::None;
  else if (baseline == "min_braking_distance")
    s.baseline = cbf::acc::Baseline::MinBrakingDistance;
  else
    throw std::invalid_argument(
        "baseline: expected 'none' or 'min_braking_distance'");
  s.validate();
  return s;
}

cbf::qp::Problem make_problem(const Eigen::MatrixXd& hessian,
                              const Eigen::VectorXd& linear,
                              const Eigen::MatrixXd& rows,
                              const Eigen::VectorXd& bounds) {
  cbf::qp::Problem p;
  p.hessian = hessian;
  p.linear = linear;
  p.rows = rows;
  p.bounds = bounds;
  return p;
}

py::dict kkt_dict(const cbf::qp::KktReport& r) {
  py::dict d;
  d["primal_violation"] = r.primal_violation;
  d["stationarity"] = r.stationarity;
  d["comp_slackness"] = r.comp_slackness;
  d["min_multiplier"] = r.min_multiplier;
  d["ok"] = r.ok();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Safety-filter toolkit core: constraint-row assembly, a small QP "
      "solver with exact infeasibility certificates, feasibility-row "
      "synthesis, and a closed-loop car-following simulation.";

  py::class_<cbf::AccParams>(m, "AccParams")
      .def(py::init<>())
      .def_readwrite("mass", &cbf::AccParams::mass)
      .def_readwrite("grav", &cbf::AccParams::grav)
      .def_readwrite("f0", &cbf::AccParams::f0)
      .def_readwrite("f1", &cbf::AccParams::f1)
      .def_readwrite("f2", &cbf::AccParams::f2)
      .def_readwrite("v_p", &cbf::AccParams::v_p)
      .def_readwrite("v_d", &cbf::AccParams::v_d)
      .def_readwrite("l0", &cbf::AccParams::l0)
      .def_readwrite("c_a", &cbf::AccParams::c_a)
      .def_readwrite("c_d", &cbf::AccParams::c_d)
      .def("validate", &cbf::AccParams::validate);

  m.def("resistance_force", &cbf::resistance_force, py::arg("params"),
        py::arg("v"), "Rolling/aero resistance f0*sgn(v) + f1*v + f2*v^2.");

  m.def(
      "acc_bounds",
      [](const cbf::AccParams& params) {
        const auto b = cbf::acc_bounds(params);
        return py::make_tuple(b.lower, b.upper);
      },
      py::arg("params"),
      "Wheel-force box (lower, upper) = (-c_d, c_a) * mass * grav.");

  m.def(
      "speed_bound",
      [](double p1, double p2, const cbf::AccParams& params) {
        cbf::acc::Scenario s;
        s.params = params;
        s.p1 = p1;
        s.p2 = p2;
        s.validate();
        return cbf::acc::speed_bound(s);
      },
      py::arg("p1"), py::arg("p2"), py::arg("params") = cbf::AccParams{},
      "Speed ceiling v_p + c_d*grav*(p1+p2)/(p1*p2) induced by the "
      "feasibility row.");

  m.def(
      "reachable_speed_check",
      [](double p1, double p2, const cbf::AccParams& params) {
        cbf::acc::Scenario s;
        s.params = params;
        s.p1 = p1;
        s.p2 = p2;
        s.validate();
        return cbf::acc::reachable_speed_check(s);
      },
      py::arg("p1"), py::arg("p2"), py::arg("params") = cbf::AccParams{},
      "True when v_d stays below the induced speed ceiling.");

  m.def(
      "solve_qp",
      [](const Eigen::MatrixXd& hessian, const Eigen::VectorXd& linear,
         const Eigen::MatrixXd& rows, const Eigen::VectorXd& bounds) {
        const auto p = make_problem(hessian, linear, rows, bounds);
        const auto res = cbf::qp::solve(p);
        py::dict d;
        const bool ok = res.status == cbf::qp::Status::Optimal;
        d["status"] = ok ? "optimal" : "infeasible";
        d["w"] = res.solution;
        d["multipliers"] = res.multipliers;
        d["objective"] = res.objective;
        d["phase1_slack"] = res.infeasibility;
        if (ok) d["kkt"] = kkt_dict(cbf::qp::kkt_report(p, res));
        return d;
      },
      py::arg("hessian"), py::arg("linear"), py::arg("rows"),
      py::arg("bounds"),
      "Minimize 1/2 w'Hw + F'w subject to rows*w <= bounds. Returns a dict "
      "with status, w, multipliers, objective, phase1_slack, and (when "
      "optimal) the KKT residuals.");

  m.def(
      "check_feasible_qp",
      [](const Eigen::MatrixXd& rows, const Eigen::VectorXd& bounds) {
        cbf::qp::Problem p;
        const int n = static_cast<int>(rows.cols());
        p.hessian = Eigen::MatrixXd::Identity(n, n);
        p.linear = Eigen::VectorXd::Zero(n);
        p.rows = rows;
        p.bounds = bounds;
        const auto rep = cbf::qp::check_feasible(p);
        py::dict d;
        d["feasible"] = rep.feasible;
        d["slack"] = rep.slack;
        return d;
      },
      py::arg("rows"), py::arg("bounds"),
      "Exact feasibility certificate for rows*w <= bounds: minimized "
      "worst-row slack (feasible iff <= 0 within tolerance).");

  m.def(
      "acc_rows",
      [](double p1, double p2, const Eigen::VectorXd& x, bool feasibility_on,
         const cbf::AccParams& params) {
        const auto s =
            make_scenario(params, p1, p2, 10.0, 1.0, feasibility_on, "none");
        const auto scen = cbf::acc::build(s);
        py::list out;
        for (const auto& row : scen.rows(x)) {
          py::dict d;
          d["label"] = row.label;
          d["coeffs"] = Eigen::RowVectorXd(row.coeffs);
          d["bound"] = row.bound;
          out.append(d);
        }
        return out;
      },
      py::arg("p1"), py::arg("p2"), py::arg("x"),
      py::arg("feasibility_on") = true, py::arg("params") = cbf::AccParams{},
      "Constraint rows (label, coeffs over (u, delta), bound) assembled at "
      "state x = (v, z).");

  m.def(
      "check_certificate",
      [](double p1, double p2, const Eigen::VectorXd& x0,
         const std::vector<Eigen::VectorXd>& samples,
         const cbf::AccParams& params) {
        cbf::acc::Scenario s;
        s.params = params;
        s.p1 = p1;
        s.p2 = p2;
        s.validate();
        const auto cert = cbf::check_certificate(
            cbf::acc::phi_spec(s), cbf::acc::gap_barrier(s),
            cbf::acc_bounds(params), x0, samples);
        py::dict d;
        d["phi_x0_ok"] = cert.phi_x0_ok;
        d["phi_x0"] = cert.phi_x0;
        d["lf_phi_ok"] = cert.lf_phi_ok;
        d["worst_lf_phi"] = cert.worst_lf_phi;
        d["lg_proportional_ok"] = cert.lg_proportional_ok;
        d["max_lg_deviation"] = cert.max_lg_deviation;
        d["zero_in_bounds"] = cert.zero_in_bounds;
        d["verdict"] = cert.verdict;
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("x0"),
      py::arg("samples") = std::vector<Eigen::VectorXd>{},
      py::arg("params") = cbf::AccParams{},
      "Evaluate the four sufficient feasibility conditions at x0 and across "
      "sample states.");

  m.def(
      "run_acc",
      [](double p1, double p2, bool feasibility_on,
         const std::string& baseline, double v0, double z0, double dt,
         double horizon, int substeps, double epsilon, double p_acc,
         const cbf::AccParams& params) {
        const auto s = make_scenario(params, p1, p2, epsilon, p_acc,
                                     feasibility_on, baseline);
        cbf::sim::Config c;
        c.dt = dt;
        c.horizon = horizon;
        c.substeps = substeps;
        c.initial_state = Eigen::Vector2d(v0, z0);
        c.validate();
        const auto trace = cbf::sim::run(cbf::acc::build(s), c);

        const auto n = trace.records.size();
        Eigen::VectorXd t(n), v(n), z(n), u(n), delta(n), b(n), psi1(n),
            phi(n), b_hf(n), beta(n);
        for (size_t i = 0; i < n; ++i) {
          const auto& r = trace.records[i];
          t(i) = r.t;
          v(i) = r.state(0);
          z(i) = r.state(1);
          u(i) = r.control.size() > 0
                     ? r.control(0)
                     : std::numeric_limits<double>::quiet_NaN();
          delta(i) = r.delta;
          b(i) = r.obs.b;
          psi1(i) = r.obs.psi1;
          phi(i) = r.obs.phi;
          b_hf(i) = r.obs.b_hf;
          beta(i) = r.safety_beta;
        }
        py::dict d;
        d["t"] = t;
        d["v"] = v;
        d["z"] = z;
        d["u"] = u;
        d["delta"] = delta;
        d["b"] = b;
        d["psi1"] = psi1;
        d["phi"] = phi;
        d["b_hF"] = b_hf;
        d["safety_beta"] = beta;
        d["status"] = trace.terminal == cbf::sim::Terminal::Completed
                          ? "completed"
                          : "infeasible";
        d["infeasible_time"] = trace.infeasible_time;
        d["final_time"] = trace.final_time;
        d["final_state"] = trace.final_state;
        d["initial_set_violation"] = trace.initial_set_violation;
        d["compatibility_failures"] = trace.compatibility_failures;
        py::dict kkt;
        kkt["max_primal_violation"] = trace.kkt.max_primal_violation;
        kkt["max_stationarity"] = trace.kkt.max_stationarity;
        kkt["max_comp_slackness"] = trace.kkt.max_comp_slackness;
        kkt["min_multiplier"] = trace.kkt.min_multiplier;
        kkt["solves"] = trace.kkt.solves;
        d["kkt"] = kkt;
        return d;
      },
      py::arg("p1") = 0.5, py::arg("p2") = 1.0,
      py::arg("feasibility_on") = true, py::arg("baseline") = "none",
      py::arg("v0") = 6.0, py::arg("z0") = 100.0, py::arg("dt") = 0.1,
      py::arg("horizon") = 30.0, py::arg("substeps") = 10,
      py::arg("epsilon") = 10.0, py::arg("p_acc") = 1.0,
      py::arg("params") = cbf::AccParams{},
      "Closed-loop car-following run. Returns per-step arrays (t, v, z, u, "
      "delta, b, psi1, phi, b_hF, safety_beta) plus status, final state, and "
      "KKT residual aggregates.");
}
