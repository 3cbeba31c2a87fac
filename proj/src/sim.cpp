#include "cbf/sim.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cbf::sim {

namespace {

qp::Problem assemble(const std::vector<ConstraintRow>& rows,
                     const StageCost& cost, const Eigen::VectorXd& x) {
  const int dim = static_cast<int>(cost.hessian_diag.size());
  if (dim < 2) throw std::invalid_argument("decision vector needs (u, delta)");
  if ((cost.hessian_diag.array() <= 0.0).any())
    throw std::invalid_argument("stage cost must be strictly convex");
  if (!cost.linear) throw std::invalid_argument("stage cost linear term missing");

  qp::Problem p;
  p.hessian = Eigen::MatrixXd(cost.hessian_diag.asDiagonal());
  p.linear = cost.linear(x);
  if (p.linear.size() != dim)
    throw std::invalid_argument("stage cost linear term has wrong size");
  p.rows.resize(static_cast<int>(rows.size()), dim);
  p.bounds.resize(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].coeffs.size() != dim)
      throw std::invalid_argument("constraint row width mismatch at " +
                                  rows[i].label);
    p.rows.row(static_cast<int>(i)) = rows[i].coeffs;
    p.bounds(static_cast<int>(i)) = rows[i].bound;
  }
  return p;
}

double find_safety_beta(const std::vector<ConstraintRow>& rows) {
  for (const auto& row : rows)
    if (row.label == "safety") return row.bound;
  return std::numeric_limits<double>::quiet_NaN();
}

bool labeled_rows_satisfiable(const std::vector<ConstraintRow>& rows,
                              const std::vector<std::string>& labels,
                              int dim) {
  std::vector<const ConstraintRow*> subset;
  for (const auto& row : rows)
    for (const auto& label : labels)
      if (row.label == label) {
        subset.push_back(&row);
        break;
      }
  if (subset.empty()) return true;
  qp::Problem p;
  p.hessian = Eigen::MatrixXd::Identity(dim, dim);
  p.linear = Eigen::VectorXd::Zero(dim);
  p.rows.resize(static_cast<int>(subset.size()), dim);
  p.bounds.resize(static_cast<int>(subset.size()));
  for (size_t i = 0; i < subset.size(); ++i) {
    p.rows.row(static_cast<int>(i)) = subset[i]->coeffs;
    p.bounds(static_cast<int>(i)) = subset[i]->bound;
  }
  return qp::check_feasible(p).feasible;
}

}  // namespace

void Config::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
}

StepResult step(const AffineSystem& system,
                const std::vector<ConstraintRow>& rows, const StageCost& cost,
                const Eigen::VectorXd& x) {
  const int dim = static_cast<int>(cost.hessian_diag.size());
  if (dim != system.control_dim + 1)
    throw std::invalid_argument(
        "decision dimension must be control_dim + 1 (the relaxation)");
  StepResult out;
  out.result = qp::solve(assemble(rows, cost, x));
  if (out.result.status == qp::Status::Optimal) {
    out.control = out.result.solution.head(system.control_dim);
    out.relaxation = out.result.solution(system.control_dim);
  }
  return out;
}

Eigen::VectorXd integrate_hold(const AffineSystem& system,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double dt,
                               int substeps) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (!u.allFinite())
    throw std::invalid_argument("control must be finite");
  const double h = dt / substeps;
  Eigen::VectorXd state = x;
  for (int s = 0; s < substeps; ++s) {
    const Eigen::VectorXd k1 = system.derivative(state, u);
    const Eigen::VectorXd k2 = system.derivative(state + 0.5 * h * k1, u);
    const Eigen::VectorXd k3 = system.derivative(state + 0.5 * h * k2, u);
    const Eigen::VectorXd k4 = system.derivative(state + h * k3, u);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!state.allFinite())
      throw std::runtime_error("integration produced a non-finite state at substep " +
                               std::to_string(s));
  }
  return state;
}

Trace run(const Scenario& scenario, const Config& config) {
  config.validate();
  if (!scenario.rows) throw std::invalid_argument("scenario rows missing");
  if (config.initial_state.size() != scenario.system.state_dim)
    throw std::invalid_argument("initial state has wrong dimension");

  Trace trace;
  Eigen::VectorXd x = config.initial_state;
  const int q = scenario.system.control_dim;
  const int dim = q + 1;

  if (scenario.initial_set_check)
    trace.initial_set_violation = !scenario.initial_set_check(x);

  trace.kkt.min_multiplier = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(config.horizon / config.dt + 1e-9);
  for (int k = 0; k < steps; ++k) {
    const double t = k * config.dt;
    if (scenario.state_warning && scenario.state_warning(x))
      trace.state_warning_seen = true;

    const std::vector<ConstraintRow> rows = scenario.rows(x);
    if (!scenario.compatibility_labels.empty() &&
        !labeled_rows_satisfiable(rows, scenario.compatibility_labels, dim))
      ++trace.compatibility_failures;

    const auto start = std::chrono::steady_clock::now();
    const StepResult sr = step(scenario.system, rows, scenario.cost, x);
    const auto stop = std::chrono::steady_clock::now();

    StepRecord rec;
    rec.t = t;
    rec.state = x;
    rec.qp_status = sr.result.status;
    rec.obs = scenario.observe ? scenario.observe(x) : Observables{};
    rec.safety_beta = find_safety_beta(rows);
    rec.solve_us =
        std::chrono::duration_cast<std::chrono::microseconds>(stop - start)
            .count();

    if (sr.result.status == qp::Status::Infeasible) {
      rec.control = Eigen::VectorXd::Constant(
          q, std::numeric_limits<double>::quiet_NaN());
      trace.records.push_back(std::move(rec));
      trace.terminal = Terminal::Infeasible;
      trace.infeasible_time = t;
      break;
    }

    rec.control = sr.control;
    rec.delta = sr.relaxation;
    trace.records.push_back(std::move(rec));

    const qp::Problem p = assemble(rows, scenario.cost, x);
    const qp::KktReport kkt = qp::kkt_report(p, sr.result);
    trace.kkt.max_primal_violation =
        std::max(trace.kkt.max_primal_violation, kkt.primal_violation);
    trace.kkt.max_stationarity =
        std::max(trace.kkt.max_stationarity, kkt.stationarity);
    trace.kkt.max_comp_slackness =
        std::max(trace.kkt.max_comp_slackness, kkt.comp_slackness);
    trace.kkt.min_multiplier =
        std::min(trace.kkt.min_multiplier, kkt.min_multiplier);
    ++trace.kkt.solves;

    x = integrate_hold(scenario.system, x, sr.control, config.dt,
                       config.substeps);
  }

  if (trace.kkt.solves == 0) trace.kkt.min_multiplier = 0.0;
  if (scenario.state_warning && scenario.state_warning(x))
    trace.state_warning_seen = true;
  trace.final_state = x;
  trace.final_time = trace.terminal == Terminal::Infeasible
                         ? trace.infeasible_time
                         : steps * config.dt;
  return trace;
}

}  // namespace cbf::sim
