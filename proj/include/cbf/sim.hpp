#pragma once

// Discretized control loop: at each sample instant freeze the state, build
// the constraint rows, solve the QP for (u, delta), hold u constant over the
// interval, integrate the plant with fixed-step RK4, and log everything.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cbf/constraints.hpp"
#include "cbf/dynamics.hpp"
#include "cbf/qp.hpp"

namespace cbf::sim {

// Quadratic stage cost over the decision vector (u..., delta): diagonal
// Hessian plus a state-dependent linear term.
struct StageCost {
  Eigen::VectorXd hessian_diag;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> linear;
};

// Scalar diagnostics logged per step; NaN when a quantity does not apply.
struct Observables {
  double b = std::numeric_limits<double>::quiet_NaN();
  double psi1 = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  double b_hf = std::numeric_limits<double>::quiet_NaN();
};

// A fully assembled closed-loop scenario. `rows` is re-evaluated at every
// sample state; optional callbacks add logging and health checks.
struct Scenario {
  AffineSystem system;
  std::function<std::vector<ConstraintRow>(const Eigen::VectorXd&)> rows;
  StageCost cost;
  std::function<Observables(const Eigen::VectorXd&)> observe;
  std::function<bool(const Eigen::VectorXd&)> state_warning;     // true = warn
  std::function<bool(const Eigen::VectorXd&)> initial_set_check;  // true = ok
  // When nonempty: before each solve, check that the rows carrying these
  // labels are jointly satisfiable on their own (an observable stand-in for
  // the usual "constraints never conflict" assumption).
  std::vector<std::string> compatibility_labels;
};

struct Config {
  double dt = 0.1;
  double horizon = 30.0;
  int substeps = 10;
  Eigen::VectorXd initial_state;

  void validate() const;
};

enum class Terminal { Completed, Infeasible };

struct StepRecord {
  double t = 0.0;
  Eigen::VectorXd state;
  Eigen::VectorXd control;  // NaN entries when the QP was infeasible
  double delta = std::numeric_limits<double>::quiet_NaN();
  qp::Status qp_status = qp::Status::Optimal;
  Observables obs;
  double safety_beta = std::numeric_limits<double>::quiet_NaN();
  std::int64_t solve_us = 0;
};

struct KktAggregates {
  double max_primal_violation = 0.0;
  double max_stationarity = 0.0;
  double max_comp_slackness = 0.0;
  double min_multiplier = 0.0;
  int solves = 0;
};

struct Trace {
  std::vector<StepRecord> records;
  Terminal terminal = Terminal::Completed;
  double infeasible_time = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd final_state;
  double final_time = 0.0;
  bool initial_set_violation = false;
  bool state_warning_seen = false;
  KktAggregates kkt;
  int compatibility_failures = 0;
};

struct StepResult {
  qp::Result result;
  Eigen::VectorXd control;  // empty unless Optimal
  double relaxation = std::numeric_limits<double>::quiet_NaN();
};

// One frozen-state QP over (u, delta).
StepResult step(const AffineSystem& system,
                const std::vector<ConstraintRow>& rows, const StageCost& cost,
                const Eigen::VectorXd& x);

// Classical RK4 under constant u, `substeps` equal substeps. Throws
// std::runtime_error if a non-finite state appears.
Eigen::VectorXd integrate_hold(const AffineSystem& system,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double dt,
                               int substeps);

// Full closed loop over [0, horizon]; halts at the first infeasible step
// (that step is recorded, nothing after it).
Trace run(const Scenario& scenario, const Config& config);

}  // namespace cbf::sim
