#pragma once

// Car-following scenario assembly: wires the vehicle model, the gap barrier
// chain, the speed CLF, the control box, and (optionally) the synthesized
// feasibility row into a sim::Scenario, plus the minimum-braking-distance
// baseline used by comparison runs.

#include <Eigen/Dense>

#include "cbf/constraints.hpp"
#include "cbf/dynamics.hpp"
#include "cbf/feasibility.hpp"
#include "cbf/sim.hpp"

namespace cbf::acc {

enum class Baseline { None, MinBrakingDistance };

struct Scenario {
  AccParams params{};
  double p1 = 0.5;        // slope of the first gap-chain class-K layer
  double p2 = 1.0;        // slope of the second
  double epsilon = 10.0;  // CLF convergence rate
  double p_acc = 1.0;     // relaxation penalty weight
  bool feasibility_on = true;
  Baseline baseline = Baseline::None;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Gap barrier b = z - l0 as a relative-degree-2 chain with linear class-K
// slopes p1, p2 and mixed term p1 * (v_p - v).
HocbfSpec gap_barrier(const Scenario& s);

// Speed CLF V = (v - v_d)^2 relaxed at rate epsilon with penalty p_acc.
ClfSpec speed_clf(const Scenario& s);

// Braking-distance barrier b_bk = z - (v_p - v)^2 / (2 c_d g) - l0, relative
// degree 1 (its derivative already depends on u), class-K slope 2.
HocbfSpec braking_barrier(const Scenario& s);

// Synthesized auxiliary barrier for the gap chain.
PhiSpec phi_spec(const Scenario& s);

// Speed ceiling induced by the feasibility row:
// v_p + c_d * grav * (p1 + p2) / (p1 p2).
double speed_bound(const Scenario& s);

// True when the desired speed v_d stays below speed_bound, i.e. the loop can
// reach it without leaving the feasibility row's invariant set.
bool reachable_speed_check(const Scenario& s);

// Diagnostic margin logged with each trace record (the b_hF column):
// F_r(v)/M + 2 (p1 + p2)(v_p - v) + p1 p2 (z - l0) + c_d * grav.
double b_hf(const Scenario& s, const Eigen::VectorXd& x);

// Closed-loop scenario for sim::run. Row order per state: clf, u_upper,
// u_lower, safety, then the feasibility row when enabled. Selecting a
// baseline replaces the safety chain with the braking barrier and drops the
// feasibility row; its trace logs b = b_bk and leaves psi1/phi/b_hF as NaN.
sim::Scenario build(const Scenario& s);

}  // namespace cbf::acc
