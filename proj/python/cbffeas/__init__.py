"""Safety-filter toolkit: point-wise QP control with synthesized feasibility.

Thin wrapper over the compiled extension. The core operations are:

- ``solve_qp`` / ``check_feasible_qp``: small dense QPs with exact
  infeasibility certificates and KKT residual reporting.
- ``acc_rows`` / ``run_acc``: constraint-row assembly and the closed-loop
  car-following simulation.
- ``speed_bound`` / ``reachable_speed_check`` / ``check_certificate``:
  the synthesized feasibility row and its sufficient conditions.
"""

from ._core import (
    AccParams,
    acc_bounds,
    acc_rows,
    check_certificate,
    check_feasible_qp,
    reachable_speed_check,
    resistance_force,
    run_acc,
    solve_qp,
    speed_bound,
)

__all__ = [
    "AccParams",
    "acc_bounds",
    "acc_rows",
    "check_certificate",
    "check_feasible_qp",
    "reachable_speed_check",
    "resistance_force",
    "run_acc",
    "solve_qp",
    "speed_bound",
]

__version__ = "0.1.0"
