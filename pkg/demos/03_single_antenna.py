"""
One antenna, solved exactly
===========================

With a single antenna the phases drop out and the problem is one-dimensional.
The optimum is found by checking a handful of candidate positions: the
secondary user's own position, the points where both targets are met with
equality, and the stationary points of the piece where only the primary's
target binds.

The lower-bound formula that fixes alpha_p at its smallest admissible value is
shown alongside; it places the antenna between the users and leaves rate on
the table.
"""
import numpy as np

from pinchnoma import SystemConfig, UserPair, exhaustive_search, paper_closed_form_n1, solve_n1

cfg = SystemConfig.from_units()
users = UserPair(x_p=0.5, y_p=0.0, x_s=4.5, y_s=3.0)

sol = solve_n1(cfg, users)
lit = paper_closed_form_n1(cfg, users)
grid = exhaustive_search(cfg, users, 1)
print("exact     x* = %.4f m  rate %.4f  case %s" % (sol.x_star, sol.secondary_rate, sol.case_id))
print("grid      x* = %.4f m  rate %.4f" % (grid.layout.positions[0], grid.rate_s))
print("lower bd  x* = %.4f m  rate %.4f  (its two position formulas differ by %.3f m)"
      % (lit.x_star, lit.secondary_rate, lit.position_spread))

# Placement against the primary's target. A demanding primary drags the
# antenna away from the secondary user.
print("\ngamma_p   x* [m]   alpha_s   rate_s")
for gamma in np.geomspace(0.1, 1e4, 7):
    s = solve_n1(cfg.replace(qos_target_gamma_p=gamma), users)
    if not s.feasible:
        print("%8.1f   infeasible" % gamma)
        continue
    print("%8.1f   %.4f   %.5f   %.4f" % (gamma, s.x_star, s.alpha_s_star, s.secondary_rate))
