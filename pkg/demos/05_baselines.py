"""
Against OMA and a fixed layout
==============================

OMA serves each user in its own half slot with its own antenna layout. The
fixed layout parks the antennas above the middle of the region and only
optimises the power split.
"""
import numpy as np

from pinchnoma import SystemConfig, bcd_solve, fixed_baseline, oma_solve
from pinchnoma.harness import deployment_rng, sample_deployment

cfg = SystemConfig.from_units(power_dbm=30)
rows = []
for t in range(10):
    users = sample_deployment(deployment_rng(seed=3, trial=t), 5.0)
    noma = bcd_solve(cfg, users, 2)
    oma = oma_solve(cfg, users, 2)
    fixed = fixed_baseline(cfg, users, 2)
    rows.append((noma.sum_rate, oma.sum_rate, noma.rate_s, fixed.rate_s, abs(users.y_s) < abs(users.y_p)))

rows = np.array(rows)
print("mean sum rate  NOMA %.3f  OMA %.3f" % (rows[:, 0].mean(), rows[:, 1].mean()))
print("mean rate_s    pinching %.3f  fixed %.3f" % (rows[:, 2].mean(), rows[:, 3].mean()))

# NOMA's edge depends on who performs SIC: it pays off when the secondary
# user is the one closer to the waveguide
near = rows[:, 4] == 1
print("NOMA - OMA when secondary is nearer: %.3f, farther: %.3f"
      % ((rows[near, 0] - rows[near, 1]).mean(), (rows[~near, 0] - rows[~near, 1]).mean()))
