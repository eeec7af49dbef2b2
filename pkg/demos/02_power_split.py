"""
Splitting power between the two users
=====================================

For a fixed layout the secondary user takes every bit of power the primary
can spare. The largest such share has a closed form; a brute-force scan over
alpha_s agrees with it.
"""
from pinchnoma import AntennaLayout, SystemConfig, UserPair, effective_channel, optimal_power_split, power_scan
from pinchnoma.power import qos_margins

users = UserPair(1.0, 2.0, 4.0, 0.5)
lay = AntennaLayout((3.9, 3.92))

for gamma in (0.1, 0.5, 2.0, 10.0):
    cfg = SystemConfig.from_units(gamma_p=gamma)
    ch = effective_channel(cfg, users, lay)
    res = optimal_power_split(cfg, ch, lay.n)
    scan = power_scan(cfg, ch, lay.n, step=1e-5)
    print(
        "gamma_p %5.1f  alpha_s %.6f (scan %.6f)  binding user %s  margins %s"
        % (gamma, res.alloc.alpha_s, scan.alpha_s, res.binding_user,
           tuple(round(m, 9) for m in qos_margins(cfg, ch, res.alloc, lay.n)))
    )

# When even alpha_p = 1 cannot meet the target the split is clamped and flagged
weak = SystemConfig.from_units(power_dbm=-30, gamma_p=10)
res = optimal_power_split(weak, effective_channel(weak, users, lay), lay.n)
print("weak link: alpha_s =", res.alloc.alpha_s, "infeasible:", res.infeasible_qos)
