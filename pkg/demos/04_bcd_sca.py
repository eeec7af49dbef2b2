"""
Several antennas: alternating optimisation
==========================================

Positions and the power split are updated in turn. The position step solves a
sequence of linear programs built from first-order expansions of the channel
terms, inside a trust region of a fraction of a wavelength.
"""
from pinchnoma import SystemConfig, bcd_solve, exhaustive_search
from pinchnoma.harness import deployment_rng, sample_deployment

cfg = SystemConfig.from_units(power_dbm=30, gamma_p=0.5)
users = sample_deployment(deployment_rng(seed=1, trial=0), 5.0)
print(users)

rep = bcd_solve(cfg, users, n=2)
print("positions", [round(x, 5) for x in rep.layout.positions])
print("alpha_s %.5f  rate_s %.4f  rate_p %.4f" % (rep.alloc.alpha_s, rep.rate_s, rep.rate_p))
print("outer trace", [round(r, 4) for r in rep.rate_trace], "inner iterations", rep.inner_iters)

orc = exhaustive_search(cfg, users, 2)
print("grid oracle rate_s %.4f  (ratio %.4f)" % (orc.rate_s, rep.rate_s / orc.rate_s))

# The two gradient models: frozen amplitude (phase only) and the exact one
for mode in ("paper", "full"):
    r = bcd_solve(cfg, users, n=6, gradient_mode=mode)
    print("N = 6, %-5s gradient: rate_s %.4f after %d outer iterations" % (mode, r.rate_s, r.outer_iters))
