"""
Monte Carlo sweeps
==================

An experiment is one scheme, one swept parameter and a number of random
deployments per point. Trial t always uses the same deployment, so sweep
points are directly comparable. The same run is available from the shell:

    pinchnoma sweep experiment.cfg --out results/n_sweep.csv
"""
import tempfile
from pathlib import Path

from pinchnoma import ExperimentSpec, run_experiment

spec = ExperimentSpec(scheme="bcd_sca", sweep_variable="N", sweep_values=(1, 2, 4, 8), trials=10, seed=7)
res = run_experiment(spec, write=False)
for n, rate in res.means("rate_s").items():
    print("N = %d  mean rate_s %.3f" % (n, rate))

# Fig-12 style check: optimise with or without knowledge of waveguide loss
common = dict(sweep_variable="P", sweep_values=(20, 30, 40), trials=10, seed=7, antennas=4, side_d=10.0)
aware = run_experiment(ExperimentSpec(attenuation="both", **common), write=False).means()
blind = run_experiment(ExperimentSpec(attenuation="eval", **common), write=False).means()
for p in aware:
    print("P = %d dBm  aware %.4f  ignored %.4f" % (p, aware[p], blind[p]))

out = Path(tempfile.mkdtemp()) / "sweep.csv"
run_experiment(spec.replace(out=str(out), trials=2))
print(out.read_text().splitlines()[0])
print("summary written to", out.with_suffix(".json"))
