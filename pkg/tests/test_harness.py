import json
import math

import numpy as np
import pytest

from pinchnoma import cli
from pinchnoma.harness import (
    CSV_COLUMNS,
    ExperimentSpec,
    compare_schemes,
    deployment_rng,
    load_spec,
    parse_config,
    parse_positions,
    read_csv,
    run_experiment,
    run_trial,
    sample_deployment,
)
from pinchnoma.model import PowerAllocation, UserPair, effective_channel, noma_rates, oma_rate


def test_sample_deployment_is_seeded():
    a = sample_deployment(deployment_rng(7, 3), 5.0)
    b = sample_deployment(deployment_rng(7, 3), 5.0)
    assert a == b
    assert a != sample_deployment(deployment_rng(7, 4), 5.0)
    for v in (a.x_p, a.y_p, a.x_s, a.y_s):
        assert 0.0 <= v <= 5.0


def test_sample_deployment_statistics():
    rng = np.random.default_rng(0)
    xs = [sample_deployment(rng, 5.0).x_p for _ in range(10_000)]
    assert abs(np.mean(xs) - 2.5) < 0.05


def test_sample_deployment_rejects_empty_region():
    with pytest.raises(ValueError):
        sample_deployment(np.random.default_rng(0), 0.0)


@pytest.mark.parametrize(
    "changes",
    [
        {"trials": 0},
        {"scheme": "sdr"},
        {"sweep_variable": "noise"},
        {"sweep_values": (100.0,)},
        {"sweep_variable": "N", "sweep_values": (2.5,)},
        {"scheme": "closed_form_n1", "antennas": 2},
        {"scheme": "exhaustive", "antennas": 4},
        {"attenuation": "maybe"},
        {"gradient_mode": "exact"},
    ],
)
def test_spec_validation(changes):
    with pytest.raises(ValueError):
        ExperimentSpec(**changes)


def _small_spec(**kw):
    base = dict(scheme="bcd_sca", sweep_variable="P", sweep_values=(20.0, 30.0), trials=3, seed=4)
    base.update(kw)
    return ExperimentSpec(**base)


def test_csv_schema_and_determinism(tmp_path):
    spec = _small_spec(out=str(tmp_path / "a.csv"))
    run_experiment(spec)
    run_experiment(spec.replace(out=str(tmp_path / "b.csv")))
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert b"\r" not in a
    text = a.decode("utf-8")
    assert text.splitlines()[0].split(",") == list(CSV_COLUMNS)
    assert len(read_csv(text)) == 6
    summary = json.loads((tmp_path / "a.json").read_text())
    assert [p["sweep_value"] for p in summary["points"]] == [20.0, 30.0]
    assert list(summary) == sorted(summary)


def test_worker_count_does_not_change_output():
    spec = _small_spec(trials=2)
    assert run_experiment(spec).to_csv() == run_experiment(spec.replace(workers=2)).to_csv()


def test_rows_round_trip_through_the_model():
    spec = _small_spec(sweep_variable="N", sweep_values=(1.0, 3.0))
    res = run_experiment(spec)
    for row in read_csv(res.to_csv()):
        users = UserPair(*(float(row[k]) for k in ("x_p", "y_p", "x_s", "y_s")))
        cfg = spec.config(float(row["sweep_value"]))
        lay = parse_positions(row["positions"])
        alloc = PowerAllocation(float(row["alpha_p"]), float(row["alpha_s"]))
        rp, rs = noma_rates(cfg, effective_channel(cfg, users, lay), alloc, lay.n)
        assert rp == float(row["rate_p"]) and rs == float(row["rate_s"])


def test_oma_rows_round_trip():
    spec = _small_spec(scheme="oma", trials=2)
    for row in read_csv(run_experiment(spec).to_csv()):
        users = UserPair(*(float(row[k]) for k in ("x_p", "y_p", "x_s", "y_s")))
        cfg = spec.config(float(row["sweep_value"]))
        lp, ls = (parse_positions(p) for p in row["positions"].split("|"))
        assert oma_rate(cfg, users, lp, "p") == float(row["rate_p"])
        assert oma_rate(cfg, users, ls, "s") == float(row["rate_s"])


def test_same_deployments_across_sweep_points_and_schemes():
    res = run_experiment(_small_spec())
    by_trial = {}
    for r in res.records:
        by_trial.setdefault(r.trial, set()).add((r.x_p, r.y_p, r.x_s, r.y_s))
    assert all(len(v) == 1 for v in by_trial.values())
    rows, a, b = compare_schemes(_small_spec(), "bcd_sca", "fixed_baseline")
    assert len(rows) == 6
    assert all(x.users == y.users for x, y in zip(a.records, b.records))


def test_failures_are_recorded_in_row(monkeypatch):
    from pinchnoma import harness

    def boom(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(harness, "bcd_solve", boom)
    rec = run_trial(_small_spec(), 20.0, 0)
    assert rec.termination == "error:RuntimeError"
    assert math.isnan(rec.rate_s)
    res = run_experiment(_small_spec(trials=1))
    assert res.summary()["points"][0]["errors"] == 1


def test_attenuation_modes_differ_only_in_optimisation():
    spec = _small_spec(antennas=2, attenuation="eval", trials=1)
    eval_rec = run_trial(spec, 30.0, 0)
    both_rec = run_trial(spec.replace(attenuation="both"), 30.0, 0)
    off_rec = run_trial(spec.replace(attenuation="off"), 30.0, 0)
    assert eval_rec.positions == off_rec.positions
    assert eval_rec.rate_s < off_rec.rate_s
    assert both_rec.rate_s == pytest.approx(eval_rec.rate_s, rel=0.02)


def test_config_parser(tmp_path):
    text = "scheme = oma  # comment\nsweep_variable = gamma_p\nsweep_values = 0.1, 0.2\ntrials = 2\ntiming = false\n"
    vals = parse_config(text)
    assert vals == {"scheme": "oma", "sweep_variable": "gamma_p", "sweep_values": (0.1, 0.2), "trials": 2, "timing": False}
    with pytest.raises(ValueError, match="unknown key"):
        parse_config("trails = 3\n")
    with pytest.raises(ValueError):
        parse_config("trials 3\n")
    with pytest.raises(ValueError):
        parse_config("trials = 3\ntrials = 4\n")
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    assert load_spec(path, trials=5).trials == 5


def test_timing_column():
    assert math.isnan(run_trial(_small_spec(), 20.0, 0).wall_ms)
    assert run_trial(_small_spec(timing=True), 20.0, 0).wall_ms > 0


def test_cli_solve_and_oracle(capsys):
    assert cli.main(["solve", "--seed", "2", "--antennas", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["scheme"] == "bcd_sca" and out["rate_s"] > 0
    assert cli.main(["solve", "--scheme", "closed_form_n1", "--antennas", "1", "--users", "1,2,3,1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["termination"] == "interior"
    assert cli.main(["oracle", "--antennas", "1", "--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["rate_s"] > 0


def test_cli_sweep_and_compare(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("scheme = fixed_baseline\nsweep_variable = D\nsweep_values = 5, 10\ntrials = 2\n")
    out = tmp_path / "r.csv"
    assert cli.main(["sweep", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert len(read_csv(out.read_text())) == 4
    assert (tmp_path / "r.json").exists()
    assert cli.main(["compare", "--trials", "2", "--values", "20,30", "--schemes", "bcd_sca", "oma"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("sweep_value,trial,rate_s_bcd_sca")
    assert len(lines) == 5
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert cli.main(["sweep", str(bad)]) == 2
