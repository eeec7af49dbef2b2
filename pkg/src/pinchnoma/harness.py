"""Monte Carlo experiments: random deployments, parameter sweeps, CSV/JSON
output.

Every trial is a pure function of (spec, sweep value, trial index). The user
deployment of trial ``t`` depends only on ``(seed, t)``, so all sweep points
and all schemes see the same deployments (common random numbers), which
keeps trend comparisons paired. Results are sorted before serialization, so
the worker count never changes the output.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .baselines import FIXED_LABEL, fixed_baseline, oma_solve
from .closedform import solve_n1
from .model import AntennaLayout, SystemConfig, UserPair, effective_channel, noma_rates, oma_rate
from .oracle import exhaustive_search
from .power import optimal_power_split
from .sca import GRADIENT_MODES, bcd_solve

SCHEMES = ("bcd_sca", "closed_form_n1", "exhaustive", "oma", "fixed_baseline")
SWEEP_VARIABLES = ("P", "gamma_p", "N", "D", "f_c")
ATTENUATION_MODES = ("off", "eval", "both")

# admissible ranges per sweep variable (inclusive)
SWEEP_RANGES = {
    "P": (-30.0, 60.0),
    "gamma_p": (1e-6, 1e3),
    "N": (1, 64),
    "D": (1e-3, 1e3),
    "f_c": (0.1, 300.0),
}

CSV_COLUMNS = (
    "seed",
    "trial",
    "sweep_value",
    "x_p",
    "y_p",
    "x_s",
    "y_s",
    "scheme",
    "alpha_p",
    "alpha_s",
    "positions",
    "rate_p",
    "rate_s",
    "sum_rate",
    "outer_iters",
    "inner_iters_total",
    "wall_ms",
    "termination",
)

SUMMARY_METRICS = ("rate_p", "rate_s", "sum_rate", "outer_iters", "inner_iters_total")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep of one scheme. Values of the swept variable override the
    matching base parameter; P is in dBm and f_c in GHz.

    ``timing`` fills the wall_ms column; it is off by default because wall
    time is the one field that would make repeated runs differ.
    """

    scheme: str = "bcd_sca"
    sweep_variable: str = "P"
    sweep_values: tuple = (30.0,)
    trials: int = 20
    seed: int = 0
    out: str | None = None
    gradient_mode: str = "paper"
    attenuation: str = "off"
    attenuation_db_per_m: float = 0.08
    antennas: int = 2
    power_dbm: float = 30.0
    gamma_p: float = 0.1
    side_d: float = 5.0
    fc_ghz: float = 28.0
    noise_dbm: float = -70.0
    height_d: float = 3.0
    n_neff: float = 1.4
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.attenuation not in ATTENUATION_MODES:
            raise ValueError(f"attenuation must be one of {ATTENUATION_MODES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        lo, hi = SWEEP_RANGES[self.sweep_variable]
        for v in self.sweep_values:
            if not (lo <= v <= hi) or not math.isfinite(v):
                raise ValueError(f"{self.sweep_variable} value {v} outside [{lo}, {hi}]")
            if self.sweep_variable == "N" and v != int(v):
                raise ValueError("antenna counts must be integers")
        for v in self.antenna_counts():
            if self.scheme == "closed_form_n1" and v != 1:
                raise ValueError("closed_form_n1 needs exactly one antenna")
            if self.scheme == "exhaustive" and v not in (1, 2):
                raise ValueError("exhaustive search supports one or two antennas")
        # the base config must itself be valid
        self.config(self.sweep_values[0])

    def antenna_counts(self) -> list[int]:
        if self.sweep_variable == "N":
            return [int(v) for v in self.sweep_values]
        return [int(self.antennas)]

    def point(self, value: float) -> dict:
        """Base parameters with the swept one replaced by ``value``."""
        p = {
            "P": self.power_dbm,
            "gamma_p": self.gamma_p,
            "N": self.antennas,
            "D": self.side_d,
            "f_c": self.fc_ghz,
        }
        p[self.sweep_variable] = int(value) if self.sweep_variable == "N" else value
        return p

    def config(self, value: float, with_attenuation: bool = False) -> SystemConfig:
        p = self.point(value)
        return SystemConfig.from_units(
            fc_ghz=p["f_c"],
            power_dbm=p["P"],
            noise_dbm=self.noise_dbm,
            gamma_p=p["gamma_p"],
            side_d=p["D"],
            height_d=self.height_d,
            n_neff=self.n_neff,
            attenuation_db_per_m=self.attenuation_db_per_m if with_attenuation else 0.0,
        )

    def replace(self, **changes) -> "ExperimentSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    trial: int
    sweep_value: float
    x_p: float
    y_p: float
    x_s: float
    y_s: float
    scheme: str
    alpha_p: float
    alpha_s: float
    positions: str
    rate_p: float
    rate_s: float
    sum_rate: float
    outer_iters: int
    inner_iters_total: int
    wall_ms: float
    termination: str

    @property
    def users(self) -> UserPair:
        return UserPair(self.x_p, self.y_p, self.x_s, self.y_s)

    @property
    def ok(self) -> bool:
        return not self.termination.startswith("error")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list = field(default_factory=list)

    def summary(self) -> dict:
        return summarize(self.spec, self.records)

    def to_csv(self) -> str:
        return records_to_csv(self.records)

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def column(self, name: str, value: float | None = None) -> np.ndarray:
        rows = [r for r in self.records if value is None or r.sweep_value == value]
        return np.array([getattr(r, name) for r in rows], dtype=float)

    def means(self, name: str = "rate_s") -> dict:
        """Per-sweep-value mean of ``name`` over trials that did not error."""
        out = {}
        for v in self.spec.sweep_values:
            col = np.array([getattr(r, name) for r in self.records if r.sweep_value == v and r.ok], dtype=float)
            out[v] = float(np.mean(col)) if col.size else math.nan
        return out


def deployment_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def sample_deployment(rng: np.random.Generator, D: float) -> UserPair:
    """Primary then secondary, each uniform on [0, D]^2; roles follow draw order."""
    if not D > 0:
        raise ValueError("region side D must be positive")
    x_p, y_p, x_s, y_s = (float(v) for v in rng.uniform(0.0, D, size=4))
    return UserPair(x_p, y_p, x_s, y_s)


def format_positions(layout: AntennaLayout) -> str:
    return ";".join(repr(float(v)) for v in layout.positions)


def parse_positions(text: str) -> AntennaLayout:
    return AntennaLayout(tuple(float(v) for v in text.split(";")))


def _noma_eval(cfg: SystemConfig, users: UserPair, layout: AntennaLayout):
    ch = effective_channel(cfg, users, layout)
    upd = optimal_power_split(cfg, ch, layout.n)
    rate_p, rate_s = noma_rates(cfg, ch, upd.alloc, layout.n)
    return upd, rate_p, rate_s


def _solve(spec: ExperimentSpec, cfg_opt: SystemConfig, cfg_eval: SystemConfig, users: UserPair, n: int) -> dict:
    """Run the scheme on ``cfg_opt`` and evaluate its decision on ``cfg_eval``."""
    outer = inner = 0
    termination = "converged"
    if spec.scheme == "oma":
        sol = oma_solve(cfg_opt, users, n, spec.gradient_mode)
        rate_p = oma_rate(cfg_eval, users, sol.layout_p, "p")
        rate_s = oma_rate(cfg_eval, users, sol.layout_s, "s")
        positions = format_positions(sol.layout_p) + "|" + format_positions(sol.layout_s)
        return dict(alpha_p=1.0, alpha_s=1.0, positions=positions, rate_p=rate_p, rate_s=rate_s,
                    outer_iters=1, inner_iters_total=sol.inner_iters, termination=termination)
    if spec.scheme == "bcd_sca":
        rep = bcd_solve(cfg_opt, users, n, spec.gradient_mode)
        layout, outer, inner, termination = rep.layout, rep.outer_iters, sum(rep.inner_iters), rep.termination
    elif spec.scheme == "closed_form_n1":
        sol = solve_n1(cfg_opt, users)
        if not sol.feasible:
            return dict(alpha_p=1.0, alpha_s=0.0, positions="", rate_p=0.0, rate_s=0.0,
                        outer_iters=0, inner_iters_total=0, termination="infeasible_qos")
        layout, termination = AntennaLayout((sol.x_star,)), sol.case_id
    elif spec.scheme == "exhaustive":
        layout = exhaustive_search(cfg_opt, users, n).layout
    else:
        sol = fixed_baseline(cfg_opt, users, n)
        layout, termination = sol.layout, sol.termination
    upd, rate_p, rate_s = _noma_eval(cfg_eval, users, layout)
    if upd.infeasible_qos:
        termination = "infeasible_qos"
    return dict(alpha_p=upd.alloc.alpha_p, alpha_s=upd.alloc.alpha_s, positions=format_positions(layout),
                rate_p=rate_p, rate_s=rate_s, outer_iters=outer, inner_iters_total=inner,
                termination=termination)


def run_trial(spec: ExperimentSpec, value: float, trial: int) -> TrialRecord:
    point = spec.point(value)
    users = sample_deployment(deployment_rng(spec.seed, trial), point["D"])
    cfg_eval = spec.config(value, with_attenuation=spec.attenuation != "off")
    cfg_opt = spec.config(value, with_attenuation=spec.attenuation == "both")
    start = time.perf_counter()
    try:
        out = _solve(spec, cfg_opt, cfg_eval, users, int(point["N"]))
    except Exception as exc:  # recorded in-row, the sweep carries on
        out = dict(alpha_p=math.nan, alpha_s=math.nan, positions="", rate_p=math.nan, rate_s=math.nan,
                   outer_iters=0, inner_iters_total=0, termination=f"error:{type(exc).__name__}")
    wall = (time.perf_counter() - start) * 1e3 if spec.timing else math.nan
    label = FIXED_LABEL if spec.scheme == "fixed_baseline" else spec.scheme
    return TrialRecord(
        seed=spec.seed,
        trial=trial,
        sweep_value=float(value),
        x_p=users.x_p,
        y_p=users.y_p,
        x_s=users.x_s,
        y_s=users.y_s,
        scheme=label,
        sum_rate=out["rate_p"] + out["rate_s"],
        wall_ms=wall,
        **out,
    )


def _run_task(args):
    return run_trial(*args)


def run_experiment(spec: ExperimentSpec, write: bool = True) -> ExperimentResult:
    """Run every (sweep value, trial) pair. Writes ``spec.out`` (CSV) and the
    JSON summary next to it when ``spec.out`` is set and ``write`` is true.
    """
    tasks = [(spec, v, t) for v in spec.sweep_values for t in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * spec.workers))))
    else:
        records = [_run_task(t) for t in tasks]
    order = {v: i for i, v in enumerate(spec.sweep_values)}
    records.sort(key=lambda r: (order[r.sweep_value], r.trial))
    result = ExperimentResult(spec, records)
    if write and spec.out:
        write_outputs(result, spec.out)
    return result


def summary_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_outputs(result: ExperimentResult, csv_path: str | Path) -> tuple[Path, Path]:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(result.to_csv(), encoding="utf-8", newline="")
    json_path = summary_path(csv_path)
    json_path.write_text(result.to_json(), encoding="utf-8", newline="")
    return csv_path, json_path


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def _stats(values) -> dict:
    arr = np.array(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return {"mean": None, "std": None}
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0}


def summarize(spec: ExperimentSpec, records) -> dict:
    points = []
    for v in spec.sweep_values:
        rows = [r for r in records if r.sweep_value == v]
        ok = [r for r in rows if r.ok]
        point = {
            "sweep_value": v,
            "trials": len(rows),
            "errors": len(rows) - len(ok),
            "infeasible": sum(r.termination == "infeasible_qos" for r in rows),
        }
        for m in SUMMARY_METRICS:
            point[m] = _stats([getattr(r, m) for r in ok])
        points.append(point)
    spec_dict = asdict(spec)
    spec_dict["sweep_values"] = list(spec.sweep_values)
    return {"spec": spec_dict, "points": points}


# --------------------------------------------------------------------------
# paired comparison


@dataclass(frozen=True)
class PairedRow:
    sweep_value: float
    trial: int
    rate_s_a: float
    rate_s_b: float
    sum_rate_a: float
    sum_rate_b: float

    @property
    def diff_sum(self) -> float:
        return self.sum_rate_a - self.sum_rate_b


def compare_schemes(spec: ExperimentSpec, scheme_a: str, scheme_b: str):
    """Run two schemes on identical deployments and pair their rows."""
    ra = run_experiment(spec.replace(scheme=scheme_a, out=None), write=False)
    rb = run_experiment(spec.replace(scheme=scheme_b, out=None), write=False)
    rows = [
        PairedRow(a.sweep_value, a.trial, a.rate_s, b.rate_s, a.sum_rate, b.sum_rate)
        for a, b in zip(ra.records, rb.records)
    ]
    return rows, ra, rb


def paired_csv(rows, scheme_a: str, scheme_b: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sweep_value", "trial", f"rate_s_{scheme_a}", f"rate_s_{scheme_b}",
                f"sum_rate_{scheme_a}", f"sum_rate_{scheme_b}", "sum_rate_diff"])
    for r in rows:
        w.writerow([_cell(r.sweep_value), r.trial, _cell(r.rate_s_a), _cell(r.rate_s_b),
                    _cell(r.sum_rate_a), _cell(r.sum_rate_b), _cell(r.diff_sum)])
    return buf.getvalue()


# --------------------------------------------------------------------------
# config files


def _coerce(name: str, raw: str, kind):
    raw = raw.strip()
    if name == "sweep_values":
        return tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
    if name == "out":
        return raw or None
    if name == "timing":
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"timing must be a boolean, got {raw!r}")
        return raw.lower() in ("true", "1", "yes")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys are the
    :class:`ExperimentSpec` field names and unknown keys are rejected.
    """
    kinds = {f.name: str(f.type) for f in fields(ExperimentSpec)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce(key, raw, kinds[key])
    return out


def load_spec(path: str | Path, **overrides) -> ExperimentSpec:
    values = parse_config(Path(path).read_text(encoding="utf-8"))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**values)
