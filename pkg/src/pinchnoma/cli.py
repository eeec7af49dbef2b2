"""Command line entry point: ``pinchnoma {solve,sweep,oracle,compare}``."""
from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ATTENUATION_MODES,
    SCHEMES,
    ExperimentSpec,
    compare_schemes,
    deployment_rng,
    load_spec,
    paired_csv,
    run_experiment,
    run_trial,
    sample_deployment,
)
from .model import UserPair
from .oracle import exhaustive_search
from .sca import GRADIENT_MODES

# CLI flag -> ExperimentSpec field
_FLAG_FIELDS = {
    "seed": "seed",
    "trials": "trials",
    "out": "out",
    "gradient_mode": "gradient_mode",
    "attenuation": "attenuation",
    "fc_ghz": "fc_ghz",
    "power_dbm": "power_dbm",
    "gamma_p": "gamma_p",
    "side_d": "side_d",
    "antennas": "antennas",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--gradient-mode", choices=GRADIENT_MODES)
    p.add_argument("--attenuation", choices=ATTENUATION_MODES)
    p.add_argument("--fc-ghz", type=float)
    p.add_argument("--power-dbm", type=float)
    p.add_argument("--gamma-p", type=float)
    p.add_argument("--side-d", type=float)
    p.add_argument("--antennas", type=int)


def _overrides(args) -> dict:
    return {f: getattr(args, flag) for flag, f in _FLAG_FIELDS.items() if getattr(args, flag, None) is not None}


def _users(args, spec: ExperimentSpec) -> UserPair:
    if args.users:
        vals = [float(v) for v in args.users.split(",")]
        if len(vals) != 4:
            raise SystemExit("--users expects x_p,y_p,x_s,y_s")
        return UserPair(*vals)
    return sample_deployment(deployment_rng(spec.seed, args.trial), spec.side_d)


def _instance_spec(args, scheme: str) -> ExperimentSpec:
    ov = _overrides(args)
    ov.pop("trials", None)
    ov.pop("out", None)
    return ExperimentSpec(scheme=scheme, sweep_variable="P", sweep_values=(ov.get("power_dbm", 30.0),), **ov)


def cmd_solve(args) -> int:
    spec = _instance_spec(args, args.scheme)
    if args.users:
        users = _users(args, spec)
        # route a fixed deployment through the same evaluation path
        from .harness import _solve  # noqa: PLC0415

        value = spec.sweep_values[0]
        cfg_eval = spec.config(value, spec.attenuation != "off")
        cfg_opt = spec.config(value, spec.attenuation == "both")
        out = _solve(spec, cfg_opt, cfg_eval, users, spec.antennas)
        out = {"x_p": users.x_p, "y_p": users.y_p, "x_s": users.x_s, "y_s": users.y_s, **out}
        out["sum_rate"] = out["rate_p"] + out["rate_s"]
    else:
        rec = run_trial(spec, spec.sweep_values[0], args.trial)
        out = {k: getattr(rec, k) for k in rec.__dataclass_fields__ if k != "wall_ms"}
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_oracle(args) -> int:
    spec = _instance_spec(args, "exhaustive")
    users = _users(args, spec)
    cfg = spec.config(spec.sweep_values[0], spec.attenuation != "off")
    sol = exhaustive_search(cfg, users, spec.antennas)
    out = {
        "positions": list(sol.layout.positions),
        "alpha_p": sol.alloc.alpha_p,
        "alpha_s": sol.alloc.alpha_s,
        "rate_p": sol.rate_p,
        "rate_s": sol.rate_s,
        "sum_rate": sol.sum_rate,
        "evaluations": sol.evaluations,
        "users": [users.x_p, users.y_p, users.x_s, users.y_s],
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_sweep(args) -> int:
    ov = _overrides(args)
    if args.workers is not None:
        ov["workers"] = args.workers
    spec = load_spec(args.config, **ov)
    result = run_experiment(spec)
    if not spec.out:
        sys.stdout.write(result.to_csv())
    else:
        print(f"wrote {spec.out}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    ov = _overrides(args)
    out = ov.pop("out", None)
    values = tuple(float(v) for v in args.values.split(",")) if args.values else (ov.get("power_dbm", 30.0),)
    spec = ExperimentSpec(scheme=args.schemes[0], sweep_variable=args.sweep, sweep_values=values, **ov)
    rows, _, _ = compare_schemes(spec, *args.schemes)
    text = paired_csv(rows, *args.schemes)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchnoma", description="Pinching-antenna CR-NOMA optimisation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance, JSON to stdout")
    _common(p)
    p.add_argument("--scheme", choices=SCHEMES, default="bcd_sca")
    p.add_argument("--trial", type=int, default=0, help="deployment index under --seed")
    p.add_argument("--users", help="explicit deployment x_p,y_p,x_s,y_s")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run an experiment config, CSV + JSON out")
    p.add_argument("config")
    _common(p)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive grid search on one instance")
    _common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--users")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="two schemes on the same deployments, paired table")
    _common(p)
    p.add_argument("--schemes", nargs=2, choices=SCHEMES, default=("bcd_sca", "oma"))
    p.add_argument("--sweep", choices=("P", "gamma_p", "N", "D", "f_c"), default="P")
    p.add_argument("--values", help="comma separated sweep values")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
