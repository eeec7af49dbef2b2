"""Comparison schemes: two-slot OMA with per-user antenna placement, and a
static layout above the service-region centroid.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import AntennaLayout, SystemConfig, UserPair, effective_channel, noma_rates, oma_rate
from .oracle import Solution
from .power import optimal_power_split
from .sca import STOP_TOL, newton_init, phase_align, sca_solve

FIXED_LABEL = "fixed-layout (non-SDR)"


@dataclass(frozen=True)
class OmaSolution:
    layout_p: AntennaLayout
    layout_s: AntennaLayout
    rate_p: float
    rate_s: float
    inner_iters: int = 0
    traces: tuple = ()

    @property
    def sum_rate(self) -> float:
        return self.rate_p + self.rate_s


def _single_user_layout(cfg, users, m, n, gradient_mode, tol):
    init = newton_init(cfg, users, n, targets=(m,)).layout
    if n > 1:
        init = phase_align(cfg, users, init, target=m)
    res = sca_solve(cfg, users, init, None, gradient_mode, target=m, qos=False, tol=tol)
    return res


def oma_solve(cfg: SystemConfig, users: UserPair, n: int, gradient_mode: str = "paper", tol: float = STOP_TOL) -> OmaSolution:
    """Each user gets its own slot, full power and its own antenna layout.

    Rates carry the 1/2 time-sharing factor.
    """
    if n < 1:
        raise ValueError("need at least one antenna")
    res = {m: _single_user_layout(cfg, users, m, n, gradient_mode, tol) for m in ("p", "s")}
    rate_p = oma_rate(cfg, users, res["p"].layout, "p")
    rate_s = oma_rate(cfg, users, res["s"].layout, "s")
    return OmaSolution(
        res["p"].layout,
        res["s"].layout,
        rate_p,
        rate_s,
        res["p"].inner_iters + res["s"].inner_iters,
        (tuple(res["p"].objective_trace), tuple(res["s"].objective_trace)),
    )


def fixed_layout(cfg: SystemConfig, n: int) -> AntennaLayout:
    """N antennas at spacing lambda/2 centred above x = D/2."""
    spacing = cfg.wavelength / 2.0
    first = 0.5 * cfg.region_side_D - 0.5 * (n - 1) * spacing
    return AntennaLayout.from_first(first, n, spacing)


def fixed_baseline(cfg: SystemConfig, users: UserPair, n: int) -> Solution:
    if n < 1:
        raise ValueError("need at least one antenna")
    layout = fixed_layout(cfg, n)
    ch = effective_channel(cfg, users, layout)
    upd = optimal_power_split(cfg, ch, n)
    rate_p, rate_s = noma_rates(cfg, ch, upd.alloc, n)
    termination = "infeasible_qos" if upd.infeasible_qos else "converged"
    return Solution(layout, upd.alloc, rate_p, rate_s, FIXED_LABEL, 1, termination,
                    extra={"infeasible_qos": upd.infeasible_qos})
