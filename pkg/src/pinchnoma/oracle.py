"""Brute-force references: exhaustive antenna-position grids with the
closed-form power split evaluated at every grid point, and a plain 1-D scan
over the power split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    AntennaLayout,
    EffectiveChannels,
    PowerAllocation,
    SystemConfig,
    UserPair,
    antenna_terms,
    effective_channel,
    noma_rates,
)
from .power import optimal_power_split

DEFAULT_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    pass


class NoFeasiblePoint(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    step: float
    dimensions: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if not self.upper > self.lower:
            raise ValueError("grid upper bound must exceed lower bound")
        if self.dimensions not in (1, 2):
            raise ValueError("exhaustive grids support one or two antennas only")

    @property
    def points(self) -> np.ndarray:
        count = int(math.floor((self.upper - self.lower) / self.step + 1e-9)) + 1
        return self.lower + self.step * np.arange(count)

    def evaluations(self) -> int:
        m = len(self.points)
        return m if self.dimensions == 1 else m * (m - 1) // 2


def default_grid(cfg: SystemConfig, users: UserPair, n: int, step: float | None = None) -> GridSpec:
    """Grid over [x_min, x_max] for one antenna, padded by N*delta for two."""
    step = cfg.wavelength / 50.0 if step is None else step
    if n == 1:
        lo, hi = users.x_min, users.x_max
        if hi - lo < step:
            lo, hi = lo - step, hi + step
    else:
        pad = cfg.min_spacing_delta * n
        lo, hi = users.x_min - pad, users.x_max + pad
    if cfg.inwaveguide_attenuation > 0:
        # antennas cannot sit upstream of the feed point
        lo = max(lo, cfg.feed_point_x0)
        hi = max(hi, lo + 2.0 * n * cfg.min_spacing_delta)
    return GridSpec(lo, hi, step, n)


@dataclass
class Solution:
    layout: AntennaLayout
    alloc: PowerAllocation
    rate_p: float
    rate_s: float
    scheme: str
    evaluations: int = 0
    termination: str = "converged"
    extra: dict = field(default_factory=dict)

    @property
    def sum_rate(self) -> float:
        return self.rate_p + self.rate_s


def _split_rates(cfg: SystemConfig, gain_p, gain_s, n: int):
    """Vectorised closed-form power split. Returns (alpha_s, snr_s, feasible)."""
    P, gamma = cfg.transmit_power, cfg.qos_target_gamma_p
    sig_p, sig_s = P * gain_p, P * gain_s
    with np.errstate(divide="ignore", invalid="ignore"):
        cap_p = (sig_p - n * cfg.noise_power_primary * gamma) / (sig_p * (1 + gamma))
        cap_s = (sig_s - n * cfg.noise_power_secondary * gamma) / (sig_s * (1 + gamma))
    cap = np.minimum(cap_p, cap_s)
    feasible = cap >= -1e-12
    alpha_s = np.clip(cap, 0.0, 1.0)
    snr_s = alpha_s * sig_s / (n * cfg.noise_power_secondary)
    return alpha_s, snr_s, feasible


def _finish(cfg, users, positions, scheme, evaluations, **extra) -> Solution:
    layout = AntennaLayout(tuple(positions))
    ch = effective_channel(cfg, users, layout)
    upd = optimal_power_split(cfg, ch, layout.n)
    rate_p, rate_s = noma_rates(cfg, ch, upd.alloc, layout.n)
    return Solution(layout, upd.alloc, rate_p, rate_s, scheme, evaluations, extra=extra)


def _search_1d(cfg, users, xs):
    tp = antenna_terms(cfg, users, "p", xs)
    ts = antenna_terms(cfg, users, "s", xs)
    _, snr, feasible = _split_rates(cfg, np.abs(tp) ** 2, np.abs(ts) ** 2, 1)
    snr = np.where(feasible, snr, -np.inf)
    k = int(np.argmax(snr))  # first maximum = smallest position
    return k, snr[k]


def _pair_scores(cfg, users, xa, xb, delta):
    """SNR of every (xa[i], xb[j]) pair with xb[j] - xa[i] >= delta, else -inf."""
    tpa, tsa = antenna_terms(cfg, users, "p", xa), antenna_terms(cfg, users, "s", xa)
    tpb, tsb = antenna_terms(cfg, users, "p", xb), antenna_terms(cfg, users, "s", xb)
    gp = np.abs(tpa[:, None] + tpb[None, :]) ** 2
    gs = np.abs(tsa[:, None] + tsb[None, :]) ** 2
    _, snr, feasible = _split_rates(cfg, gp, gs, 2)
    ok = feasible & ((xb[None, :] - xa[:, None]) >= delta - 1e-12)
    return np.where(ok, snr, -np.inf)


def _best_pairs(scores: np.ndarray, k: int):
    flat = scores.ravel()
    k = min(k, int(np.isfinite(flat).sum()))
    if k == 0:
        return []
    idx = np.argpartition(-flat, k - 1)[:k]
    # deterministic order: best score first, ties by lexicographic position
    idx = sorted(idx, key=lambda i: (-flat[i], i))
    return [np.unravel_index(i, scores.shape) for i in idx]


def _search_2d_exact(cfg, users, xs, delta, chunk=2048):
    best = (-np.inf, None)
    for start in range(0, len(xs), chunk):
        xa = xs[start : start + chunk]
        scores = _pair_scores(cfg, users, xa, xs, delta)
        i, j = np.unravel_index(int(np.argmax(scores)), scores.shape)
        if scores[i, j] > best[0]:
            best = (scores[i, j], (xa[i], xs[j]))
    return best


def _clip(xs, grid):
    return xs[(xs >= grid.lower - 1e-12) & (xs <= grid.upper + 1e-12)]


def exhaustive_search(
    cfg: SystemConfig,
    users: UserPair,
    n: int,
    grid: GridSpec | None = None,
    coarse_to_fine: bool = True,
    refine_seeds: int = 8,
) -> Solution:
    """Best grid layout for N in {1, 2} with the optimal power split at each point.

    For two antennas the default is a two-pass scan: a coarse lambda/2 grid,
    then the requested fine step within +-lambda of the ``refine_seeds`` best
    coarse layouts. ``coarse_to_fine=False`` enumerates the full fine grid and
    is subject to the evaluation budget.
    """
    if n not in (1, 2):
        raise ValueError("exhaustive search is limited to one or two antennas")
    grid = default_grid(cfg, users, n) if grid is None else grid
    if grid.dimensions != n:
        raise ValueError("grid dimensions do not match the antenna count")
    xs = grid.points
    if n == 1:
        if len(xs) > grid.budget:
            raise BudgetExceeded(f"{len(xs)} evaluations exceed budget {grid.budget}")
        k, snr = _search_1d(cfg, users, xs)
        if not np.isfinite(snr):
            raise NoFeasiblePoint("no grid point meets the primary QoS target")
        return _finish(cfg, users, [xs[k]], "exhaustive", len(xs))

    delta = cfg.min_spacing_delta
    if not coarse_to_fine:
        if grid.evaluations() > grid.budget:
            raise BudgetExceeded(f"{grid.evaluations()} evaluations exceed budget {grid.budget}")
        snr, pos = _search_2d_exact(cfg, users, xs, delta)
        if pos is None or not np.isfinite(snr):
            raise NoFeasiblePoint("no grid layout meets the primary QoS target")
        return _finish(cfg, users, pos, "exhaustive", grid.evaluations())

    lam = cfg.wavelength
    coarse = GridSpec(grid.lower, grid.upper, lam / 2.0, 2, grid.budget)
    cx = coarse.points
    if coarse.evaluations() > grid.budget:
        raise BudgetExceeded(f"{coarse.evaluations()} coarse evaluations exceed budget {grid.budget}")
    scores = _pair_scores(cfg, users, cx, cx, delta)
    seeds = _best_pairs(scores, refine_seeds)
    if not seeds:
        raise NoFeasiblePoint("no coarse layout meets the primary QoS target")
    evaluations = coarse.evaluations()
    offsets = grid.step * np.arange(-round(lam / grid.step), round(lam / grid.step) + 1)
    best = (-np.inf, None)
    for i, j in seeds:
        xa = _clip(cx[i] + offsets, grid)
        xb = _clip(cx[j] + offsets, grid)
        s = _pair_scores(cfg, users, xa, xb, delta)
        evaluations += s.size
        a, b = np.unravel_index(int(np.argmax(s)), s.shape)
        cand = (s[a, b], (xa[a], xb[b]))
        if cand[0] > best[0] or (cand[0] == best[0] and best[1] is not None and cand[1] < best[1]):
            best = cand
    return _finish(cfg, users, best[1], "exhaustive", evaluations, coarse_seeds=len(seeds))


def power_scan(cfg: SystemConfig, channels: EffectiveChannels, n: int, step: float = 1e-4) -> PowerAllocation:
    """Largest alpha_s on a uniform grid over [0, 1] that passes both QoS checks."""
    if not 0 < step <= 0.01:
        raise ValueError("scan step must lie in (0, 0.01]")
    count = int(round(1.0 / step))
    alpha_s = np.minimum(np.arange(count + 1) * step, 1.0)
    alpha_p = 1.0 - alpha_s
    P, gamma = cfg.transmit_power, cfg.qos_target_gamma_p
    sp, ss = P * channels.gain("p"), P * channels.gain("s")
    sinr_p = alpha_p * sp / (alpha_s * sp + n * cfg.noise_power_primary)
    sinr_sic = alpha_p * ss / (alpha_s * ss + n * cfg.noise_power_secondary)
    ok = (sinr_p >= gamma - 1e-9) & (sinr_sic >= gamma - 1e-9)
    if not ok.any():
        return PowerAllocation.from_secondary(0.0)
    return PowerAllocation.from_secondary(float(alpha_s[np.nonzero(ok)[0][-1]]))
