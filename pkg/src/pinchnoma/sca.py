"""Joint position/power optimisation for N pinching antennas.

Outer loop: block coordinate ascent alternating the closed-form power split
with a position update. Inner loop: successive convex approximation where
every step linearises the channel terms around the current layout and solves
a small LP in the antenna displacements, guarded by a trust region and only
accepted when the exact secondary rate improves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .model import (
    SPACING_SLACK,
    USERS,
    AntennaLayout,
    EffectiveChannels,
    PowerAllocation,
    SystemConfig,
    UserPair,
    antenna_terms,
    effective_channel,
    noma_rates,
    secondary_snr,
)
from .power import optimal_power_split, qos_margins

GRADIENT_MODES = ("paper", "full")
INIT_SCHEMES = ("newton", "midpoint", "primary_first", "fixed")

STOP_TOL = 1e-3
QOS_SLACK = 1e-6
NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 100
NEWTON_RESTARTS = 8
MAX_INNER = 200
MAX_OUTER = 50


class LPInfeasible(RuntimeError):
    pass


class QoSCoefficientError(ValueError):
    """The power split leaves alpha_p - alpha_s*gamma_p <= 0."""


# --------------------------------------------------------------------------
# initialisation


@dataclass(frozen=True)
class InitResult:
    layout: AntennaLayout
    x1: float
    iterations: int
    grad: float
    curvature: float
    fallback: bool = False
    restarts: int = 0


def init_objective(users: UserPair, d: float, n: int, spacing: float, x1, targets=USERS):
    """Path-loss surrogate g(x1) and its first two derivatives.

    The layout is x1, x1 + spacing, ..., so g only depends on the first
    antenna. ``targets`` selects which users contribute.
    """
    x1 = np.asarray(x1, dtype=float)
    offsets = spacing * np.arange(n)
    g = np.zeros_like(x1)
    g1 = np.zeros_like(x1)
    g2 = np.zeros_like(x1)
    for m in targets:
        u = x1[..., None] + offsets - users.x(m)
        q = u**2 + users.c_const(m, d)
        g = g + np.sum(q**-0.5, axis=-1)
        g1 = g1 - np.sum(u * q**-1.5, axis=-1)
        g2 = g2 + np.sum(3.0 * u**2 * q**-2.5 - q**-1.5, axis=-1)
    return g, g1, g2


def _newton(users, d, n, spacing, start, targets):
    x = float(start)
    for it in range(1, NEWTON_MAX_ITER + 1):
        _, g1, g2 = (float(v) for v in init_objective(users, d, n, spacing, x, targets))
        if abs(g1) < NEWTON_TOL:
            return x, it - 1, g1, g2
        if g2 == 0.0 or not math.isfinite(g2):
            return x, it, g1, g2
        x = x - g1 / g2
        if not math.isfinite(x):
            return x, it, math.nan, math.nan
    _, g1, g2 = (float(v) for v in init_objective(users, d, n, spacing, x, targets))
    return x, NEWTON_MAX_ITER, g1, g2


def newton_init(cfg: SystemConfig, users: UserPair, n: int, targets=USERS) -> InitResult:
    """Equally spaced layout whose first antenna maximises the path-loss surrogate."""
    if n < 1:
        raise ValueError("need at least one antenna")
    d, spacing = cfg.waveguide_height_d, cfg.min_spacing_delta
    xs = [users.x(m) for m in targets]
    lo, hi = min(xs), max(xs)
    midpoint = 0.5 * (lo + hi) - 0.5 * (n - 1) * spacing
    starts = [midpoint] + list(np.linspace(lo - cfg.region_side_D, hi, NEWTON_RESTARTS))
    for k, start in enumerate(starts):
        x, iters, g1, g2 = _newton(users, d, n, spacing, start, targets)
        if math.isfinite(x) and abs(g1) < NEWTON_TOL and g2 < 0:
            return InitResult(AntennaLayout.from_first(x, n, spacing), x, iters, g1, g2, False, k)
    _, g1, g2 = (float(v) for v in init_objective(users, d, n, spacing, midpoint, targets))
    return InitResult(
        AntennaLayout.from_first(midpoint, n, spacing), midpoint, 0, g1, g2, True, len(starts) - 1
    )


def initial_layout(cfg: SystemConfig, users: UserPair, n: int, scheme: str = "newton") -> InitResult:
    spacing = cfg.min_spacing_delta
    if scheme == "newton":
        return newton_init(cfg, users, n)
    if scheme == "midpoint":
        x1 = 0.5 * (users.x_p + users.x_s)
    elif scheme == "primary_first":
        x1 = users.x_p
    elif scheme == "fixed":
        x1 = 0.5 * cfg.region_side_D - 0.5 * (n - 1) * spacing
    else:
        raise ValueError(f"unknown init scheme {scheme!r}")
    return InitResult(AntennaLayout.from_first(x1, n, spacing), x1, 0, math.nan, math.nan)


def phase_align(
    cfg: SystemConfig,
    users: UserPair,
    layout: AntennaLayout,
    window: float | None = None,
    target: str | None = None,
) -> AntennaLayout:
    """Greedily re-seat antennas 2..N so their phases add up constructively.

    Each antenna is moved right of its predecessor by at least the minimum
    spacing, scanning one phase period (``window``, default
    lambda / (n_neff - 1) capped at 3 lambda) on a lambda/50 grid. The score
    of a partial layout is its secondary rate under the optimal power split,
    with infeasible layouts ranked by their QoS cap instead. Passing
    ``target`` scores by that user's channel gain alone (single-user mode).
    """
    lam = cfg.wavelength
    if window is None:
        excess = cfg.effective_refractive_index - 1.0
        window = 3.0 * lam if excess <= 1.0 / 3.0 else lam / excess
    offsets = cfg.min_spacing_delta + (lam / 50.0) * np.arange(int(round(window / (lam / 50.0))) + 1)
    x = list(layout.positions[:1])
    acc = {m: complex(antenna_terms(cfg, users, m, np.array(x))[0]) for m in USERS}
    original = layout.x
    for k in range(1, layout.n):
        # keep the original position whenever it is already admissible
        base = x[-1]
        cands = base + offsets
        if original[k] - base >= cfg.min_spacing_delta - SPACING_SLACK:
            cands = np.concatenate(([original[k]], cands))
        tp = acc["p"] + antenna_terms(cfg, users, "p", cands)
        ts = acc["s"] + antenna_terms(cfg, users, "s", cands)
        if target is None:
            score = _split_score(cfg, np.abs(tp) ** 2, np.abs(ts) ** 2, k + 1)
        else:
            score = np.abs(tp if target == "p" else ts) ** 2
        j = int(np.argmax(score))
        x.append(float(cands[j]))
        acc["p"], acc["s"] = complex(tp[j]), complex(ts[j])
    return AntennaLayout(tuple(x))


def _split_score(cfg: SystemConfig, gain_p, gain_s, n: int):
    P, gamma = cfg.transmit_power, cfg.qos_target_gamma_p
    cap = np.minimum(
        (P * gain_p - n * cfg.noise_power_primary * gamma) / (P * gain_p * (1 + gamma)),
        (P * gain_s - n * cfg.noise_power_secondary * gamma) / (P * gain_s * (1 + gamma)),
    )
    snr = np.maximum(cap, 0.0) * P * gain_s / (n * cfg.noise_power_secondary)
    # feasible layouts first (score >= 0), infeasible ones ordered by how close they get
    return np.where(cap >= 0, snr, cap - 1.0)


# --------------------------------------------------------------------------
# linearisation


def term_partials(cfg: SystemConfig, users: UserPair, m: str, x: np.ndarray, mode: str = "paper"):
    """Channel terms t and their partials w.r.t. distance and waveguide position.

    Returns ``(d, t, dt_dd, dt_dx)``. The total slope along the waveguide is
    ``dt_dd * d' + dt_dx`` with ``d' = (x - x_m) / d``. In ``paper`` mode the
    amplitude is frozen and only the in-waveguide phase moves, so ``dt_dd``
    is zero.
    """
    if mode not in GRADIENT_MODES:
        raise ValueError(f"gradient mode must be one of {GRADIENT_MODES}")
    x = np.asarray(x, dtype=float)
    dist = np.sqrt((x - users.x(m)) ** 2 + users.c_const(m, cfg.waveguide_height_d))
    t = antenna_terms(cfg, users, m, x)
    k_guide = 2.0 * math.pi / cfg.guided_wavelength
    if mode == "paper":
        return dist, t, np.zeros_like(t), -1j * k_guide * t
    k_free = 2.0 * math.pi / cfg.wavelength
    att_rate = math.log(10.0) * cfg.inwaveguide_attenuation / 20.0
    dt_dd = (-1.0 / dist - 1j * k_free) * t
    dt_dx = (-att_rate - 1j * k_guide) * t
    return dist, t, dt_dd, dt_dx


def term_slopes(cfg: SystemConfig, users: UserPair, m: str, x: np.ndarray, mode: str = "paper"):
    """Total derivative of each channel term along the waveguide."""
    dist, t, dt_dd, dt_dx = term_partials(cfg, users, m, x, mode)
    return dt_dd * (np.asarray(x) - users.x(m)) / dist + dt_dx


@dataclass(frozen=True)
class ScaIterate:
    positions: np.ndarray
    d: dict
    t: dict
    g: dict
    trust_radius: float

    @classmethod
    def at(cls, cfg: SystemConfig, users: UserPair, positions, trust_radius: float) -> "ScaIterate":
        x = np.asarray(positions, dtype=float)
        d, t, g = {}, {}, {}
        for m in USERS:
            d[m] = np.sqrt((x - users.x(m)) ** 2 + users.c_const(m, cfg.waveguide_height_d))
            t[m] = antenna_terms(cfg, users, m, x)
            g[m] = complex(np.sum(t[m]))
        return cls(x, d, t, g, trust_radius)

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass
class LinearProgram:
    """``maximize objective @ v`` subject to the rows below.

    Variables are scaled: displacements in wavelengths and gains normalised
    by the current target gain. ``x_ref``, ``pos_scale`` and ``z_scale``
    undo the scaling (see :func:`solve_lp`).
    """

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    bounds: list
    x_ref: np.ndarray
    pos_scale: float
    z_scale: float
    z_ref: float
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    n_pos: int = 0
    z_index: int = 0
    degenerate: bool = False

    @property
    def n_vars(self) -> int:
        return len(self.objective)


def qos_coefficient(cfg: SystemConfig, alloc: PowerAllocation) -> float:
    P = cfg.transmit_power
    return alloc.alpha_p * P - alloc.alpha_s * P * cfg.qos_target_gamma_p


def _position_bounds(cfg: SystemConfig, users: UserPair, x: np.ndarray, radius: float, scale: float):
    lo_guard = users.x_min - cfg.region_side_D
    hi_guard = users.x_max + cfg.region_side_D
    if cfg.inwaveguide_attenuation > 0:
        lo_guard = max(lo_guard, cfg.feed_point_x0)
    out = []
    for xn in x:
        lo = max(-radius, lo_guard - xn)
        hi = min(radius, hi_guard - xn)
        out.append((min(lo, 0.0) / scale, max(hi, 0.0) / scale))
    return out


def _spacing_rows(x: np.ndarray, delta: float, scale: float, n_vars: int):
    n = len(x)
    rows, rhs = [], []
    for k in range(1, n):
        row = np.zeros(n_vars)
        row[k - 1] = 1.0
        row[k] = -1.0
        rows.append(row)
        rhs.append((x[k] - x[k - 1] - delta + SPACING_SLACK) / scale)
    return rows, rhs


def _problem_constants(cfg: SystemConfig, it: ScaIterate, alloc: PowerAllocation, target: str, qos: bool):
    n = it.n
    gain_ref = abs(it.g[target]) ** 2
    degenerate = gain_ref == 0.0
    if degenerate:
        gain_ref = cfg.eta / float(np.min(it.d[target])) ** 2
    if target == "s" and qos:
        z_per_gain = alloc.alpha_s * cfg.transmit_power / (n * cfg.noise_power_secondary)
    else:
        z_per_gain = cfg.transmit_power / (n * cfg.noise(target))
    q = {}
    if qos:
        coef = qos_coefficient(cfg, alloc)
        if not coef > 0:
            raise QoSCoefficientError(
                f"alpha_p*P - alpha_s*P*gamma_p = {coef:.3e}; the linearised QoS cuts need it positive"
            )
        for m in USERS:
            q[m] = n * cfg.noise(m) * cfg.qos_target_gamma_p / coef
    return gain_ref, degenerate, z_per_gain, q


def _scale_rows(rows, rhs):
    a = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    norm = np.max(np.abs(a), axis=1)
    norm[norm == 0] = 1.0
    return a / norm[:, None], b / norm


def linearize(
    cfg: SystemConfig,
    users: UserPair,
    iterate: ScaIterate,
    alloc: PowerAllocation,
    mode: str = "paper",
    target: str = "s",
    qos: bool = True,
) -> LinearProgram:
    """LP in (displacements, z) approximating the position subproblem at ``iterate``.

    Distances, channel terms and effective channels are affine in the
    displacements after linearisation and are substituted out. With
    ``qos=False`` the QoS cuts are dropped (single-user rate maximisation).
    """
    n = iterate.n
    x = iterate.positions
    lam = cfg.wavelength
    gain_ref, degenerate, z_per_gain, q = _problem_constants(cfg, iterate, alloc, target, qos)
    root = math.sqrt(gain_ref)
    nv = n + 1
    rows, rhs = [], []

    def gain_row(m):
        # d|g_m|^2 / du_n to first order, in units of gain_ref per wavelength
        slope = term_slopes(cfg, users, m, x, mode) * lam / root
        gk = iterate.g[m] / root
        return 2.0 * np.real(np.conj(gk) * slope), abs(gk) ** 2

    # objective cut: w <= |g^k|^2 + grad . u  (normalised)
    row = np.zeros(nv)
    if degenerate:
        row[n] = 1.0
        rows.append(row)
        rhs.append(0.0)
    else:
        coeffs, base = gain_row(target)
        row[:n] = -coeffs
        row[n] = 1.0
        rows.append(row)
        rhs.append(base)
    if qos:
        for m in USERS:
            coeffs, base = gain_row(m)
            row = np.zeros(nv)
            row[:n] = -coeffs
            rows.append(row)
            rhs.append(base - q[m] / gain_ref)
    sr, sb = _spacing_rows(x, cfg.min_spacing_delta, lam, nv)
    rows += sr
    rhs += sb
    a_ub, b_ub = _scale_rows(rows, rhs)
    bounds = _position_bounds(cfg, users, x, iterate.trust_radius, lam) + [(None, None)]
    objective = np.zeros(nv)
    objective[n] = 1.0
    return LinearProgram(
        objective=objective,
        a_ub=a_ub,
        b_ub=b_ub,
        bounds=bounds,
        x_ref=x.copy(),
        pos_scale=lam,
        z_scale=gain_ref * z_per_gain,
        z_ref=abs(iterate.g[target]) ** 2 * z_per_gain,
        n_pos=n,
        z_index=n,
        degenerate=degenerate,
    )


def linearize_expanded(
    cfg: SystemConfig,
    users: UserPair,
    iterate: ScaIterate,
    alloc: PowerAllocation,
    mode: str = "paper",
    target: str = "s",
    qos: bool = True,
) -> LinearProgram:
    """Same subproblem with every auxiliary variable kept explicit.

    Variables: displacements u (n), w, distance deviations (2n), real and
    imaginary term deviations (2n each), effective-channel deviations (2 each),
    tied together by equality rows. Used to audit :func:`linearize`.
    """
    n = iterate.n
    x = iterate.positions
    lam = cfg.wavelength
    gain_ref, degenerate, z_per_gain, q = _problem_constants(cfg, iterate, alloc, target, qos)
    root = math.sqrt(gain_ref)
    iu = np.arange(n)
    iw = n
    base = n + 1
    idx_d = {m: base + k * n + iu for k, m in enumerate(USERS)}
    base += 2 * n
    idx_tr = {m: base + k * n + iu for k, m in enumerate(USERS)}
    base += 2 * n
    idx_ti = {m: base + k * n + iu for k, m in enumerate(USERS)}
    base += 2 * n
    idx_hr = {m: base + k for k, m in enumerate(USERS)}
    base += 2
    idx_hi = {m: base + k for k, m in enumerate(USERS)}
    nv = base + 2

    eq_rows, eq_rhs = [], []
    for m in USERS:
        dist, _, dt_dd, dt_dx = term_partials(cfg, users, m, x, mode)
        d_slope = (x - users.x(m)) / dist
        for k in range(n):
            row = np.zeros(nv)
            row[idx_d[m][k]] = 1.0
            row[iu[k]] = -d_slope[k]
            eq_rows.append(row)
            eq_rhs.append(0.0)
            for idx, part in ((idx_tr, np.real), (idx_ti, np.imag)):
                row = np.zeros(nv)
                row[idx[m][k]] = 1.0
                row[idx_d[m][k]] = -part(dt_dd[k]) * lam / root
                row[iu[k]] = -part(dt_dx[k]) * lam / root
                eq_rows.append(row)
                eq_rhs.append(0.0)
        for idx_h, idx_t in ((idx_hr, idx_tr), (idx_hi, idx_ti)):
            row = np.zeros(nv)
            row[idx_h[m]] = 1.0
            row[idx_t[m]] = -1.0
            eq_rows.append(row)
            eq_rhs.append(0.0)

    def gain_row(m):
        gk = iterate.g[m] / root
        row = np.zeros(nv)
        row[idx_hr[m]] = -2.0 * gk.real
        row[idx_hi[m]] = -2.0 * gk.imag
        return row, abs(gk) ** 2

    rows, rhs = [], []
    if degenerate:
        row = np.zeros(nv)
        row[iw] = 1.0
        rows.append(row)
        rhs.append(0.0)
    else:
        row, b = gain_row(target)
        row[iw] = 1.0
        rows.append(row)
        rhs.append(b)
    if qos:
        for m in USERS:
            row, b = gain_row(m)
            rows.append(row)
            rhs.append(b - q[m] / gain_ref)
    sr, sb = _spacing_rows(x, cfg.min_spacing_delta, lam, nv)
    rows += sr
    rhs += sb
    a_ub, b_ub = _scale_rows(rows, rhs)
    bounds = _position_bounds(cfg, users, x, iterate.trust_radius, lam) + [(None, None)] * (nv - n)
    objective = np.zeros(nv)
    objective[iw] = 1.0
    return LinearProgram(
        objective=objective,
        a_ub=a_ub,
        b_ub=b_ub,
        bounds=bounds,
        x_ref=x.copy(),
        pos_scale=lam,
        z_scale=gain_ref * z_per_gain,
        z_ref=abs(iterate.g[target]) ** 2 * z_per_gain,
        a_eq=np.array(eq_rows),
        b_eq=np.array(eq_rhs),
        n_pos=n,
        z_index=iw,
        degenerate=degenerate,
    )


def solve_lp(lp: LinearProgram) -> tuple[np.ndarray, float]:
    """Optimal positions and objective value z of a subproblem LP.

    Raises :class:`LPInfeasible` when the cuts exclude every point.
    """
    res = linprog(
        -lp.objective,
        A_ub=lp.a_ub,
        b_ub=lp.b_ub,
        A_eq=lp.a_eq,
        b_eq=lp.b_eq,
        bounds=lp.bounds,
        method="highs",
    )
    if res.status == 2:
        raise LPInfeasible(res.message)
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    v = res.x
    positions = lp.x_ref + v[: lp.n_pos] * lp.pos_scale
    z = float(v[lp.z_index]) * lp.z_scale
    return positions, z


# --------------------------------------------------------------------------
# inner loop


@dataclass
class ScaResult:
    layout: AntennaLayout
    inner_iters: int
    accepted: int
    objective_trace: list
    termination: str


def _objective_rate(cfg, users, x, alloc, target, qos):
    layout = AntennaLayout(tuple(x))
    ch = effective_channel(cfg, users, layout)
    n = layout.n
    if qos:
        return math.log2(1.0 + secondary_snr(cfg, ch.h_s, alloc, n)), ch
    snr = ch.gain(target) * cfg.transmit_power / (n * cfg.noise(target))
    return 0.5 * math.log2(1.0 + snr), ch


def _valid_layout(x: np.ndarray, delta: float) -> bool:
    return bool(np.all(np.diff(x) >= delta - SPACING_SLACK)) and bool(np.all(np.isfinite(x)))


def sca_solve(
    cfg: SystemConfig,
    users: UserPair,
    init: AntennaLayout,
    alloc: PowerAllocation | None,
    gradient_mode: str = "paper",
    target: str = "s",
    qos: bool = True,
    tol: float = STOP_TOL,
    max_iter: int = MAX_INNER,
) -> ScaResult:
    """Safeguarded SCA over antenna positions with the power split held fixed.

    The objective tracked is the exact rate of ``target`` (secondary NOMA
    rate with ``qos=True``, single-user OMA rate otherwise). A candidate from
    the LP is accepted only if the exact rate improves and, with ``qos``, the
    exact QoS margins stay above ``-1e-6``; otherwise the trust radius is
    halved.
    """
    lam = cfg.wavelength
    radius = lam / 4.0
    radius_max, radius_min = lam, lam / 1e4
    x = init.x.copy()
    if qos and alloc is None:
        raise ValueError("NOMA position update needs a power allocation")
    current, _ = _objective_rate(cfg, users, x, alloc, target, qos)
    trace = [current]
    accepted = 0
    termination = "max_iter"
    iters = 0
    while iters < max_iter:
        iters += 1
        it = ScaIterate.at(cfg, users, x, radius)
        lp = linearize(cfg, users, it, alloc, gradient_mode, target, qos)
        try:
            cand, z_pred = solve_lp(lp)
        except LPInfeasible:
            cand = None
        if cand is not None:
            if lp.degenerate:
                termination = "converged"
                break
            # predicted gain below tolerance: nothing left to exploit
            pred_gain = _predicted_rate(z_pred, target, qos) - _predicted_rate(lp.z_ref, target, qos)
            if radius >= lam / 4.0 and pred_gain < tol / 10.0:
                termination = "converged"
                break
        ok = False
        if cand is not None and _valid_layout(cand, cfg.min_spacing_delta) and not np.allclose(cand, x, rtol=0, atol=0):
            value, ch = _objective_rate(cfg, users, cand, alloc, target, qos)
            ok = value > current
            if ok and qos:
                ok = min(qos_margins(cfg, ch, alloc, len(cand))) >= -QOS_SLACK
        if ok:
            change = value - current
            x, current = cand, value
            trace.append(current)
            accepted += 1
            radius = min(2.0 * radius, radius_max)
            if change < tol:
                termination = "converged"
                break
        else:
            radius *= 0.5
            if radius < radius_min:
                termination = "trust_region_collapse"
                break
    return ScaResult(AntennaLayout(tuple(x)), iters, accepted, trace, termination)


def _predicted_rate(z: float, target: str, qos: bool) -> float:
    z = max(z, 0.0)
    return math.log2(1.0 + z) if qos else 0.5 * math.log2(1.0 + z)


# --------------------------------------------------------------------------
# outer loop


@dataclass
class SolveReport:
    layout: AntennaLayout
    alloc: PowerAllocation
    channels: EffectiveChannels
    rate_p: float
    rate_s: float
    rate_trace: list
    inner_iters: list
    inner_traces: list
    termination: str
    init: InitResult
    qos_ok: bool

    @property
    def outer_iters(self) -> int:
        return len(self.inner_iters)

    @property
    def sum_rate(self) -> float:
        return self.rate_p + self.rate_s


def _qos_ok(cfg, ch, alloc, n):
    return min(qos_margins(cfg, ch, alloc, n)) >= -QOS_SLACK


def bcd_solve(
    cfg: SystemConfig,
    users: UserPair,
    n: int,
    gradient_mode: str = "paper",
    init_scheme: str = "newton",
    tol: float = STOP_TOL,
    max_outer: int = MAX_OUTER,
    max_inner: int = MAX_INNER,
    align_phases: bool = True,
) -> SolveReport:
    """Alternate SCA position updates with the closed-form power split.

    With ``align_phases`` the initial layout is passed through
    :func:`phase_align` first; the path-loss-only initialisation can otherwise
    start from near-cancelling antenna phases.
    """
    init = initial_layout(cfg, users, n, init_scheme)
    layout = phase_align(cfg, users, init.layout) if align_phases else init.layout
    ch = effective_channel(cfg, users, layout)
    upd = optimal_power_split(cfg, ch, n)
    alloc = upd.alloc
    rate_p, rate_s = noma_rates(cfg, ch, alloc, n)
    trace, inner, inner_traces = [rate_s], [], []
    if upd.infeasible_qos or not upd.feasible_with_positive_secondary:
        reason = "infeasible_qos" if upd.infeasible_qos else "converged"
        return SolveReport(layout, alloc, ch, rate_p, rate_s, trace, inner, inner_traces, reason, init,
                           _qos_ok(cfg, ch, alloc, n))
    termination = "max_iter"
    for _ in range(max_outer):
        res = sca_solve(cfg, users, layout, alloc, gradient_mode, "s", True, tol, max_inner)
        inner.append(res.inner_iters)
        inner_traces.append(res.objective_trace)
        new_ch = effective_channel(cfg, users, res.layout)
        new_upd = optimal_power_split(cfg, new_ch, n)
        new_rate_p, new_rate_s = noma_rates(cfg, new_ch, new_upd.alloc, n)
        if new_upd.infeasible_qos or new_rate_s < rate_s:
            # safeguard: keep the previous block solution
            trace.append(rate_s)
            termination = "converged"
            break
        change = new_rate_s - rate_s
        layout, ch, alloc = res.layout, new_ch, new_upd.alloc
        rate_p, rate_s = new_rate_p, new_rate_s
        trace.append(rate_s)
        if change < tol:
            termination = "converged"
            break
    return SolveReport(layout, alloc, ch, rate_p, rate_s, trace, inner, inner_traces, termination, init,
                       _qos_ok(cfg, ch, alloc, n))
