"""Single pinching antenna (N = 1): exact global optimum in closed form.

With one antenna the phase terms drop out and |h_m|^2 = eta / d_m(x)^2. For
a fixed position the best split is alpha_s = (P*eta - gamma*M(x)) /
(P*eta*(1 + gamma)) where M(x) = max_m sigma_m^2 d_m(x)^2, so the secondary
SNR becomes

    SNR(x) = (P*eta - gamma*M(x)) / ((1 + gamma) * sigma_s^2 * d_s(x)^2).

The optimum lies in [x_min, x_max]; on that interval SNR is piecewise smooth
and its maximiser is one of: x_s, the crossing points where both QoS
constraints are tight, or a root of a cubic (stationary point of the piece
where only the primary constraint binds). :func:`solve_n1` evaluates that
finite candidate set.

:func:`paper_closed_form_n1` keeps the literal three-case formula with
alpha_p fixed at its lower bound, for comparison only; it is not optimal in
general and its two position expressions need not agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .model import SystemConfig, UserPair

BOUNDARY_RTOL = 1e-9

CASES = ("boundary_primary", "boundary_secondary", "interior", "endpoint", "infeasible")


@dataclass(frozen=True)
class SingleAntennaSolution:
    x_star: float
    alpha_p_star: float
    alpha_s_star: float
    case_id: str
    beta_p: float
    beta_s: float
    secondary_rate: float
    primary_rate: float = 0.0
    method: str = "exact"
    position_spread: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.case_id != "infeasible"


def _coeffs(cfg: SystemConfig, users: UserPair):
    d = cfg.waveguide_height_d
    return (
        cfg.transmit_power * cfg.eta,
        cfg.qos_target_gamma_p,
        {m: cfg.noise(m) for m in ("p", "s")},
        {m: users.c_const(m, d) for m in ("p", "s")},
    )


def noise_weighted_sq_distance(cfg: SystemConfig, users: UserPair, m: str, x):
    """sigma_m^2 * d_m(x)^2, the quantity each QoS constraint bounds."""
    _, _, sig, C = _coeffs(cfg, users)
    x = np.asarray(x, dtype=float)
    return sig[m] * ((x - users.x(m)) ** 2 + C[m])


def snr_at(cfg: SystemConfig, users: UserPair, x):
    """Secondary SNR and alpha_s under the optimal split, vectorised over x.

    Infeasible positions get alpha_s = nan and SNR = -inf.
    """
    pe, gamma, sig, _ = _coeffs(cfg, users)
    a_p = noise_weighted_sq_distance(cfg, users, "p", x)
    a_s = noise_weighted_sq_distance(cfg, users, "s", x)
    alpha_s = (pe - gamma * np.maximum(a_p, a_s)) / (pe * (1.0 + gamma))
    feasible = alpha_s >= -1e-15
    snr = np.where(feasible, np.maximum(alpha_s, 0.0) * pe / a_s, -np.inf)
    return snr, np.where(feasible, np.maximum(alpha_s, 0.0), np.nan)


def lemma2_condition(cfg: SystemConfig, users: UserPair) -> bool:
    """P*eta >= gamma * max(C_p sigma_p^2, C_s sigma_s^2).

    Necessary for feasibility; sufficient only when one position can serve
    both users, see :func:`feasible_n1`.
    """
    pe, gamma, sig, C = _coeffs(cfg, users)
    return pe >= gamma * max(C["p"] * sig["p"], C["s"] * sig["s"]) * (1.0 - BOUNDARY_RTOL)


def _crossings(cfg: SystemConfig, users: UserPair) -> list[float]:
    _, _, sig, C = _coeffs(cfg, users)
    xp, xs = users.x_p, users.x_s
    ap = sig["p"] * Polynomial([xp * xp + C["p"], -2 * xp, 1.0])
    as_ = sig["s"] * Polynomial([xs * xs + C["s"], -2 * xs, 1.0])
    return _real_roots(ap - as_)


def _real_roots(poly: Polynomial) -> list[float]:
    poly = poly.trim(tol=0.0)
    coef = poly.coef
    if len(coef) <= 1:
        return []
    # drop leading coefficients that are rounding noise relative to the rest
    scale = np.max(np.abs(coef))
    while len(coef) > 1 and abs(coef[-1]) <= 1e-14 * scale:
        coef = coef[:-1]
    if len(coef) <= 1:
        return []
    roots = Polynomial(coef).roots()
    return [float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real))]


def _primary_stationary(cfg: SystemConfig, users: UserPair) -> list[float]:
    """Roots of d/dx [(P eta - gamma a_p) / a_s] = 0 (a cubic in x)."""
    pe, gamma, sig, C = _coeffs(cfg, users)
    up = Polynomial([-users.x_p, 1.0])
    us = Polynomial([-users.x_s, 1.0])
    cubic = gamma * sig["p"] * up * (us**2 + C["s"]) + (pe - gamma * sig["p"] * (up**2 + C["p"])) * us
    return _real_roots(cubic)


def feasible_n1(cfg: SystemConfig, users: UserPair) -> bool:
    """Whether some antenna position meets the primary's target at both users."""
    pe, gamma, _, _ = _coeffs(cfg, users)
    cands = [users.x_p, users.x_s] + [
        x for x in _crossings(cfg, users) if users.x_min <= x <= users.x_max
    ]
    worst = min(
        max(noise_weighted_sq_distance(cfg, users, "p", x), noise_weighted_sq_distance(cfg, users, "s", x))
        for x in cands
    )
    return pe >= gamma * worst * (1.0 - BOUNDARY_RTOL)


def _betas(cfg, users, alpha_p):
    pe, gamma, sig, C = _coeffs(cfg, users)
    out = []
    for m in ("p", "s"):
        r = (pe * alpha_p * (1 + gamma) - pe * gamma - C[m] * sig[m] * gamma) / (sig[m] * gamma)
        out.append(math.sqrt(abs(r)))
    return out


def _rates(cfg, users, x, alpha_s):
    pe, gamma, sig, C = _coeffs(cfg, users)
    a_p = sig["p"] * ((x - users.x_p) ** 2 + C["p"])
    a_s = sig["s"] * ((x - users.x_s) ** 2 + C["s"])
    alpha_p = 1.0 - alpha_s
    sinr_p = alpha_p * pe / (alpha_s * pe + a_p)
    return math.log2(1.0 + alpha_s * pe / a_s), math.log2(1.0 + sinr_p)


def _infeasible(method="exact") -> SingleAntennaSolution:
    return SingleAntennaSolution(math.nan, 1.0, 0.0, "infeasible", math.nan, math.nan, 0.0, 0.0, method)


def solve_n1(cfg: SystemConfig, users: UserPair) -> SingleAntennaSolution:
    """Globally optimal position and power split for one antenna."""
    if not feasible_n1(cfg, users):
        return _infeasible()
    lo, hi = users.x_min, users.x_max
    cands = {users.x_p, users.x_s}
    for x in _crossings(cfg, users) + _primary_stationary(cfg, users):
        if lo - 1e-12 <= x <= hi + 1e-12:
            cands.add(min(max(x, lo), hi))
    xs = np.array(sorted(cands))
    snr, alpha_s = snr_at(cfg, users, xs)
    k = int(np.argmax(snr))
    if not np.isfinite(snr[k]):
        return _infeasible()
    x_star = float(xs[k])
    a_s = float(alpha_s[k])
    alloc_s = min(max(a_s, 0.0), 1.0)
    alpha_p = 1.0 - alloc_s
    beta_p, beta_s = _betas(cfg, users, alpha_p)
    rate_s, rate_p = _rates(cfg, users, x_star, alloc_s)
    span = max(hi - lo, 1.0)
    if alloc_s <= 1e-12:
        a_p = noise_weighted_sq_distance(cfg, users, "p", x_star)
        a_ss = noise_weighted_sq_distance(cfg, users, "s", x_star)
        case = "boundary_primary" if a_p >= a_ss else "boundary_secondary"
    elif lo + 1e-12 * span < x_star < hi - 1e-12 * span:
        case = "interior"
    else:
        case = "endpoint"
    return SingleAntennaSolution(x_star, alpha_p, alloc_s, case, beta_p, beta_s, rate_s, rate_p, "exact")


def paper_closed_form_n1(cfg: SystemConfig, users: UserPair) -> SingleAntennaSolution:
    """Literal three-case formula with alpha_p at its lower bound B.

    Returns the average of the two position expressions; ``position_spread``
    records how far apart they are. Kept for comparison with :func:`solve_n1`.
    """
    pe, gamma, sig, C = _coeffs(cfg, users)
    thr_p, thr_s = C["p"] * sig["p"] * gamma, C["s"] * sig["s"] * gamma
    top = max(thr_p, thr_s)
    if pe < top * (1.0 - BOUNDARY_RTOL):
        return _infeasible("paper")
    if abs(pe - top) <= BOUNDARY_RTOL * top:
        x = users.x_p if thr_p >= thr_s else users.x_s
        case = "boundary_primary" if thr_p >= thr_s else "boundary_secondary"
        rate_s, rate_p = _rates(cfg, users, x, 0.0)
        return SingleAntennaSolution(x, 1.0, 0.0, case, 0.0, 0.0, rate_s, rate_p, "paper")
    alpha_p = max((pe * gamma + thr_p) / (pe * (1 + gamma)), (pe * gamma + thr_s) / (pe * (1 + gamma)))
    alpha_p = min(alpha_p, 1.0)
    beta_p, beta_s = _betas(cfg, users, alpha_p)
    if users.x_p <= users.x_s:
        x1, x2 = users.x_p + beta_p, users.x_s - beta_s
    else:
        x1, x2 = users.x_p - beta_p, users.x_s + beta_s
    x = float(0.5 * (x1 + x2))
    alpha_s = 1.0 - alpha_p
    rate_s, rate_p = _rates(cfg, users, x, alpha_s)
    return SingleAntennaSolution(
        x, alpha_p, alpha_s, "interior", beta_p, beta_s, rate_s, rate_p, "paper", float(abs(x1 - x2))
    )


def constraint_scale(cfg: SystemConfig) -> float:
    return cfg.transmit_power * cfg.eta * (1.0 + cfg.qos_target_gamma_p)


def constraint_slacks(cfg: SystemConfig, users: UserPair, x: float, alpha_p: float) -> tuple[float, float]:
    """LHS - RHS of the two QoS constraints written linearly in alpha_p."""
    pe, gamma, sig, C = _coeffs(cfg, users)
    out = []
    for m in ("p", "s"):
        lhs = (pe + pe * gamma) * alpha_p - (x - users.x(m)) ** 2 * sig[m] * gamma
        rhs = pe * gamma + C[m] * sig[m] * gamma
        out.append(lhs - rhs)
    return out[0], out[1]


def check_tightness(cfg: SystemConfig, users: UserPair, sol: SingleAntennaSolution) -> tuple[float, float]:
    """Slacks of both QoS constraints at an interior solution."""
    if sol.case_id != "interior":
        raise ValueError(f"tightness is only defined for interior solutions, got {sol.case_id!r}")
    return constraint_slacks(cfg, users, sol.x_star, sol.alpha_p_star)
