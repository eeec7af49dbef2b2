"""Closed-form power split between the primary and secondary user for fixed
antenna positions.

The secondary rate grows with ``alpha_s``, so the optimum is the largest
``alpha_s`` that still meets the primary's SINR target at both receivers.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    EffectiveChannels,
    PowerAllocation,
    SystemConfig,
    primary_sinr,
    sic_sinr_at_secondary,
)

QOS_TOL = 1e-9


@dataclass(frozen=True)
class PowerUpdateResult:
    alloc: PowerAllocation
    cap_A: float
    feasible_with_positive_secondary: bool
    infeasible_qos: bool
    binding_user: str


def power_cap(cfg: SystemConfig, channels: EffectiveChannels, n: int) -> tuple[float, str]:
    """Upper bound A on ``alpha_s`` and the user whose constraint attains it."""
    P, gamma = cfg.transmit_power, cfg.qos_target_gamma_p
    best, who = float("inf"), "p"
    for m in ("p", "s"):
        sig = P * channels.gain(m)
        if sig <= 0:
            raise ValueError(f"channel of user {m!r} vanishes; power split undefined")
        cap = (sig - n * cfg.noise(m) * gamma) / (sig * (1.0 + gamma))
        if cap < best:
            best, who = cap, m
    return best, who


def optimal_power_split(cfg: SystemConfig, channels: EffectiveChannels, n: int) -> PowerUpdateResult:
    cap, who = power_cap(cfg, channels, n)
    alloc = PowerAllocation.from_secondary(max(0.0, cap))
    primary_ok, sic_ok = verify_qos(cfg, channels, alloc, n)
    return PowerUpdateResult(
        alloc=alloc,
        cap_A=cap,
        feasible_with_positive_secondary=cap > 0,
        infeasible_qos=not (primary_ok and sic_ok),
        binding_user=who,
    )


def verify_qos(
    cfg: SystemConfig, channels: EffectiveChannels, alloc: PowerAllocation, n: int, tol: float = QOS_TOL
) -> tuple[bool, bool]:
    """(primary_ok, sic_ok): the primary target met at the primary and at the SIC stage."""
    gamma = cfg.qos_target_gamma_p
    primary_ok = primary_sinr(cfg, channels.h_p, alloc, n) >= gamma - tol
    sic_ok = sic_sinr_at_secondary(cfg, channels.h_s, alloc, n) >= gamma - tol
    return primary_ok, sic_ok


def qos_margins(cfg: SystemConfig, channels: EffectiveChannels, alloc: PowerAllocation, n: int) -> tuple[float, float]:
    gamma = cfg.qos_target_gamma_p
    return (
        primary_sinr(cfg, channels.h_p, alloc, n) - gamma,
        sic_sinr_at_secondary(cfg, channels.h_s, alloc, n) - gamma,
    )
