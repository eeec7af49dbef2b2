"""Geometry, channel gains and achievable rates of a single-waveguide
pinching-antenna downlink serving a primary and a secondary user.

Everything here is a pure function of immutable values. Positions are in
meters, powers in Watts, rates in bits/s/Hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
SPACING_SLACK = 1e-9

USERS = ("p", "s")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Physical constants and protocol parameters, all in SI linear units.

    ``min_spacing_delta`` defaults to half a free-space wavelength when left
    as ``None``. Use :meth:`from_units` to build a config from dBm/GHz values.
    """

    carrier_frequency: float = 28e9
    transmit_power: float = 1.0
    noise_power_primary: float = 1e-10
    noise_power_secondary: float = 1e-10
    qos_target_gamma_p: float = 0.1
    waveguide_height_d: float = 3.0
    min_spacing_delta: float | None = None
    region_side_D: float = 5.0
    feed_point_x0: float = 0.0
    effective_refractive_index: float = 1.4
    inwaveguide_attenuation: float = 0.0

    def __post_init__(self):
        positive = {
            "carrier_frequency": self.carrier_frequency,
            "transmit_power": self.transmit_power,
            "noise_power_primary": self.noise_power_primary,
            "noise_power_secondary": self.noise_power_secondary,
            "qos_target_gamma_p": self.qos_target_gamma_p,
            "waveguide_height_d": self.waveguide_height_d,
            "region_side_D": self.region_side_D,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.min_spacing_delta is None:
            object.__setattr__(self, "min_spacing_delta", self.wavelength / 2.0)
        if not self.min_spacing_delta > 0:
            raise ValueError("min_spacing_delta must be strictly positive")
        if self.effective_refractive_index < 1.0:
            raise ValueError("effective_refractive_index must be >= 1")
        if self.inwaveguide_attenuation < 0:
            raise ValueError("inwaveguide_attenuation must be >= 0 dB/m")

    @classmethod
    def from_units(
        cls,
        fc_ghz: float = 28.0,
        power_dbm: float = 30.0,
        noise_dbm: float = -70.0,
        gamma_p: float = 0.1,
        side_d: float = 5.0,
        height_d: float = 3.0,
        n_neff: float = 1.4,
        attenuation_db_per_m: float = 0.0,
        feed_x0: float = 0.0,
        noise_dbm_secondary: float | None = None,
        spacing: float | None = None,
    ) -> "SystemConfig":
        noise_s = noise_dbm if noise_dbm_secondary is None else noise_dbm_secondary
        return cls(
            carrier_frequency=fc_ghz * 1e9,
            transmit_power=dbm_to_watt(power_dbm),
            noise_power_primary=dbm_to_watt(noise_dbm),
            noise_power_secondary=dbm_to_watt(noise_s),
            qos_target_gamma_p=gamma_p,
            waveguide_height_d=height_d,
            min_spacing_delta=spacing,
            region_side_D=side_d,
            feed_point_x0=feed_x0,
            effective_refractive_index=n_neff,
            inwaveguide_attenuation=attenuation_db_per_m,
        )

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def guided_wavelength(self) -> float:
        return self.wavelength / self.effective_refractive_index

    @property
    def eta(self) -> float:
        return SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * self.carrier_frequency**2)

    def noise(self, m: str) -> float:
        return self.noise_power_primary if m == "p" else self.noise_power_secondary


@dataclass(frozen=True)
class UserPair:
    """Primary/secondary user positions on the ground plane (z = 0)."""

    x_p: float
    y_p: float
    x_s: float
    y_s: float

    def x(self, m: str) -> float:
        _check_user(m)
        return self.x_p if m == "p" else self.x_s

    def y(self, m: str) -> float:
        _check_user(m)
        return self.y_p if m == "p" else self.y_s

    def c_const(self, m: str, d: float) -> float:
        """Squared distance from user ``m`` to the waveguide line, y_m^2 + d^2."""
        return self.y(m) ** 2 + d**2

    @property
    def x_min(self) -> float:
        return min(self.x_p, self.x_s)

    @property
    def x_max(self) -> float:
        return max(self.x_p, self.x_s)

    def shifted(self, dx: float) -> "UserPair":
        return UserPair(self.x_p + dx, self.y_p, self.x_s + dx, self.y_s)


@dataclass(frozen=True)
class AntennaLayout:
    positions: tuple[float, ...]

    def __post_init__(self):
        pos = tuple(float(v) for v in self.positions)
        if len(pos) < 1:
            raise ValueError("layout needs at least one antenna")
        if not all(math.isfinite(v) for v in pos):
            raise ValueError("antenna positions must be finite")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("antenna positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_first(cls, x1: float, n: int, spacing: float) -> "AntennaLayout":
        return cls(tuple(x1 + k * spacing for k in range(n)))

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def min_gap(self) -> float:
        if self.n == 1:
            return math.inf
        return float(np.min(np.diff(self.x)))

    def respects_spacing(self, delta: float) -> bool:
        return self.min_gap() >= delta - SPACING_SLACK

    def shifted(self, dx: float) -> "AntennaLayout":
        return AntennaLayout(tuple(v + dx for v in self.positions))


@dataclass(frozen=True)
class EffectiveChannels:
    h_p: complex
    h_s: complex

    def h(self, m: str) -> complex:
        return self.h_p if m == "p" else self.h_s

    def gain(self, m: str) -> float:
        return abs(self.h(m)) ** 2


@dataclass(frozen=True)
class PowerAllocation:
    alpha_p: float
    alpha_s: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.alpha_s is None:
            object.__setattr__(self, "alpha_s", 1.0 - self.alpha_p)
        if not (0.0 <= self.alpha_p <= 1.0 and 0.0 <= self.alpha_s <= 1.0):
            raise ValueError(f"power fractions out of [0, 1]: {self.alpha_p}, {self.alpha_s}")
        if abs(self.alpha_p + self.alpha_s - 1.0) > 1e-15:
            raise ValueError("alpha_p + alpha_s must equal 1")

    @classmethod
    def from_secondary(cls, alpha_s: float) -> "PowerAllocation":
        alpha_s = min(max(float(alpha_s), 0.0), 1.0)
        alpha_p = 1.0 - alpha_s
        # derive alpha_s from the rounded alpha_p so the pair sums to 1 within an ulp
        return cls(alpha_p=alpha_p, alpha_s=1.0 - alpha_p)


def _check_user(m: str) -> None:
    if m not in USERS:
        raise ValueError(f"user id must be 'p' or 's', got {m!r}")


def free_space_distance(users: UserPair, m: str, x, d: float):
    """Distance between user ``m`` and an antenna at waveguide coordinate ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt((x - users.x(m)) ** 2 + users.c_const(m, d))
    return float(out) if out.ndim == 0 else out


def attenuation_factor(cfg: SystemConfig, x):
    """Amplitude factor for in-waveguide loss from the feed point to ``x``."""
    x = np.asarray(x, dtype=float)
    if cfg.inwaveguide_attenuation == 0.0:
        return np.ones_like(x)
    return 10.0 ** (-cfg.inwaveguide_attenuation * (x - cfg.feed_point_x0) / 20.0)


def antenna_terms(cfg: SystemConfig, users: UserPair, m: str, x) -> np.ndarray:
    """Per-antenna complex contributions to the effective channel of user ``m``.

    Vectorised over ``x``; the effective channel of a layout is the sum of its
    terms.
    """
    x = np.asarray(x, dtype=float)
    dist = free_space_distance(users, m, x, cfg.waveguide_height_d)
    phase = (2.0 * np.pi / cfg.wavelength) * dist + (2.0 * np.pi / cfg.guided_wavelength) * (
        x - cfg.feed_point_x0
    )
    amp = math.sqrt(cfg.eta) * attenuation_factor(cfg, x) / dist
    return amp * np.exp(-1j * phase)


def effective_channel(cfg: SystemConfig, users: UserPair, layout: AntennaLayout) -> EffectiveChannels:
    x = layout.x
    if cfg.inwaveguide_attenuation > 0 and np.any(x < cfg.feed_point_x0):
        raise ValueError("antenna placed before the feed point while attenuation is modelled")
    h = {}
    for m in USERS:
        acc = 0j
        for term in antenna_terms(cfg, users, m, x):
            acc += term
        h[m] = complex(acc)
    return EffectiveChannels(h_p=h["p"], h_s=h["s"])


def sic_sinr_at_secondary(cfg: SystemConfig, h_s: complex, alloc: PowerAllocation, n: int) -> float:
    """SINR at the secondary user when decoding the primary's message first."""
    sig = cfg.transmit_power * abs(h_s) ** 2
    return alloc.alpha_p * sig / (alloc.alpha_s * sig + n * cfg.noise_power_secondary)


def secondary_snr(cfg: SystemConfig, h_s: complex, alloc: PowerAllocation, n: int) -> float:
    return alloc.alpha_s * cfg.transmit_power * abs(h_s) ** 2 / (n * cfg.noise_power_secondary)


def primary_sinr(cfg: SystemConfig, h_p: complex, alloc: PowerAllocation, n: int) -> float:
    sig = cfg.transmit_power * abs(h_p) ** 2
    return alloc.alpha_p * sig / (alloc.alpha_s * sig + n * cfg.noise_power_primary)


def noma_rates(
    cfg: SystemConfig, channels: EffectiveChannels, alloc: PowerAllocation, n: int
) -> tuple[float, float]:
    """(rate_p, rate_s) in bits/s/Hz. SIC validity is the caller's concern."""
    rate_p = math.log2(1.0 + primary_sinr(cfg, channels.h_p, alloc, n))
    rate_s = math.log2(1.0 + secondary_snr(cfg, channels.h_s, alloc, n))
    return rate_p, rate_s


def oma_rate(cfg: SystemConfig, users: UserPair, layout: AntennaLayout, m: str) -> float:
    """TDMA rate of user ``m`` served alone with full power in its half slot."""
    h = effective_channel(cfg, users, layout).h(m)
    snr = abs(h) ** 2 * cfg.transmit_power / (layout.n * cfg.noise(m))
    return 0.5 * math.log2(1.0 + snr)


def layout_from(positions: Iterable[float]) -> AntennaLayout:
    return AntennaLayout(tuple(positions))
