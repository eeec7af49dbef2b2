import math

import numpy as np
import pytest

from pinchnoma.baselines import FIXED_LABEL, fixed_baseline, fixed_layout, oma_solve
from pinchnoma.closedform import solve_n1
from pinchnoma.model import SystemConfig, UserPair
from pinchnoma.sca import bcd_solve

from conftest import random_users


def test_single_antenna_oma_sits_above_each_user(cfg, users):
    sol = oma_solve(cfg, users, 1)
    assert sol.layout_p.positions[0] == pytest.approx(users.x_p, abs=1e-6)
    assert sol.layout_s.positions[0] == pytest.approx(users.x_s, abs=1e-6)
    d = cfg.waveguide_height_d
    for m, rate in (("p", sol.rate_p), ("s", sol.rate_s)):
        expect = 0.5 * math.log2(1 + cfg.eta * cfg.transmit_power / (users.c_const(m, d) * cfg.noise(m)))
        assert rate == pytest.approx(expect, abs=1e-9)
    assert sol.sum_rate == pytest.approx(sol.rate_p + sol.rate_s)


def test_more_antennas_help_oma(cfg):
    for seed in range(5):
        users = random_users(seed)
        one, two = oma_solve(cfg, users, 1), oma_solve(cfg, users, 2)
        assert two.rate_p >= one.rate_p - 1e-9
        assert two.rate_s >= one.rate_s - 1e-9


def test_oma_traces_monotone(cfg):
    sol = oma_solve(cfg, random_users(2), 3)
    for trace in sol.traces:
        assert all(b >= a for a, b in zip(trace, trace[1:]))


def test_fixed_layout_geometry(cfg):
    lay = fixed_layout(cfg, 4)
    assert np.mean(lay.x) == pytest.approx(cfg.region_side_D / 2)
    assert np.diff(lay.x) == pytest.approx([cfg.wavelength / 2] * 3)


def test_fixed_baseline_is_dominated(cfg):
    wins = 0
    for seed in range(20):
        users = random_users(seed)
        wins += bcd_solve(cfg, users, 2).rate_s >= fixed_baseline(cfg, users, 2).rate_s
        assert solve_n1(cfg, users).secondary_rate >= fixed_baseline(cfg, users, 1).rate_s - 1e-12
    assert wins >= 18
    assert fixed_baseline(cfg, random_users(0), 2).scheme == FIXED_LABEL


def test_fixed_and_optimised_coincide_for_centred_users(cfg):
    users = UserPair(2.5, 1.0, 2.5, 2.0)
    assert solve_n1(cfg, users).x_star == pytest.approx(fixed_layout(cfg, 1).positions[0])
    assert fixed_baseline(cfg, users, 1).rate_s == pytest.approx(solve_n1(cfg, users).secondary_rate)


def test_fixed_baseline_flags_infeasibility():
    cfg = SystemConfig.from_units(power_dbm=-40.0, gamma_p=10.0)
    sol = fixed_baseline(cfg, random_users(0), 2)
    assert sol.termination == "infeasible_qos"
    assert sol.alloc.alpha_s == 0.0
