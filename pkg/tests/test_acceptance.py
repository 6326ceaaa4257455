"""Acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from platecharge.cli import main
from platecharge.config import load_config
from platecharge.fields import CenterlineGeometry
from platecharge.inference import compare_platforms, fit_sigma, summarize
from platecharge.instrument import Condition, MountLabel, true_potential_at_sensor
from platecharge.oracles import check_centerline_limits, check_fit_closed_form, check_quadrature
from platecharge.survey import handheld_reference, run_factorial, run_transect

pytestmark = pytest.mark.acceptance

CFG = load_config()
SEEDS = range(20)
PC = 1e-12


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _suite_detail(checks, elapsed):
    parts = ", ".join(f"{c.name}={c.deviation:.6g}" for c in checks)
    return f"{parts}; {elapsed:.2f}s"


def test_criterion_01_centerline_limits(criterion):
    checks, elapsed = _timed(check_centerline_limits)
    ok = all(c.passed for c in checks) and elapsed < 1.0
    assert criterion(1, "centerline limit, evenness, monotonicity", ok, _suite_detail(checks, elapsed))


def test_criterion_02_quadrature(criterion):
    checks, elapsed = _timed(check_quadrature)
    ok = all(c.passed for c in checks) and elapsed < 30.0
    assert criterion(2, "quadrature vs solid angle, order", ok, _suite_detail(checks, elapsed))


def test_criterion_03_fit_oracle(criterion):
    checks, elapsed = _timed(check_fit_closed_form)
    ok = all(c.passed for c in checks) and elapsed < 5.0
    assert criterion(3, "solver vs closed form, noiseless recovery", ok, _suite_detail(checks, elapsed))


def _coverage(n=1000):
    sigma = CFG.world.plate.sigma
    hits = 0
    for seed in range(n):
        records = run_transect(CFG.transect, CFG.robot, CFG.sensor, CFG.world, seed)
        fit = fit_sigma(summarize(records), CFG.z, CFG.side_a)
        hits += abs(fit.sigma_hat - sigma) <= fit.sigma_se
    return hits / n


def test_criterion_04_coverage(criterion):
    frac, elapsed = _timed(_coverage)
    ok = 0.58 <= frac <= 0.78 and elapsed < 60.0
    assert criterion(4, "1-SE coverage over 1000 robot transects", ok,
                     f"coverage={frac:.3f} (target [0.58, 0.78]); {elapsed:.1f}s")


def _paired(seed):
    robot = run_transect(CFG.transect, CFG.robot, CFG.sensor, CFG.world, seed)
    hand = handheld_reference(CFG.transect, CFG.handheld, CFG.sensor, CFG.world, seed)
    return compare_platforms(robot, hand, CFG.z, CFG.side_a)


REPORTS = {seed: _paired(seed) for seed in SEEDS}


def test_criterion_05_fse_ranges(criterion):
    robot = [s.fractional_se for rep in REPORTS.values() for s in rep.robot]
    hand = [s.fractional_se for rep in REPORTS.values() for s in rep.handheld]
    robot_in = np.mean([0.12 <= f <= 0.36 for f in robot])
    hand_in = np.mean([0.20 <= f <= 0.40 for f in hand])
    ok = robot_in >= 0.8 and hand_in >= 0.8
    assert criterion(5, "fractional SE ranges over 20 seeds", ok,
                     f"handheld in [0.20, 0.40]: {hand_in:.2f}, robot in [0.12, 0.36]: {robot_in:.2f} (need >= 0.80)")


def test_criterion_06_variability_ratio(criterion):
    ratio = float(np.mean([rep.variability_ratio for rep in REPORTS.values()]))
    assert criterion(6, "mean variability ratio over 20 seeds", 1.3 <= ratio <= 2.7,
                     f"ratio={ratio:.3f} (target [1.3, 2.7])")


def test_criterion_07_factorial(criterion):
    records = run_factorial(CFG.factorial, CFG.robot, CFG.sensor, CFG.world, CFG.seed, CFG.mount_table)
    cells = {s.position_label: s for s in summarize(records, "condition")}
    shifts = {}
    for mount in MountLabel:
        base = cells[f"{mount.value}|motor_off|wheels_n"]
        charged = cells[f"{mount.value}|motor_off|wheels_c"]
        shifts[mount] = abs(charged.mean - base.mean) / base.se
    by_cell = {(r.mount_label, r.motor_on, r.wheels_charged, r.run): r.reading for r in records}
    motor_identical = all(v == by_cell[(m, False, w, k)] for (m, on, w, k), v in by_cell.items() if on)
    ok = (
        shifts[MountLabel.P1_FLUSH_FRONT] > 3
        and all(shifts[m] < 1 for m in MountLabel if m is not MountLabel.P1_FLUSH_FRONT)
        and motor_identical
    )
    detail = ", ".join(f"{m.value}={shifts[m]:.2f} SE" for m in MountLabel)
    assert criterion(7, "wheel charge affects P1 only; motor has no effect", ok,
                     f"{detail}; motor cells identical={motor_identical}")


def test_criterion_08_sigma_consistency(criterion):
    rep = _paired(CFG.seed)
    r, h = rep.robot_fit, rep.handheld_fit
    configured = CFG.world.plate.sigma / PC
    scale_ok = all(10 <= x < 100 for x in (configured, r.sigma_hat / PC, h.sigma_hat / PC))
    ok = rep.sigma_consistent and scale_ok
    assert criterion(8, "robot and handheld sigma agree (default seed)", ok,
                     f"robot {r.sigma_hat / PC:.1f} +/- {r.sigma_se / PC:.1f}, "
                     f"handheld {h.sigma_hat / PC:.1f} +/- {h.sigma_se / PC:.1f} pC/m^2 (configured {configured:g})")


def test_criterion_09_smoothness(criterion):
    robot = CFG.robot.quiet()
    r = np.linspace(-0.5, 0.5, 1001)
    rng = np.random.default_rng(0)
    v = np.array([
        true_potential_at_sensor(robot, CenterlineGeometry(CFG.z, x), Condition(), CFG.world, rng) for x in r
    ])
    sign = np.sign(np.diff(v))
    changes = np.flatnonzero(sign[1:] != sign[:-1])
    # the only allowed change straddles r = 0 (the differences either side of the center)
    where = [(float(r[i]), float(r[i + 2])) for i in changes]
    ok = len(changes) == 1 and where[0][0] < 0 < where[0][1] and not np.any(sign == 0)
    assert criterion(9, "single interior extremum of the noiseless profile", ok,
                     f"slope sign changes={len(changes)} at {[(round(a, 3), round(b, 3)) for a, b in where]}")


def test_criterion_10_determinism(criterion, tmp_path, monkeypatch):
    monkeypatch.delenv("PLATECHARGE_SEED", raising=False)
    codes = [main(["simulate", "--experiment", exp, "-o", str(tmp_path / f"{exp}{k}")])
             for k in (1, 2) for exp in ("transect", "factorial")]
    names = [f"records_{exp}_{p}.csv" for exp in ("transect", "factorial") for p in ("robot", "handheld")]
    identical = all(
        (tmp_path / f"{n.split('_')[1]}1" / n).read_bytes() == (tmp_path / f"{n.split('_')[1]}2" / n).read_bytes()
        for n in names
    )
    ok = identical and codes == [0, 0, 0, 0]
    assert criterion(10, "repeated simulate is byte-identical", ok, f"{len(names)} CSV pairs identical={identical}")
