"""
Self-checks that pit each model against an independent reference.

Each suite returns a list of :class:`Check`; a suite passes when every check does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    EPSILON0,
    CenterlineGeometry,
    ChargedPlate,
    QuadratureSpec,
    centerline_potential,
    centerline_shape_at,
    integral_field_axial,
    refinement_table,
    solid_angle_field_axial,
)
from .inference import PositionSummary, closed_form_sigma, fit_sigma


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    deviation: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: deviation={self.deviation:.4g} tolerance={self.tolerance:.4g}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def check_centerline_limits(z: float = 0.462, side_a: float = 1.0, sigma: float = 1e-11) -> list[Check]:
    plate = ChargedPlate(side_a, sigma)
    limit = z * sigma / (2 * EPSILON0)
    at_zero = _rel(centerline_potential(CenterlineGeometry(z, 0.0), plate), limit)
    near_zero = _rel(centerline_potential(CenterlineGeometry(z, 1e-12), plate), limit)

    r = np.linspace(0.0, 0.5, 1000)
    v_pos = sigma * centerline_shape_at(r, z, side_a)
    asym = float(np.max(np.abs(v_pos - sigma * centerline_shape_at(-r, z, side_a))) / limit)
    # largest step along increasing |r|; must be negative everywhere
    rise = float(np.max(np.diff(v_pos)) / limit)
    return [
        Check("V(0) equals z*sigma/(2*eps0)", at_zero < 1e-9, at_zero, 1e-9),
        Check("continuity at r=1e-12", near_zero < 1e-9, near_zero, 1e-9),
        Check("even in r (1000-point grid)", asym == 0.0, asym, 0.0),
        Check("strictly decreasing in |r| (1000-point grid)", rise < 0.0, rise, 0.0),
    ]


QUADRATURE_CASES = ((1.0, 0.462), (1.0, 0.1), (2.0, 1.0))


def check_quadrature(n: int = 512, sigma: float = 1e-9, min_order: float = 1.99) -> list[Check]:
    """Axial-field quadrature against the closed-form solid-angle result, plus observed order."""
    checks = []
    for a, z in QUADRATURE_CASES:
        plate = ChargedPlate(a, sigma)
        exact = solid_angle_field_axial(z, plate)
        dev = _rel(integral_field_axial(z, plate, QuadratureSpec(n)), exact)
        checks.append(Check(f"axial field a={a:g} z={z:g} n={n}", dev < 1e-6, dev, 1e-6))
        table = refinement_table(lambda q: integral_field_axial(z, plate, q), n0=32, levels=5)
        order = min(step.order for step in table if not math.isnan(step.order))
        checks.append(Check(f"observed order a={a:g} z={z:g}", order >= min_order, order, min_order))
    return checks


def random_summaries(rng: np.random.Generator, z: float = 0.462, side_a: float = 1.0) -> list[PositionSummary]:
    """A random but well-posed transect summary set for solver checks."""
    n = int(rng.integers(3, 10))
    r = np.sort(rng.uniform(-0.5, 0.5, n))
    sigma = rng.uniform(5e-12, 2e-10)
    se = sigma * centerline_shape_at(r, z, side_a) * rng.uniform(0.02, 0.4, n)
    means = sigma * centerline_shape_at(r, z, side_a) + se * rng.standard_normal(n)
    return [
        PositionSummary(f"P{i}", float(r[i]), float(means[i]), float(se[i] * 2), float(se[i]),
                        float(se[i] / abs(means[i])), 4, float(means[i]))
        for i in range(n)
    ]


def check_fit_closed_form(n_datasets: int = 100, seed: int = 12345, z: float = 0.462, side_a: float = 1.0) -> list[Check]:
    """Iterative solver against the closed-form weighted estimator, plus noiseless recovery."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_datasets):
        summaries = random_summaries(rng, z, side_a)
        r = np.array([s.r for s in summaries])
        means = np.array([s.mean for s in summaries])
        w = 1.0 / np.array([s.se for s in summaries]) ** 2
        expected = closed_form_sigma(centerline_shape_at(r, z, side_a), means, w)
        worst = max(worst, _rel(fit_sigma(summaries, z, side_a).sigma_hat, expected))

    sigma_true = 5e-11
    r = np.array([-0.4, -0.2, 0.0, 0.2, 0.4])
    v = sigma_true * centerline_shape_at(r, z, side_a)
    noiseless = [PositionSummary(str(i), float(r[i]), float(v[i]), 0.0, 0.0, 0.0, 5, float(v[i])) for i in range(5)]
    recovered = fit_sigma(noiseless, z, side_a)
    return [
        Check(f"solver vs closed form ({n_datasets} datasets)", worst < 1e-10, worst, 1e-10),
        Check("noiseless recovery of sigma", _rel(recovered.sigma_hat, sigma_true) < 1e-9,
              _rel(recovered.sigma_hat, sigma_true), 1e-9),
    ]


SUITES = {
    "eq1-limits": check_centerline_limits,
    "quadrature": check_quadrature,
    "fit-closed-form": check_fit_closed_form,
}
