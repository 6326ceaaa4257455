"""
Summary statistics and surface charge density estimation from survey records.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fields import centerline_shape_at
from .lsq import DegenerateDesignError, iterative_damped_least_squares
from .survey import MeasurementRecord


class PositionMismatchError(ValueError):
    def __init__(self, only_robot: Iterable[str], only_handheld: Iterable[str]):
        self.only_robot = sorted(only_robot)
        self.only_handheld = sorted(only_handheld)
        super().__init__(
            f"record sets cover different positions: robot only {self.only_robot}, "
            f"handheld only {self.only_handheld}"
        )


@dataclass(frozen=True)
class PositionSummary:
    position_label: str
    r: float
    mean: float
    std_dev: float
    se: float
    fractional_se: float
    n: int
    median: float

    @property
    def band(self) -> tuple[float, float]:
        """Two-standard-error band centred on the median."""
        return (self.median - 2 * self.se, self.median + 2 * self.se)


@dataclass(frozen=True)
class FitResult:
    sigma_hat: float
    sigma_se: float
    chi2: float
    dof: int
    reduced_chi2: float
    residuals: tuple[float, ...]
    covariance: np.ndarray = field(repr=False, compare=False)
    r0_hat: float | None = None
    r0_se: float | None = None


@dataclass(frozen=True)
class ComparisonReport:
    robot: list[PositionSummary]
    handheld: list[PositionSummary]
    robot_fse_range: tuple[float, float]
    handheld_fse_range: tuple[float, float]
    variability_ratio: float
    robot_fit: FitResult
    handheld_fit: FitResult
    sigma_consistent: bool


def condition_label(rec: MeasurementRecord) -> str:
    mount = rec.mount_label.value if rec.mount_label else rec.platform.value
    return (
        f"{mount}|motor_{'on' if rec.motor_on else 'off'}"
        f"|wheels_{'c' if rec.wheels_charged else 'n'}"
    )


def summarize(records: Sequence[MeasurementRecord], group_key: str = "position") -> list[PositionSummary]:
    """Per-group mean, sample std-dev (n-1), standard error, fractional SE and median.

    ``group_key`` is ``"position"`` (transect positions) or ``"condition"``
    (mount/motor/wheel cells of the factorial experiment). Output is sorted by
    group label, so the result does not depend on record order. Groups of a
    single reading get ``se = 0`` and a warning.
    """
    if group_key == "position":
        keyfunc = lambda rec: rec.position_label  # noqa: E731
    elif group_key == "condition":
        keyfunc = condition_label
    else:
        raise ValueError(f"group_key must be 'position' or 'condition', got {group_key!r}")

    groups: dict[str, list[MeasurementRecord]] = defaultdict(list)
    for rec in records:
        groups[keyfunc(rec)].append(rec)

    out = []
    for label in sorted(groups):
        recs = groups[label]
        # sort readings so the floating-point reductions are order independent
        values = np.sort(np.array([rec.reading for rec in recs]))
        rs = {rec.r for rec in recs}
        if len(rs) != 1:
            raise ValueError(f"group {label!r} mixes positions {sorted(rs)}")
        n = values.size
        mean = float(np.mean(values))
        if n > 1:
            std = float(np.std(values, ddof=1))
        else:
            warnings.warn(f"group {label!r} has a single reading; its standard error is set to 0", stacklevel=2)
            std = 0.0
        se = std / math.sqrt(n)
        if mean != 0:
            fse = se / abs(mean)
        else:
            fse = 0.0 if se == 0 else math.inf
        out.append(PositionSummary(label, rs.pop(), mean, std, se, fse, n, float(np.median(values))))
    return out


def _weights(se: np.ndarray) -> np.ndarray:
    """Inverse-variance weights; zero-SE points get 10x the largest finite weight."""
    if not np.all(np.isfinite(se)) or np.any(se < 0):
        raise ValueError("standard errors must be finite and non-negative")
    w = np.zeros_like(se)
    pos = se > 0
    w[pos] = 1.0 / se[pos] ** 2
    w[~pos] = 10.0 * w[pos].max() if pos.any() else 1.0
    return w


def closed_form_sigma(g: np.ndarray, means: np.ndarray, weights: np.ndarray) -> float:
    """Weighted linear least-squares estimate for ``means ~ sigma * g``."""
    return float(np.sum(weights * g * means) / np.sum(weights * g * g))


def fit_sigma(
    summaries: Sequence[PositionSummary],
    z: float,
    side_a: float,
    *,
    fit_offset: bool = False,
) -> FitResult:
    """Weighted least-squares fit of the centerline model to position means.

    Weights are ``1/se**2``. The uncertainty on sigma is inflated by the
    reduced chi-square when that exceeds 1. With ``fit_offset`` the model is
    ``sigma * g(r - r0)`` and both parameters are fitted.
    """
    if len(summaries) < 2:
        raise DegenerateDesignError(f"need at least 2 positions to fit, got {len(summaries)}")
    r = np.array([s.r for s in summaries], dtype=float)
    if np.unique(r).size < 2:
        raise DegenerateDesignError("all positions share the same r; sigma is not separable from the profile")
    means = np.array([s.mean for s in summaries], dtype=float)
    w = _weights(np.array([s.se for s in summaries], dtype=float))
    g = centerline_shape_at(r, z, side_a)

    if fit_offset:
        return _fit_sigma_offset(r, means, w, z, side_a)

    init = [np.mean(means) / np.mean(g)]
    result = iterative_damped_least_squares(
        lambda p, x: p[0] * g, r, means, w, init, jacobian=lambda p, x: g[:, None]
    )
    sigma = float(result.params[0])
    dof = r.size - 1
    resid = means - sigma * g
    chi2 = float(np.sum(w * resid**2))
    red = chi2 / dof
    info = float(np.sum(w * g * g))
    se = math.sqrt(red / info) if red > 1 else math.sqrt(1.0 / info)
    return FitResult(sigma, se, chi2, dof, red, tuple(resid.tolist()), result.covariance)


def _fit_sigma_offset(r, means, w, z, side_a) -> FitResult:
    dof = r.size - 2
    if dof < 1:
        raise DegenerateDesignError("an offset fit needs at least 3 positions")

    def model(p, x):
        return p[0] * centerline_shape_at(x - p[1], z, side_a)

    g0 = centerline_shape_at(r, z, side_a)
    init = [closed_form_sigma(g0, means, w), 0.0]
    # the sigma column is exact; the r0 column uses central differences
    def jac(p, x):
        h = 1e-7 * side_a
        d = (model(p, x + h) - model(p, x - h)) / (2 * h)
        return np.column_stack([centerline_shape_at(x - p[1], z, side_a), -d])

    result = iterative_damped_least_squares(model, r, means, w, init, jacobian=jac)
    resid = means - model(result.params, r)
    chi2 = float(np.sum(w * resid**2))
    red = chi2 / dof
    cov = result.covariance * (red if red > 1 else 1.0)
    return FitResult(
        float(result.params[0]),
        math.sqrt(cov[0, 0]),
        chi2,
        dof,
        red,
        tuple(resid.tolist()),
        cov,
        float(result.params[1]),
        math.sqrt(cov[1, 1]),
    )


def fse_range(summaries: Sequence[PositionSummary]) -> tuple[float, float]:
    values = [s.fractional_se for s in summaries]
    return (min(values), max(values))


def compare_platforms(
    robot_records: Sequence[MeasurementRecord],
    handheld_records: Sequence[MeasurementRecord],
    z: float,
    side_a: float,
) -> ComparisonReport:
    """Summaries, fits and variability statistics for a robot/handheld survey pair.

    The variability ratio is the mean handheld fractional SE over the mean robot
    fractional SE (1 when both are zero).
    """
    if not robot_records or not handheld_records:
        raise ValueError("cannot compare an empty record set")
    robot = summarize(robot_records)
    handheld = summarize(handheld_records)
    r_labels = {s.position_label for s in robot}
    h_labels = {s.position_label for s in handheld}
    if r_labels != h_labels:
        raise PositionMismatchError(r_labels - h_labels, h_labels - r_labels)

    robot_fit = fit_sigma(robot, z, side_a)
    handheld_fit = fit_sigma(handheld, z, side_a)
    mean_r = float(np.mean([s.fractional_se for s in robot]))
    mean_h = float(np.mean([s.fractional_se for s in handheld]))
    if mean_r == 0:
        ratio = 1.0 if mean_h == 0 else math.inf
    else:
        ratio = mean_h / mean_r
    combined = math.hypot(robot_fit.sigma_se, handheld_fit.sigma_se)
    consistent = abs(robot_fit.sigma_hat - handheld_fit.sigma_hat) <= combined
    return ComparisonReport(
        robot, handheld, fse_range(robot), fse_range(handheld), ratio, robot_fit, handheld_fit, consistent
    )
