"""
Forward electrostatic models for a uniformly charged square plate.

Two independent routes are provided:

* a centerline model ``V(r) = (z sigma / (pi eps0)) arctan(a^2 / (4 |r| sqrt(a^2 + r^2)))``
  used for fitting transect data, and
* a brute-force midpoint quadrature of the Coulomb kernel over the plate,
  optionally superposed with point charges, used as a physical oracle.

All quantities are SI: metres, coulombs, volts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPSILON0 = 8.854187817e-12  # F/m
COULOMB_K = 1.0 / (4.0 * math.pi * EPSILON0)

#: points closer than this to the plate surface (inside its footprint) are rejected
EXCLUSION_BAND = 1e-9


class QuadratureWarning(UserWarning):
    """Grid refinement check exceeded its tolerance."""


def _vec3(v, name: str) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr.tolist()}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


def _check_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ChargedPlate:
    """Square plate of side ``side_a`` carrying a uniform charge density ``sigma``."""

    side_a: float = 1.0
    sigma: float = 0.0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    normal: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        _check_finite("side_a", self.side_a)
        _check_finite("sigma", self.sigma)
        if self.side_a <= 0:
            raise ValueError(f"side_a must be > 0, got {self.side_a}")
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        object.__setattr__(self, "normal", _vec3(self.normal, "normal"))
        if abs(math.hypot(*self.normal) - 1.0) > 1e-12:
            raise ValueError(f"normal must be a unit vector, got {self.normal}")

    def in_plane_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal (u, v) spanning the plate; u is the centerline direction.

        u is the world x-axis projected onto the plate plane (world y-axis if the
        normal is parallel to x), so the default plate has u = x, v = y.
        """
        n = np.asarray(self.normal)
        ref = np.array([1.0, 0.0, 0.0])
        if abs(n @ ref) > 0.9:
            ref = np.array([0.0, 1.0, 0.0])
        u = ref - (ref @ n) * n
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        return u, v

    def centerline_point(self, r: float, z: float) -> np.ndarray:
        """World position at signed centerline distance ``r`` and standoff ``z`` below the plate."""
        u, _ = self.in_plane_axes()
        return np.asarray(self.center) + r * u - z * np.asarray(self.normal)


@dataclass(frozen=True)
class PointCharge:
    q: float
    position: tuple[float, float, float]

    def __post_init__(self):
        _check_finite("q", self.q)
        object.__setattr__(self, "position", _vec3(self.position, "position"))


@dataclass(frozen=True)
class World:
    """The plate plus any auxiliary point charges. eps0 is not configurable."""

    plate: ChargedPlate
    extra_charges: tuple[PointCharge, ...] = ()
    epsilon0: float = field(default=EPSILON0, init=False)

    def __post_init__(self):
        object.__setattr__(self, "extra_charges", tuple(self.extra_charges))

    def with_charges(self, charges: Sequence[PointCharge]) -> "World":
        return World(self.plate, self.extra_charges + tuple(charges))


@dataclass(frozen=True)
class CenterlineGeometry:
    """Sensor location: standoff ``z`` below the plate, signed offset ``r`` along its centerline."""

    z: float
    r: float = 0.0

    def __post_init__(self):
        _check_finite("z", self.z)
        _check_finite("r", self.r)
        if self.z <= 0:
            raise ValueError(f"z must be > 0, got {self.z}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint-rule grid: ``n`` x ``n`` cells, with an optional check against ``2n``."""

    n: int = 256
    refine_check: bool = True
    refine_tol: float = 1e-5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"quadrature grid needs n >= 2 per axis, got {self.n}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.n, False, self.refine_tol)


# --------------------------------------------------------------------------
# Centerline model
# --------------------------------------------------------------------------

def centerline_shape(geom: CenterlineGeometry, plate_side: float):
    """Potential per unit surface charge density along the centerline, ``g(r)``.

    Evaluated with ``|r|`` so the profile is symmetric about the plate center;
    at ``r = 0`` the arctan is replaced by its limit ``pi/2``, giving
    ``g(0) = z / (2 eps0)``. ``geom.r`` may be an array.

    Returns
    -------
    float or ndarray
        g(r) in V / (C/m^2).
    """
    _check_finite("plate_side", plate_side)
    if plate_side <= 0:
        raise ValueError(f"plate side must be > 0, got {plate_side}")
    z = geom.z
    a2 = plate_side * plate_side
    r = np.abs(np.asarray(geom.r, dtype=float))
    with np.errstate(divide="ignore", over="ignore"):
        arg = a2 / (4.0 * r * np.sqrt(a2 + r * r))
    # arctan(inf) is exactly pi/2, which is the r -> 0 limit
    g = z / (math.pi * EPSILON0) * np.arctan(arg)
    return float(g) if g.ndim == 0 else g


def centerline_potential(geom: CenterlineGeometry, plate: ChargedPlate):
    """Centerline potential ``sigma * g(r)`` in volts."""
    return plate.sigma * centerline_shape(geom, plate.side_a)


def centerline_shape_at(r, z: float, plate_side: float):
    """Array-friendly shorthand for ``centerline_shape(CenterlineGeometry(z), ...)`` at radii ``r``."""
    return centerline_shape(CenterlineGeometry(z, np.asarray(r, dtype=float)), plate_side)


# --------------------------------------------------------------------------
# Quadrature model
# --------------------------------------------------------------------------

def _midpoints(side: float, n: int) -> np.ndarray:
    h = side / n
    return -side / 2 + h * (np.arange(n) + 0.5)


def _row_sums(kernel, xs: np.ndarray, ys: np.ndarray, chunk: int = 256) -> np.ndarray:
    # per-row sums are chunk-size independent, so the final np.sum is reproducible
    out = np.empty(xs.size)
    for start in range(0, xs.size, chunk):
        block = xs[start:start + chunk, None]
        out[start:start + chunk] = kernel(block, ys[None, :]).sum(axis=1)
    return out


def point_charge_potential(point, charges: Sequence[PointCharge]) -> float:
    """Coulomb potential at ``point`` from a set of point charges."""
    p = np.asarray(_vec3(point, "point"))
    total = 0.0
    for c in charges:
        d = np.linalg.norm(p - np.asarray(c.position))
        if d == 0.0:
            raise ValueError(f"evaluation point coincides with a point charge at {c.position}")
        total += COULOMB_K * c.q / d
    return total


def plate_local_coords(point, plate: ChargedPlate) -> tuple[float, float, float]:
    """(u, v, w) of ``point`` in the plate frame; w is the signed normal distance."""
    u, v = plate.in_plane_axes()
    d = np.asarray(_vec3(point, "point")) - np.asarray(plate.center)
    return float(d @ u), float(d @ v), float(d @ np.asarray(plate.normal))


def _plate_potential(pu: float, pv: float, pw: float, plate: ChargedPlate, n: int) -> float:
    if plate.sigma == 0.0:
        return 0.0
    s = _midpoints(plate.side_a, n)
    h = plate.side_a / n
    w2 = pw * pw

    def kernel(x, y):
        return 1.0 / np.sqrt((pu - x) ** 2 + (pv - y) ** 2 + w2)

    return plate.sigma * COULOMB_K * h * h * float(np.sum(_row_sums(kernel, s, s)))


def _check_refinement(coarse: float, fine: float, quad: QuadratureSpec) -> None:
    change = abs(fine - coarse) / abs(fine)
    if change > quad.refine_tol:
        warnings.warn(
            f"quadrature changed by {change:.2e} (> {quad.refine_tol:g}) between n={quad.n} and n={2 * quad.n}",
            QuadratureWarning,
            stacklevel=3,
        )


def integral_potential(point, world: World, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Potential at ``point`` by midpoint quadrature over the plate plus point-charge terms.

    Raises ``ValueError`` for points within ``EXCLUSION_BAND`` of the plate
    surface. With ``quad.refine_check`` the result is recomputed on the doubled
    grid and a ``QuadratureWarning`` is issued if the relative change exceeds
    ``quad.refine_tol``.
    """
    plate = world.plate
    pu, pv, pw = plate_local_coords(point, plate)
    half = plate.side_a / 2
    if abs(pu) <= half and abs(pv) <= half and abs(pw) <= EXCLUSION_BAND:
        raise ValueError(f"point {tuple(point)} lies on the plate (|w| = {abs(pw):.3g} m)")

    v_plate = _plate_potential(pu, pv, pw, plate, quad.n)
    if quad.refine_check and v_plate != 0.0:
        _check_refinement(v_plate, _plate_potential(pu, pv, pw, plate, 2 * quad.n), quad)
    return v_plate + point_charge_potential(point, world.extra_charges)


def integral_field_axial(z: float, plate: ChargedPlate, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Normal field component on the plate axis at distance ``z``, by midpoint quadrature (V/m)."""
    _check_finite("z", z)
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z}")
    if plate.sigma == 0.0:
        return 0.0
    value = _axial_field(z, plate, quad.n)
    if quad.refine_check:
        _check_refinement(value, _axial_field(z, plate, 2 * quad.n), quad)
    return value


def _axial_field(z: float, plate: ChargedPlate, n: int) -> float:
    s = _midpoints(plate.side_a, n)
    h = plate.side_a / n
    z2 = z * z

    def kernel(x, y):
        rho2 = x * x + y * y + z2
        return z / (rho2 * np.sqrt(rho2))

    return plate.sigma * COULOMB_K * h * h * float(np.sum(_row_sums(kernel, s, s)))


def solid_angle_field_axial(z: float, plate: ChargedPlate) -> float:
    """Closed-form axial field of a uniformly charged square: ``sigma * Omega / (4 pi eps0)``."""
    if z <= 0:
        raise ValueError(f"z must be > 0, got {z}")
    a = plate.side_a
    return plate.sigma / (math.pi * EPSILON0) * math.atan(a * a / (4 * z * math.sqrt(z * z + a * a / 2)))


@dataclass(frozen=True)
class RefinementStep:
    n: int
    value: float
    change: float  # |value - previous value|, nan for the first level
    order: float  # log2 of the ratio of successive changes, nan until available


def refinement_table(evaluate, n0: int = 16, levels: int = 6) -> list[RefinementStep]:
    """Evaluate ``evaluate(QuadratureSpec(n))`` on successively doubled grids.

    For a second-order rule the successive changes shrink by ~4 per doubling,
    i.e. ``order`` approaches 2.
    """
    steps: list[RefinementStep] = []
    prev_value = prev_change = math.nan
    n = n0
    for _ in range(levels):
        value = evaluate(QuadratureSpec(n, refine_check=False))
        change = abs(value - prev_value) if steps else math.nan
        order = math.log2(prev_change / change) if len(steps) >= 2 and change > 0 else math.nan
        steps.append(RefinementStep(n, value, change, order))
        prev_value, prev_change = value, change
        n *= 2
    return steps
