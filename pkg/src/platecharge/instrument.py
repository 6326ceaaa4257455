"""
Field mill sensor and carrier platform models.

A reading is produced in two stages. :func:`true_potential_at_sensor` places
the sensor (with positional jitter and carrier distortion) and returns the
potential it is exposed to, including any wheel tribocharge. :func:`sensor_read`
then applies gain, noise and quantization.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import (
    CenterlineGeometry,
    PointCharge,
    World,
    _vec3,
    centerline_potential,
    point_charge_potential,
)


class PlatformKind(str, enum.Enum):
    ROBOT = "ROBOT"
    HANDHELD = "HANDHELD"


class MountLabel(str, enum.Enum):
    P1_FLUSH_FRONT = "P1_FLUSH_FRONT"
    P2_FRONT = "P2_FRONT"
    P3_BACK = "P3_BACK"
    P4_TOP = "P4_TOP"


@dataclass(frozen=True)
class SensorConfig:
    gain: float = 1.0
    noise_fraction: float = 0.10
    noise_floor: float = 0.005
    quantization_step: float = 0.0

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError(f"gain must be > 0, got {self.gain}")
        for name in ("noise_fraction", "noise_floor", "quantization_step"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @classmethod
    def noiseless(cls) -> "SensorConfig":
        return cls(gain=1.0, noise_fraction=0.0, noise_floor=0.0, quantization_step=0.0)


@dataclass(frozen=True)
class MountPosition:
    """Where the field mill sits on the chassis.

    ``offset`` is in the robot frame (x forward, z up, origin on the floor
    under the chassis center). ``enhancement`` scales the sensed plate
    potential. ``wheel_exposure`` is the fraction of the wheel-charge potential
    that reaches the aperture; mounts above the deck are screened by the
    chassis.
    """

    label: MountLabel
    offset: tuple[float, float, float]
    enhancement: float = 1.0
    wheel_exposure: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "label", MountLabel(self.label))
        object.__setattr__(self, "offset", _vec3(self.offset, "offset"))
        if not self.enhancement > 0:
            raise ValueError(f"enhancement must be > 0, got {self.enhancement}")
        if not 0 <= self.wheel_exposure <= 1:
            raise ValueError(f"wheel_exposure must be in [0, 1], got {self.wheel_exposure}")


DEFAULT_MOUNTS: dict[MountLabel, MountPosition] = {
    MountLabel.P1_FLUSH_FRONT: MountPosition(MountLabel.P1_FLUSH_FRONT, (0.20, 0.0, 0.05), 1.00, 1.00),
    MountLabel.P2_FRONT: MountPosition(MountLabel.P2_FRONT, (0.20, 0.0, 0.15), 1.00, 0.03),
    MountLabel.P3_BACK: MountPosition(MountLabel.P3_BACK, (-0.20, 0.0, 0.15), 0.95, 0.03),
    MountLabel.P4_TOP: MountPosition(MountLabel.P4_TOP, (0.0, 0.0, 0.30), 1.30, 0.03),
}

DEFAULT_WHEELS: tuple[tuple[float, float, float], ...] = (
    (0.15, 0.17, 0.03),
    (0.15, -0.17, 0.03),
    (-0.15, 0.17, 0.03),
    (-0.15, -0.17, 0.03),
)

DEFAULT_WHEEL_CHARGE = 15e-12  # C per wheel


@dataclass(frozen=True)
class PlatformModel:
    """A carrier for the field mill.

    ``position_jitter`` is the std-dev per horizontal axis and ``height_jitter``
    the vertical std-dev of the sensor placement (m). ``coupling_noise`` is the
    std-dev of a multiplicative distortion of the sensed plate potential by the
    carrier itself (operator's body for a handheld mill, chassis attitude for
    the robot).
    """

    kind: PlatformKind
    mount: MountPosition | None = None
    position_jitter: float = 0.0
    height_jitter: float = 0.0
    wheel_positions: tuple[tuple[float, float, float], ...] = ()
    motor_emi_sigma: float = 0.0
    coupling_noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PlatformKind(self.kind))
        object.__setattr__(self, "wheel_positions", tuple(_vec3(w, "wheel position") for w in self.wheel_positions))
        for name in ("position_jitter", "height_jitter", "motor_emi_sigma", "coupling_noise"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if self.kind is PlatformKind.HANDHELD:
            if self.mount is not None or self.wheel_positions:
                raise ValueError("a handheld platform has no mount and no wheels")
        elif self.mount is None:
            raise ValueError("a robot platform needs a mount position")

    @classmethod
    def robot(cls, mount: MountLabel | str = MountLabel.P2_FRONT, **kwargs) -> "PlatformModel":
        defaults = dict(
            position_jitter=0.005,
            height_jitter=0.005,
            wheel_positions=DEFAULT_WHEELS,
            coupling_noise=0.40,
        )
        defaults.update(kwargs)
        return cls(PlatformKind.ROBOT, DEFAULT_MOUNTS[MountLabel(mount)], **defaults)

    @classmethod
    def handheld(cls, **kwargs) -> "PlatformModel":
        defaults = dict(position_jitter=0.02, height_jitter=0.02, coupling_noise=0.65)
        defaults.update(kwargs)
        return cls(PlatformKind.HANDHELD, **defaults)

    def with_mount(self, mount: MountPosition) -> "PlatformModel":
        return replace(self, mount=mount)

    def quiet(self) -> "PlatformModel":
        """Same platform with every random perturbation switched off."""
        return replace(self, position_jitter=0.0, height_jitter=0.0, motor_emi_sigma=0.0, coupling_noise=0.0)


@dataclass(frozen=True)
class Condition:
    motor_on: bool = False
    wheels_charged: bool = False
    wheel_charge_q: float = field(default=0.0)

    def __post_init__(self):
        if not self.wheels_charged and self.wheel_charge_q != 0.0:
            raise ValueError("wheel_charge_q must be 0 when the wheels are not charged")
        if not math.isfinite(self.wheel_charge_q):
            raise ValueError("wheel_charge_q must be finite")

    @classmethod
    def charged(cls, motor_on: bool = False, q: float = DEFAULT_WHEEL_CHARGE) -> "Condition":
        return cls(motor_on, True, q)


def wheel_charges(platform: PlatformModel, sensor_point, q: float) -> list[PointCharge]:
    """World-frame wheel charges for a robot whose sensor sits at ``sensor_point``.

    The robot frame is taken parallel to the world frame.
    """
    origin = np.asarray(sensor_point, dtype=float) - np.asarray(platform.mount.offset)
    return [PointCharge(q, origin + np.asarray(w)) for w in platform.wheel_positions]


def true_potential_at_sensor(
    platform: PlatformModel,
    nominal: CenterlineGeometry,
    condition: Condition,
    world: World,
    rng: np.random.Generator,
) -> float:
    """Potential seen by the field mill aperture for one placement.

    Draws four normals from ``rng`` in a fixed order (dx, dy, dz, coupling) so
    that stream consumption does not depend on the platform or condition.
    """
    dx, dy, dz = rng.standard_normal(3)
    coupling = rng.standard_normal()

    r = nominal.r + platform.position_jitter * dx
    z = nominal.z + platform.height_jitter * dz
    if z <= 0:
        raise ValueError(f"jittered standoff became non-positive ({z:.4g} m)")
    geom = CenterlineGeometry(z, r)

    scale = platform.mount.enhancement if platform.kind is PlatformKind.ROBOT else 1.0
    potential = centerline_potential(geom, world.plate) * scale * (1.0 + platform.coupling_noise * coupling)

    # the centerline model ignores the cross-track offset; point sources do not
    point = world.plate.centerline_point(r, z) + world.plate.in_plane_axes()[1] * platform.position_jitter * dy
    if world.extra_charges:
        potential += point_charge_potential(point, world.extra_charges)
    if platform.kind is PlatformKind.ROBOT and condition.wheels_charged and condition.wheel_charge_q != 0.0:
        charges = wheel_charges(platform, point, condition.wheel_charge_q)
        potential += platform.mount.wheel_exposure * point_charge_potential(point, charges)
    return float(potential)


def sensor_read(
    true_potential: float,
    sensor: SensorConfig,
    motor_noise_sigma: float,
    rng: np.random.Generator,
) -> float:
    """Field mill output for a given exposure: gain, noise, then quantization.

    Always draws three normals (multiplicative, additive, motor EMI) so that a
    zero ``motor_noise_sigma`` leaves the stream, and the reading, unchanged.
    """
    if motor_noise_sigma < 0:
        raise ValueError(f"motor_noise_sigma must be >= 0, got {motor_noise_sigma}")
    e_mult, e_add, e_emi = rng.standard_normal(3)
    reading = (
        sensor.gain * true_potential * (1.0 + sensor.noise_fraction * e_mult)
        + sensor.noise_floor * e_add
        + motor_noise_sigma * e_emi
    )
    if sensor.quantization_step > 0:
        reading = sensor.quantization_step * round(reading / sensor.quantization_step)
    return float(reading)
