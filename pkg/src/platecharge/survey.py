"""
Measurement campaigns and the record interchange format.

Every reading draws from its own random stream, derived by hashing the
campaign seed together with the labels of the cell it belongs to. Records are
therefore independent of execution order, and two cells that differ only in
motor or wheel state see the same random draws.

Two streams are used per cell: one keyed with the platform kind (placement
jitter and carrier distortion) and one without it (field mill noise). A robot
and a handheld survey run with the same seed therefore share the instrument
noise but not the placement errors.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fields import CenterlineGeometry, World
from .instrument import (
    DEFAULT_MOUNTS,
    DEFAULT_WHEEL_CHARGE,
    Condition,
    MountLabel,
    MountPosition,
    PlatformKind,
    PlatformModel,
    SensorConfig,
    sensor_read,
    true_potential_at_sensor,
)

CSV_HEADER = ("platform", "mount", "position", "r_m", "run", "motor_on", "wheels_charged", "reading_V", "seed")
CENTER_LABEL = "CENTER"


class RecordFormatError(ValueError):
    """A survey CSV row that does not conform to the schema."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


def substream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for ``(seed, *labels)``; stable across runs and platforms."""
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    key = "\x1f".join(str(getattr(x, "value", x)) for x in labels).encode()
    words = np.frombuffer(hashlib.blake2b(key, digest_size=16).digest(), dtype="<u4")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, words)]))


@dataclass(frozen=True)
class TransectPlan:
    labels: tuple[str, ...] = ("A", "B", "C", "D", "E")
    r_values: tuple[float, ...] = (-0.4, -0.2, 0.0, 0.2, 0.4)
    z: float = 0.462
    runs: int = 5

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "r_values", tuple(float(x) for x in self.r_values))
        if len(self.labels) != len(self.r_values):
            raise ValueError("labels and r_values must have the same length")
        if len(self.labels) < 2:
            raise ValueError("a transect needs at least two positions")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("position labels must be unique")
        if not all(math.isfinite(r) for r in self.r_values):
            raise ValueError("r_values must be finite")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not self.z > 0:
            raise ValueError(f"z must be > 0, got {self.z}")


@dataclass(frozen=True)
class FactorialPlan:
    mounts: tuple[MountLabel, ...] = tuple(MountLabel)
    motor_states: tuple[bool, ...] = (False, True)
    wheel_states: tuple[bool, ...] = (False, True)
    repeats: int = 5
    geometry: CenterlineGeometry = field(default_factory=lambda: CenterlineGeometry(0.462, 0.0))
    wheel_charge_q: float = DEFAULT_WHEEL_CHARGE

    def __post_init__(self):
        object.__setattr__(self, "mounts", tuple(MountLabel(m) for m in self.mounts))
        object.__setattr__(self, "motor_states", tuple(bool(x) for x in self.motor_states))
        object.__setattr__(self, "wheel_states", tuple(bool(x) for x in self.wheel_states))
        if not (self.mounts and self.motor_states and self.wheel_states):
            raise ValueError("mounts, motor_states and wheel_states must be non-empty")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")


@dataclass(frozen=True)
class MeasurementRecord:
    platform: PlatformKind
    mount_label: MountLabel | None
    position_label: str
    r: float
    run: int
    motor_on: bool
    wheels_charged: bool
    reading: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "platform", PlatformKind(self.platform))
        if self.mount_label is not None:
            object.__setattr__(self, "mount_label", MountLabel(self.mount_label))
        if not math.isfinite(self.reading):
            raise ValueError(f"reading must be finite, got {self.reading}")
        if self.run < 0:
            raise ValueError(f"run must be >= 0, got {self.run}")

    def sort_key(self):
        mount = self.mount_label.value if self.mount_label else ""
        return (self.platform.value, mount, self.position_label, self.run, self.motor_on, self.wheels_charged)


def _measure(platform, geom, condition, world, sensor, seed, platform_key, sensor_key) -> float:
    exposure = true_potential_at_sensor(
        platform, geom, condition, world, substream(seed, *platform_key)
    )
    motor_sigma = platform.motor_emi_sigma if condition.motor_on else 0.0
    return sensor_read(exposure, sensor, motor_sigma, substream(seed, *sensor_key))


def _transect(plan: TransectPlan, platform: PlatformModel, sensor: SensorConfig, world: World, seed: int):
    mount = platform.mount.label if platform.mount else None
    records = []
    for run, (label, r) in itertools.product(range(plan.runs), zip(plan.labels, plan.r_values)):
        reading = _measure(
            platform,
            CenterlineGeometry(plan.z, r),
            Condition(),
            world,
            sensor,
            seed,
            ("transect", platform.kind, label, run),
            ("transect", label, run),
        )
        records.append(MeasurementRecord(platform.kind, mount, label, r, run, False, False, reading, seed))
    return sorted(records, key=MeasurementRecord.sort_key)


def run_transect(
    plan: TransectPlan, platform: PlatformModel, sensor: SensorConfig, world: World, seed: int
) -> list[MeasurementRecord]:
    """Stop-and-measure survey along the centerline: ``runs`` readings at each position."""
    return _transect(plan, platform, sensor, world, seed)


def run_factorial(
    plan: FactorialPlan,
    robot: PlatformModel,
    sensor: SensorConfig,
    world: World,
    seed: int,
    mount_table: Mapping[MountLabel, MountPosition] = DEFAULT_MOUNTS,
) -> list[MeasurementRecord]:
    """Mount x motor x wheel x repeat experiment under a fixed sensor location.

    Cells that differ only in motor or wheel state share random streams, so
    their differences isolate the effect of the condition.
    """
    if robot.kind is not PlatformKind.ROBOT:
        raise ValueError("run_factorial needs a ROBOT platform; use handheld_reference for the handheld")
    geom = plan.geometry
    records = []
    cells = itertools.product(plan.mounts, plan.motor_states, plan.wheel_states, range(plan.repeats))
    for label, motor_on, wheels, repeat in cells:
        platform = robot.with_mount(mount_table[label])
        condition = Condition(motor_on, wheels, plan.wheel_charge_q if wheels else 0.0)
        reading = _measure(
            platform,
            geom,
            condition,
            world,
            sensor,
            seed,
            ("factorial", PlatformKind.ROBOT, label, repeat),
            ("factorial", label, repeat),
        )
        records.append(
            MeasurementRecord(PlatformKind.ROBOT, label, CENTER_LABEL, geom.r, repeat, motor_on, wheels, reading, seed)
        )
    return sorted(records, key=MeasurementRecord.sort_key)


def handheld_reference(
    plan: FactorialPlan | TransectPlan | None,
    handheld: PlatformModel,
    sensor: SensorConfig,
    world: World,
    seed: int,
) -> list[MeasurementRecord]:
    """Comparison readings with the mill held at arm's length.

    For a transect plan this is the same survey as :func:`run_transect`. For a
    factorial plan it is ``repeats`` readings at the plan's fixed location
    (motor and wheel states do not apply). ``None`` gives no records.
    """
    if handheld.kind is not PlatformKind.HANDHELD:
        raise ValueError("handheld_reference needs a HANDHELD platform")
    if plan is None:
        return []
    if isinstance(plan, TransectPlan):
        return _transect(plan, handheld, sensor, world, seed)
    geom = plan.geometry
    records = []
    for repeat in range(plan.repeats):
        reading = _measure(
            handheld,
            geom,
            Condition(),
            world,
            sensor,
            seed,
            ("factorial", PlatformKind.HANDHELD, CENTER_LABEL, repeat),
            ("factorial", CENTER_LABEL, repeat),
        )
        records.append(
            MeasurementRecord(PlatformKind.HANDHELD, None, CENTER_LABEL, geom.r, repeat, False, False, reading, seed)
        )
    return records


# --------------------------------------------------------------------------
# CSV interchange
# --------------------------------------------------------------------------

def _bool_text(x: bool) -> str:
    return "true" if x else "false"


def records_to_csv(records: Iterable[MeasurementRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([
            rec.platform.value,
            rec.mount_label.value if rec.mount_label else "",
            rec.position_label,
            repr(float(rec.r)),
            rec.run,
            _bool_text(rec.motor_on),
            _bool_text(rec.wheels_charged),
            repr(float(rec.reading)),
            rec.seed,
        ])
    return buf.getvalue()


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records_csv(path: str | os.PathLike, records: Sequence[MeasurementRecord]) -> None:
    atomic_write_text(path, records_to_csv(records))


_BOOLS = {"true": True, "false": False, "1": True, "0": False}


def _parse_row(row: list[str], lineno: int) -> MeasurementRecord:
    if len(row) != len(CSV_HEADER):
        raise RecordFormatError(lineno, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
    platform, mount, position, r, run, motor, wheels, reading, seed = row
    try:
        kind = PlatformKind(platform)
        mount_label = MountLabel(mount) if mount else None
        if not position:
            raise ValueError("empty position label")
        if motor not in _BOOLS or wheels not in _BOOLS:
            raise ValueError("motor_on/wheels_charged must be true or false")
        r_val, reading_val = float(r), float(reading)
        if not math.isfinite(r_val):
            raise ValueError(f"r_m must be finite, got {r}")
        return MeasurementRecord(
            kind, mount_label, position, r_val, int(run), _BOOLS[motor], _BOOLS[wheels], reading_val, int(seed)
        )
    except ValueError as exc:
        raise RecordFormatError(lineno, str(exc)) from None


def parse_records_csv(text: str) -> list[MeasurementRecord]:
    """Parse survey CSV text; line numbers in errors count the header as line 1."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise RecordFormatError(1, "empty file (missing header)") from None
    if tuple(header) != CSV_HEADER:
        raise RecordFormatError(1, f"header must be {','.join(CSV_HEADER)}")
    return [_parse_row(row, reader.line_num) for row in reader if row]


def read_records_csv(path: str | os.PathLike) -> list[MeasurementRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_records_csv(fh.read())
