"""
Run configuration: YAML document -> validated model objects.

User files are merged over ``data/default.yaml``, so a config only needs the
keys it changes. Errors carry the line of the offending key.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

import yaml

from .fields import CenterlineGeometry, ChargedPlate, World
from .instrument import MountLabel, MountPosition, PlatformKind, PlatformModel, SensorConfig
from .survey import FactorialPlan, TransectPlan

PC = 1e-12


class ConfigError(ValueError):
    def __init__(self, message: str, source: str = "<config>", line: int | None = None):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class RunConfig:
    world: World
    z: float
    sensor: SensorConfig
    robot: PlatformModel
    mount_table: Mapping[MountLabel, MountPosition]
    handheld: PlatformModel
    transect: TransectPlan
    factorial: FactorialPlan
    seed: int
    output_dir: Path
    fit_offset: bool = False

    @property
    def side_a(self) -> float:
        return self.world.plate.side_a


def default_document() -> dict:
    text = resources.files("platecharge").joinpath("data/default.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _line_map(node, path=(), out=None) -> dict[tuple, int]:
    """Map key paths to 1-based source lines from a composed YAML node tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = path + (key_node.value,)
            out[key] = key_node.start_mark.line + 1
            _line_map(value_node, key, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            out[path + (i,)] = item.start_mark.line + 1
            _line_map(item, path + (i,), out)
    return out


def _merge(base: dict, override: Mapping, lines, source, path=()) -> dict:
    for key, value in override.items():
        here = path + (key,)
        if key not in base:
            known = ", ".join(map(str, base))
            raise ConfigError(f"unknown key '{'.'.join(map(str, here))}' (expected one of: {known})",
                              source, lines.get(here))
        if isinstance(base[key], dict):
            if not isinstance(value, Mapping):
                raise ConfigError(f"'{'.'.join(map(str, here))}' must be a mapping", source, lines.get(here))
            _merge(base[key], value, lines, source, here)
        else:
            base[key] = value
    return base


class _Reader:
    """Typed access to the merged document with line-aware errors."""

    def __init__(self, doc: dict, lines: dict, source: str):
        self.doc, self.lines, self.source = doc, lines, source

    def fail(self, path: tuple, message: str):
        line = None
        for i in range(len(path), 0, -1):
            if path[:i] in self.lines:
                line = self.lines[path[:i]]
                break
        raise ConfigError(f"{'.'.join(map(str, path))}: {message}", self.source, line)

    def get(self, *path):
        node = self.doc
        for key in path:
            if isinstance(node, list) and isinstance(key, int) and key < len(node):
                node = node[key]
            elif isinstance(node, Mapping) and key in node:
                node = node[key]
            else:
                self.fail(path, "missing")
        return node

    def number(self, *path, minimum: float | None = None, strict: bool = False) -> float:
        value = self.get(*path)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(path, f"expected a finite number, got {value!r}")
        if minimum is not None and (value <= minimum if strict else value < minimum):
            self.fail(path, f"must be {'>' if strict else '>='} {minimum}, got {value}")
        return float(value)

    def integer(self, *path, minimum: int = 0) -> int:
        value = self.get(*path)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            self.fail(path, f"expected an integer >= {minimum}, got {value!r}")
        return value

    def vector(self, *path) -> tuple[float, float, float]:
        value = self.get(*path)
        if not isinstance(value, list) or len(value) != 3:
            self.fail(path, f"expected a list of 3 numbers, got {value!r}")
        return tuple(self.number(*path, i) for i in range(3))

    def bools(self, *path) -> tuple[bool, ...]:
        value = self.get(*path)
        if not isinstance(value, list) or not value or not all(isinstance(v, bool) for v in value):
            self.fail(path, f"expected a non-empty list of true/false, got {value!r}")
        return tuple(value)

    def build(self, path: tuple, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except (ValueError, KeyError, TypeError) as exc:
            self.fail(path, str(exc))


def _mount_label(rd: _Reader, path, value) -> MountLabel:
    try:
        return MountLabel(value)
    except ValueError:
        rd.fail(path, f"unknown mount {value!r} (expected one of {[m.value for m in MountLabel]})")


def _build(rd: _Reader) -> RunConfig:
    side = rd.number("world", "side_a_m", minimum=0, strict=True)
    sigma = rd.number("world", "sigma_pC_m2") * PC
    z = rd.number("world", "z_m", minimum=0, strict=True)
    world = rd.build(("world",), lambda: World(ChargedPlate(side, sigma)))

    sensor = rd.build(
        ("sensor",),
        SensorConfig,
        rd.number("sensor", "gain", minimum=0, strict=True),
        rd.number("sensor", "noise_fraction", minimum=0),
        rd.number("sensor", "noise_floor_V", minimum=0),
        rd.number("sensor", "quantization_step_V", minimum=0),
    )

    mounts_doc = rd.get("robot", "mounts")
    if not isinstance(mounts_doc, Mapping):
        rd.fail(("robot", "mounts"), "must be a mapping of mount label to geometry")
    mount_table = {}
    for name in mounts_doc:
        path = ("robot", "mounts", name)
        label = _mount_label(rd, path, name)
        extra = set(mounts_doc[name]) - {"offset_m", "enhancement", "wheel_exposure"}
        if extra:
            rd.fail(path, f"unknown keys {sorted(extra)}")
        mount_table[label] = rd.build(
            path,
            MountPosition,
            label,
            rd.vector(*path, "offset_m"),
            rd.number(*path, "enhancement", minimum=0, strict=True),
            rd.number(*path, "wheel_exposure", minimum=0),
        )
    if set(mount_table) != set(MountLabel):
        rd.fail(("robot", "mounts"), f"all four mounts must be defined, got {sorted(m.value for m in mount_table)}")

    wheels_doc = rd.get("robot", "wheel_positions_m")
    if not isinstance(wheels_doc, list):
        rd.fail(("robot", "wheel_positions_m"), "expected a list of 3-vectors")
    wheels = tuple(rd.vector("robot", "wheel_positions_m", i) for i in range(len(wheels_doc)))
    robot_mount = _mount_label(rd, ("robot", "mount"), rd.get("robot", "mount"))
    robot = rd.build(
        ("robot",),
        PlatformModel,
        PlatformKind.ROBOT,
        mount_table[robot_mount],
        rd.number("robot", "position_jitter_m", minimum=0),
        rd.number("robot", "height_jitter_m", minimum=0),
        wheels,
        rd.number("robot", "motor_emi_sigma_V", minimum=0),
        rd.number("robot", "coupling_noise", minimum=0),
    )
    handheld = rd.build(
        ("handheld",),
        PlatformModel.handheld,
        position_jitter=rd.number("handheld", "position_jitter_m", minimum=0),
        height_jitter=rd.number("handheld", "height_jitter_m", minimum=0),
        coupling_noise=rd.number("handheld", "coupling_noise", minimum=0),
    )

    labels = rd.get("transect", "labels")
    r_doc = rd.get("transect", "r_m")
    if not isinstance(labels, list) or not isinstance(r_doc, list):
        rd.fail(("transect",), "labels and r_m must be lists")
    r_values = tuple(rd.number("transect", "r_m", i) for i in range(len(r_doc)))
    transect = rd.build(
        ("transect",), TransectPlan, tuple(str(x) for x in labels), r_values, z, rd.integer("transect", "runs", minimum=1)
    )

    fmounts = rd.get("factorial", "mounts")
    if not isinstance(fmounts, list) or not fmounts:
        rd.fail(("factorial", "mounts"), "expected a non-empty list of mount labels")
    factorial = rd.build(
        ("factorial",),
        FactorialPlan,
        tuple(_mount_label(rd, ("factorial", "mounts", i), m) for i, m in enumerate(fmounts)),
        rd.bools("factorial", "motor_states"),
        rd.bools("factorial", "wheel_states"),
        rd.integer("factorial", "repeats", minimum=1),
        CenterlineGeometry(z, 0.0),
        rd.number("robot", "wheel_charge_pC") * PC,
    )

    fit_offset = rd.get("fit", "fit_offset")
    if not isinstance(fit_offset, bool):
        rd.fail(("fit", "fit_offset"), "expected true or false")
    output_dir = rd.get("output_dir")
    if not isinstance(output_dir, str) or not output_dir:
        rd.fail(("output_dir",), "expected a non-empty path string")

    return RunConfig(
        world, z, sensor, robot, mount_table, handheld, transect, factorial,
        rd.integer("seed", minimum=0), Path(output_dir), fit_offset,
    )


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Validate a YAML config document (merged over the defaults)."""
    try:
        node = yaml.compose(text)
        user = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", source, line) from None
    lines = _line_map(node) if node is not None else {}
    if user is None:
        user = {}
    if not isinstance(user, Mapping):
        raise ConfigError("top level must be a mapping", source, 1)
    doc = _merge(copy.deepcopy(default_document()), user, lines, source)
    return _build(_Reader(doc, lines, source))


def load_config(path: str | Path | None = None) -> RunConfig:
    """Load ``path``, or the packaged defaults when ``path`` is None."""
    if path is None:
        return parse_config("", "<defaults>")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_config(text, str(path))
