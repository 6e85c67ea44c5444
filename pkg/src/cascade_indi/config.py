"""Scenario configuration: a sectioned ``key = value`` text format.

Example::

    [scenario]
    name = hover-calm
    duration = 10.0
    controller = indi-nonlinear   # indi-linear | indi-nonlinear | pid

    [waypoints]
    # time = north, east, down
    0.0 = 0.0, 0.0, -1.0

Sections map onto dataclasses; every key must be known, values are parsed by
the type of the field's default.  ``[waypoints]`` and ``[maneuver]`` hold
time-keyed schedules; a ``[maneuver]`` entry overrides the position loop with
a fixed acceleration reference until the next entry (``off`` hands control
back to the position loop).
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, IndiError
from .sim.sensors import SensorModels
from .sim.vehicle import GRAVITY, VehicleParams
from .sim.wind import WindField

CONTROLLERS = ("indi-linear", "indi-nonlinear", "pid")
BUILTIN_DIR = Path(__file__).parent / "scenarios"


@dataclass
class ScenarioSection:
    name: str = "scenario"
    duration: float = 10.0
    seed: int = 0
    controller: str = "indi-nonlinear"
    adaptation: bool = False
    sample_rate: float = 512.0
    output: str = "out"

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {', '.join(CONTROLLERS)}")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ValueError("duration and sample_rate must be positive")


@dataclass
class GainsSection:
    k_eta: float = 10.7
    k_omega: float = 28.0
    k_xi: float = 0.70
    k_xidot: float = 0.15 * GRAVITY
    pid_p: float = 0.65
    pid_i: float = 0.05
    pid_d: float = 0.20
    pid_i_limit: float = 0.3

    def __post_init__(self):
        if min(self.k_eta, self.k_omega, self.k_xi, self.k_xidot) <= 0:
            raise ValueError("INDI gains must be positive")
        if min(self.pid_p, self.pid_i, self.pid_d, self.pid_i_limit) < 0:
            raise ValueError("PID gains must be non-negative")


@dataclass
class FilterSection:
    omega_n: float = 50.0
    zeta: float = 0.55
    bias_estimation: bool = True
    bias_omega_n: float = 0.25
    bias_zeta: float = 1.0

    def __post_init__(self):
        if min(self.omega_n, self.zeta, self.bias_omega_n, self.bias_zeta) <= 0:
            raise ValueError("filter parameters must be positive")


@dataclass
class ControlSection:
    attitude_limit: float = 0.7
    min_thrust: float = 0.5
    max_pitch: float = 1.3
    # mass assumed by the controllers; 0 means "same as the vehicle"
    model_mass: float = 0.0

    def __post_init__(self):
        if not 0 < self.attitude_limit < math.pi / 2:
            raise ValueError("attitude_limit must lie in (0, pi/2)")
        if self.model_mass < 0:
            raise ValueError("model_mass must be non-negative")


@dataclass
class InitialSection:
    position: tuple = (0.0, 0.0, -1.0)
    yaw: float = 0.0
    ground_contact: bool = False
    ground_level: float = 0.0


@dataclass
class EffectivenessSection:
    # empty tuples mean "derive from the vehicle parameters"
    g1: tuple = ()
    g2: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        for name in ("g1", "g2"):
            if len(getattr(self, name)) not in (0, 16):
                raise ValueError(f"{name} needs 16 row-major entries")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


@dataclass
class AdaptationSection:
    mu1_speed: float = 1e-3
    mu1_accel: float = 1e-4
    mu2: float = 1.0
    thrust_target: str = "curve"
    freeze_thrust_g2: bool = True

    def __post_init__(self):
        if self.thrust_target not in ("curve", "accelerometer"):
            raise ValueError("thrust_target must be 'curve' or 'accelerometer'")
        if min(self.mu1_speed, self.mu1_accel, self.mu2) < 0:
            raise ValueError("step sizes must be non-negative")


@dataclass
class StepSection:
    axis: str = "roll"
    magnitude: float = 0.1
    duration: float = 1.0

    def __post_init__(self):
        if self.axis not in ("roll", "pitch"):
            raise ValueError("step axis must be roll or pitch")


SECTIONS = {
    "scenario": ScenarioSection,
    "gains": GainsSection,
    "filter": FilterSection,
    "control": ControlSection,
    "vehicle": VehicleParams,
    "wind": WindField,
    "sensors": SensorModels,
    "initial": InitialSection,
    "effectiveness": EffectivenessSection,
    "adaptation": AdaptationSection,
    "step": StepSection,
}
SCHEDULES = ("waypoints", "maneuver")


@dataclass
class ScenarioConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    gains: GainsSection = field(default_factory=GainsSection)
    filter: FilterSection = field(default_factory=FilterSection)
    control: ControlSection = field(default_factory=ControlSection)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    wind: WindField = field(default_factory=WindField)
    sensors: SensorModels = field(default_factory=SensorModels)
    initial: InitialSection = field(default_factory=InitialSection)
    effectiveness: EffectivenessSection = field(default_factory=EffectivenessSection)
    adaptation: AdaptationSection = field(default_factory=AdaptationSection)
    step: StepSection = field(default_factory=StepSection)
    waypoints: list = field(default_factory=list)   # [(t, (n, e, d))]
    maneuver: list = field(default_factory=list)    # [(t, (ax, ay, az) | None)]

    @property
    def sample_time(self):
        return 1.0 / self.scenario.sample_rate

    @property
    def is_indi(self):
        return self.scenario.controller != "pid"

    def replace(self, **sections):
        """Copy with some sections' fields replaced, e.g. ``replace(scenario={'seed': 3})``."""
        kwargs = {}
        for f in dataclasses.fields(self):
            cur = getattr(self, f.name)
            if f.name in sections:
                new = sections[f.name]
                if isinstance(new, dict):
                    new = dataclasses.replace(cur, **new)
                kwargs[f.name] = new
            else:
                kwargs[f.name] = list(cur) if isinstance(cur, list) else dataclasses.replace(cur)
        return ScenarioConfig(**kwargs)

    def reference_at(self, t):
        return schedule_lookup(self.waypoints, t, tuple(self.initial.position))

    def maneuver_at(self, t):
        return schedule_lookup(self.maneuver, t, None)

    def waypoint_times(self):
        return [t for t, _ in self.waypoints]


def schedule_lookup(schedule, t, default):
    if not schedule:
        return default
    i = bisect_right([s[0] for s in schedule], t)
    return default if i == 0 else schedule[i - 1][1]


# ----------------------------------------------------------------------------
# text format
# ----------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^#=:\s][^=:]*?)\s*[=:]")


def _line_index(text):
    index, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), lineno)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip()), lineno)
    return index


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_format_value(float(v)) for v in value)
    return str(value)


def _parse_value(raw, default):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        if not raw:
            return ()
        return tuple(float(v) for v in raw.replace(",", " ").split())
    return raw


def _parse_vector(raw):
    vals = tuple(float(v) for v in raw.replace(",", " ").split())
    if len(vals) != 3:
        raise ValueError(f"expected three components, got {raw!r}")
    return vals


def parse_config(text, source="<config>") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), strict=True,
                                       default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before first [section] header", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", line=exc.lineno, key=exc.option) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line=lineno) from None

    lines = _line_index(text)
    built = {}
    for section in parser.sections():
        sec_line = lines.get((section, None))
        if section in SCHEDULES:
            built[section] = _parse_schedule(parser[section], section, lines)
            continue
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", line=sec_line)
        cls = SECTIONS[section]
        defaults = cls()
        known = {f.name: getattr(defaults, f.name) for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in parser[section].items():
            if key not in known:
                raise ConfigError(f"unknown key in [{section}]", line=lines.get((section, key)), key=key)
            try:
                values[key] = _parse_value(raw, known[key])
            except ValueError as exc:
                raise ConfigError(str(exc), line=lines.get((section, key)), key=key) from None
        try:
            built[section] = cls(**values)
        except (ValueError, IndiError) as exc:
            raise ConfigError(f"invalid [{section}]: {exc}", line=sec_line) from None
    try:
        return ScenarioConfig(**built)
    except (ValueError, IndiError) as exc:
        raise ConfigError(str(exc)) from None


def _parse_schedule(items, section, lines):
    out = []
    for key, raw in items.items():
        line = lines.get((section, key))
        try:
            t = float(key)
            if section == "maneuver" and raw.strip().lower() == "off":
                value = None
            else:
                value = _parse_vector(raw)
        except ValueError as exc:
            raise ConfigError(f"bad schedule entry: {exc}", line=line, key=key) from None
        out.append((t, value))
    out.sort(key=lambda e: e[0])
    return out


def format_config(cfg: ScenarioConfig) -> str:
    chunks = []
    for name in SECTIONS:
        sec = getattr(cfg, name)
        lines = [f"[{name}]"]
        for f in dataclasses.fields(sec):
            lines.append(f"{f.name} = {_format_value(getattr(sec, f.name))}")
        chunks.append("\n".join(lines))
    for name in SCHEDULES:
        sched = getattr(cfg, name)
        if not sched:
            continue
        lines = [f"[{name}]"]
        for t, value in sched:
            lines.append(f"{t!r} = {'off' if value is None else _format_value(value)}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def load_config(path) -> ScenarioConfig:
    """Load a config file; bare names fall back to the bundled scenarios."""
    p = Path(path)
    if not p.exists():
        for cand in (BUILTIN_DIR / p.name, BUILTIN_DIR / f"{p.name}.cfg"):
            if cand.exists():
                p = cand
                break
        else:
            raise ConfigError(f"config file not found: {path}")
    return parse_config(p.read_text(encoding="utf-8"), source=str(p))


def builtin_names():
    return sorted(p.stem for p in BUILTIN_DIR.glob("*.cfg"))
