"""Scenario configuration and its flat ``key = value`` file format.

Lines look like ``frequency_hz = 642e6``; ``#`` starts a comment. Keys that
are absent take the defaults below, which follow the reference parameter
table where it gives a value.
"""
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .errors import ParseError, ValidationError
from .mobility import MobilityModel
from .rf import wavelength

SENSITIVITY_MODES = ("aggregate", "per_actor")


@dataclass(frozen=True)
class ScenarioConfig:
    # region and population
    area_m2: float = 200.0
    region_side_m: Optional[float] = None
    n_sensors: Optional[int] = None
    sensor_density: float = 0.5
    n_actors: int = 10
    n_eps: int = 10
    ep_coords: Optional[tuple] = None
    # radio
    min_required_power_dbm: float = -5.0
    max_tx_power_dbm: float = 36.0
    frequency_hz: float = 915e6
    sensitivity_mode: str = "aggregate"
    harvest_trace: Optional[str] = None
    radiation_duty: float = 1.0
    # actors
    mobility_model: str = "mobile_cm"
    actor_speed_mps: float = 2.0
    motion_coefficient: float = 0.05
    motion_exponent: float = 1.5
    # sensors
    consume_probability: float = 1 / 30
    sensor_capacity_j: float = 10.0
    sensor_initial_j: float = 5.0
    active_power_w: float = 0.024
    alive_threshold_j: float = 0.0
    revival: bool = True
    revive_threshold_j: float = 0.5
    # engine
    slot_seconds: float = 1.0
    sensing_radius_m: float = 5.0
    grid_resolution_m: float = 0.25
    coverage_stop_fraction: float = 0.5
    max_slots: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        validate(self)

    @property
    def side(self):
        if self.region_side_m is not None:
            return float(self.region_side_m)
        return math.sqrt(self.area_m2)

    @property
    def region_area(self):
        return self.side ** 2

    @property
    def sensor_count(self):
        if self.n_sensors is not None:
            return int(self.n_sensors)
        return max(1, int(round(self.sensor_density * self.region_area)))

    @property
    def event_count(self):
        return len(self.ep_coords) if self.ep_coords is not None else self.n_eps

    @property
    def model(self):
        return MobilityModel.parse(self.mobility_model)

    def with_(self, **changes):
        return replace(self, **changes)


FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_INT_KEYS = {"n_sensors", "n_actors", "n_eps", "max_slots", "seed"}
_BOOL_KEYS = {"revival"}
_STR_KEYS = {"sensitivity_mode", "harvest_trace", "mobility_model"}
_OPTIONAL = {"region_side_m", "n_sensors", "ep_coords", "harvest_trace"}


def _positive(cfg, *names):
    for name in names:
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValidationError(name, f"must be a positive number, got {v!r}")


def validate(cfg):
    _positive(cfg, "area_m2", "sensor_density", "frequency_hz", "slot_seconds", "sensing_radius_m",
              "grid_resolution_m", "sensor_capacity_j", "active_power_w", "motion_coefficient",
              "motion_exponent", "max_slots")
    if cfg.region_side_m is not None:
        _positive(cfg, "region_side_m")
    if cfg.n_sensors is not None and cfg.n_sensors < 1:
        raise ValidationError("n_sensors", "must be >= 1")
    if cfg.n_actors < 0:
        raise ValidationError("n_actors", "must be >= 0")
    if cfg.ep_coords is None and cfg.n_eps < 1:
        raise ValidationError("n_eps", "must be >= 1")
    if cfg.ep_coords is not None:
        if len(cfg.ep_coords) < 1:
            raise ValidationError("ep_coords", "must list at least one point")
        side = cfg.side
        for x, y in cfg.ep_coords:
            if not (0 <= x <= side and 0 <= y <= side):
                raise ValidationError("ep_coords", f"({x}, {y}) lies outside the region")
    if not 0.0 <= cfg.consume_probability <= 1.0:
        raise ValidationError("consume_probability", "must lie in [0, 1]")
    if not 0.0 <= cfg.radiation_duty <= 1.0:
        raise ValidationError("radiation_duty", "must lie in [0, 1]")
    if not 0.0 <= cfg.coverage_stop_fraction <= 1.0:
        raise ValidationError("coverage_stop_fraction", "must lie in [0, 1]")
    if not 0.0 <= cfg.sensor_initial_j <= cfg.sensor_capacity_j:
        raise ValidationError("sensor_initial_j", "must lie in [0, sensor_capacity_j]")
    if cfg.actor_speed_mps < 0:
        raise ValidationError("actor_speed_mps", "must be >= 0")
    if cfg.alive_threshold_j < 0:
        raise ValidationError("alive_threshold_j", "must be >= 0")
    if cfg.revive_threshold_j <= cfg.alive_threshold_j:
        raise ValidationError("revive_threshold_j", "must exceed alive_threshold_j")
    if cfg.sensitivity_mode not in SENSITIVITY_MODES:
        raise ValidationError("sensitivity_mode", f"must be one of {', '.join(SENSITIVITY_MODES)}")
    try:
        MobilityModel.parse(cfg.mobility_model)
    except ValueError as exc:
        raise ValidationError("mobility_model", str(exc)) from None


def parse_ep_coords(text):
    """``"x1:y1; x2:y2"`` -> ((x1, y1), (x2, y2))."""
    pts = []
    for chunk in text.replace(",", ";").split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split(":")
        pts.append((float(x), float(y)))
    return tuple(pts)


def format_ep_coords(pts):
    return "; ".join(f"{x!r}:{y!r}" for x, y in pts)


def parse_value(key, text):
    """Convert the text of one config value; raises ValueError on bad input."""
    text = text.strip()
    if key in _OPTIONAL and text.lower() in ("", "none"):
        return None
    if key == "ep_coords":
        return parse_ep_coords(text)
    if key in _BOOL_KEYS:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected on/off, got {text!r}")
    if key in _STR_KEYS:
        return text
    if key in _INT_KEYS:
        v = float(text)
        if v != int(v):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(v)
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def coerce_overrides(overrides):
    out = {}
    for key, value in (overrides or {}).items():
        key = key.replace("-", "_")
        if key not in FIELD_TYPES:
            raise ValidationError(key, "unknown configuration key")
        if isinstance(value, str):
            try:
                value = parse_value(key, value)
            except ValueError as exc:
                raise ValidationError(key, str(exc)) from None
        out[key] = value
    return out


def parse_config_text(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_TYPES:
            raise ParseError(lineno, f"unknown key {key!r}")
        try:
            values[key] = parse_value(key, value)
        except ValueError as exc:
            raise ParseError(lineno, f"{key}: {exc}") from None
    return values


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    values.update(coerce_overrides(overrides))
    return ScenarioConfig(**values)


def dump_config(cfg):
    """Serialise every field so that :func:`load_config` reproduces ``cfg``."""
    lines = []
    for key, value in asdict(cfg).items():
        if value is None:
            text = "none"
        elif key == "ep_coords":
            text = format_ep_coords(value)
        elif isinstance(value, bool):
            text = "on" if value else "off"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def echo_config(cfg):
    """Effective configuration plus a few derived quantities, for humans."""
    derived = [
        f"# region side = {cfg.side:.3f} m",
        f"# sensors = {cfg.sensor_count}",
        f"# wavelength = {wavelength(cfg.frequency_hz):.3f} m",
    ]
    return dump_config(cfg) + "\n".join(derived) + "\n"
