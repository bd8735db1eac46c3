"""Sensors, actors and event points plus their per-slot energy updates.

The update functions return new objects and leave their inputs untouched.
They are the readable reference for the physics; the simulation engine runs
the same arithmetic on whole arrays at once.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional


from . import rf
from .geometry import Path, Point

MIN_RANGE = 0.1  # m, keeps Friis finite when an actor sits on an event point


@dataclass(frozen=True)
class EventPoint:
    id: int
    position: Point
    min_required_power_dbm: float = -5.0


@dataclass(frozen=True)
class EnergyModel:
    """Energy constants shared by every entity in a run.

    Only the motion law (0.05 W at 1 m/s, exponent 1.5) and the 36 dBm cap
    come from the measured platform; the sensor figures are configurable
    defaults for a Mica2-class mote.
    """
    active_power_w: float = 0.024
    slot_seconds: float = 1.0
    max_tx_power_dbm: float = 36.0
    motion_coefficient: float = 0.05
    motion_exponent: float = 1.5
    revival: bool = True
    revive_threshold_j: float = 0.5
    radiation_duty: float = 1.0
    min_range_m: float = MIN_RANGE

    def __post_init__(self):
        for name in ("active_power_w", "slot_seconds", "motion_coefficient", "motion_exponent",
                     "min_range_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.radiation_duty <= 1.0:
            raise ValueError("radiation_duty must lie in [0, 1]")


@dataclass(frozen=True)
class Sensor:
    id: int
    position: Point
    stored_energy: float = 5.0
    capacity: float = 10.0
    alive_threshold: float = 0.0
    consume_probability: float = 1 / 30
    alive: bool = True

    def __post_init__(self):
        if not 0.0 <= self.stored_energy <= self.capacity:
            raise ValueError(f"sensor {self.id}: stored energy outside [0, capacity]")
        if not 0.0 <= self.consume_probability <= 1.0:
            raise ValueError(f"sensor {self.id}: consume probability outside [0, 1]")


@dataclass(frozen=True)
class Actor:
    id: int
    position: Point
    speed: float = 2.0
    path: Optional[Path] = None
    arc_offset: float = 0.0
    tx_power_dbm: float = -math.inf
    motion_energy: float = 0.0
    tx_energy: float = 0.0

    @property
    def mobile(self):
        return self.path is not None and self.speed > 0

    @property
    def consumed_energy(self):
        return self.motion_energy + self.tx_energy


def motion_power(speed, model=EnergyModel()):
    """Mechanical power in watts drawn while moving at ``speed`` m/s."""
    if speed < 0:
        raise ValueError("speed must be non-negative")
    return model.motion_coefficient * speed ** model.motion_exponent


def nearest_event_point(position, eps):
    best, best_d = None, math.inf
    for ep in eps:
        d = math.dist(position, ep.position)
        if d < best_d:
            best, best_d = ep, d
    return best, best_d


def select_tx_power(actor, eps, freq_hz, model=EnergyModel()):
    """Just enough power to meet the nearest event point's requirement."""
    if not eps:
        raise ValueError("need at least one event point")
    ep, r = nearest_event_point(actor.position, eps)
    r = max(r, model.min_range_m)
    return rf.required_tx_power(ep.min_required_power_dbm, r, freq_hz, model.max_tx_power_dbm).dbm


def radiated_watts(actor, model=EnergyModel()):
    if actor.tx_power_dbm == -math.inf:
        return 0.0
    return rf.dbm_to_watts(actor.tx_power_dbm) * model.radiation_duty


def incident_power(sensor, actors, freq_hz, model=EnergyModel(), curve=None, per_actor_floor=False):
    """Total RF power in watts arriving at ``sensor`` from ``actors``.

    With ``per_actor_floor`` each contribution below the harvester floor is
    discarded before summing.
    """
    total = 0.0
    for a in actors:
        r = max(math.dist(sensor.position, a.position), model.min_range_m)
        p = rf.friis_received(radiated_watts(a, model), freq_hz, r)
        if per_actor_floor and p > 0:
            floor = curve.floor_dbm if curve is not None else rf.SENSITIVITY_FLOOR_DBM
            if rf.watts_to_dbm(p) < floor:
                continue
        total += p
    return total


def _update_alive(sensor, energy, model):
    alive = sensor.alive
    if alive and energy <= sensor.alive_threshold:
        alive = False
    elif not alive and model.revival and energy >= model.revive_threshold_j:
        alive = True
    return alive


def sensor_charge_step(sensor, actors, freq_hz, curve=None, model=EnergyModel(),
                       sensitivity_mode="aggregate"):
    """Add one slot of harvested energy. Dead sensors charge too and come
    back once they reach the revive threshold."""
    if not actors:
        return sensor
    curve = curve or rf.HarvestCurve()
    incident = incident_power(sensor, actors, freq_hz, model, curve,
                              per_actor_floor=sensitivity_mode == "per_actor")
    gained = rf.harvested_from_watts(curve, incident) * model.slot_seconds
    if gained <= 0:
        return sensor
    energy = min(sensor.capacity, sensor.stored_energy + gained)
    return replace(sensor, stored_energy=energy, alive=_update_alive(sensor, energy, model))


def sensor_consume_step(sensor, rng, model=EnergyModel(), draw=None):
    """Bernoulli duty cycle: awake with ``consume_probability`` this slot.

    A uniform is drawn for every sensor, dead or alive, so the random stream
    does not depend on the network state. Dead sensors are powered off and
    draw nothing.
    """
    u = rng.random() if draw is None else draw
    if not sensor.alive or u >= sensor.consume_probability:
        return sensor
    energy = max(0.0, sensor.stored_energy - model.active_power_w * model.slot_seconds)
    return replace(sensor, stored_energy=energy, alive=_update_alive(sensor, energy, model))


def advance_actor(actor, model=EnergyModel()):
    """Move a mobile actor one slot along its path and bill the motion."""
    if not actor.mobile:
        return actor
    arc = actor.arc_offset + actor.speed * model.slot_seconds
    return replace(
        actor,
        arc_offset=arc,
        position=actor.path.point_at(arc),
        motion_energy=actor.motion_energy + motion_power(actor.speed, model) * model.slot_seconds,
    )


def bill_transmission(actor, model=EnergyModel()):
    return replace(actor, tx_energy=actor.tx_energy + radiated_watts(actor, model) * model.slot_seconds)


def actor_step(actor, model=EnergyModel()):
    """Motion plus transmission bookkeeping for one slot at the current
    transmit power."""
    return bill_transmission(advance_actor(actor, model), model)
