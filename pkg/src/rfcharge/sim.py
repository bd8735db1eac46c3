"""Slotted simulation engine.

Every slot runs, in this order: actors move (paying motion energy), each
actor picks its transmit power against its nearest event point, sensors
harvest from the summed incident power, sensors run their duty-cycle draw,
and metrics are recorded. A run stops the first time alive-sensor coverage
falls below ``coverage_stop_fraction`` of the region, or at ``max_slots``.

Two interchangeable implementations exist. :func:`step` drives the entity
objects one slot at a time and is easy to audit; :func:`run` executes the
same arithmetic on arrays in chunks of slots with a compiled inner loop.
Actor energy is accounted in integer nanojoules in the fast path so the
per-slot totals and the per-actor ledgers agree exactly.
"""
import csv
import math
import os
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from . import entities as ent
from . import rf
from .config import ScenarioConfig
from .errors import NoSensors
from .geometry import Point, Region, build_voronoi
from .mobility import build_plan

STREAM_IDS = {"events": 1, "sensors": 2, "duty": 3}
NANO = 1e9
METRIC_HEADER = ("slot", "consumed_j", "residual_j", "alive", "coverage")
SUMMARY_HEADER = ("lifetime_s", "mean_consumed_per_cycle_j", "final_residual_j", "censored")


def stream(seed, name):
    """Independent generator for one named source of randomness."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), STREAM_IDS[name]]))


def duty_key(seed):
    return int(np.random.SeedSequence([int(seed), STREAM_IDS["duty"]]).generate_state(1, np.uint64)[0])


_M64 = (1 << 64) - 1


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def duty_uniform(key, sensor, slot):
    """Uniform in [0, 1) that depends only on (key, sensor, slot).

    Sensor ``i`` sees the same duty-cycle draws whatever the population
    size, so sweeps that change the sensor count stay paired.
    """
    z = _splitmix64((key ^ ((sensor * 0xD1B54A32D192ED03) & _M64) ^ ((slot * 0x8CB92BA72F3D8DD7) & _M64)) & _M64)
    return (z >> 11) * 2.0 ** -53


@numba.njit(cache=True)
def _duty_uniform_nb(key, sensor, slot):
    z = key ^ (np.uint64(sensor) * np.uint64(0xD1B54A32D192ED03)) ^ (np.uint64(slot) * np.uint64(0x8CB92BA72F3D8DD7))
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class MetricsRecord:
    slot: int
    consumed_j: float
    residual_j: float
    alive: int
    coverage: float


@dataclass(eq=False)
class RunResult:
    lifetime_s: float
    censored: bool
    slots: np.ndarray
    consumed_j: np.ndarray
    residual_j: np.ndarray
    alive: np.ndarray
    coverage: np.ndarray
    initial_residual_j: float
    actor_motion_j: np.ndarray
    actor_tx_j: np.ndarray
    ledger_consistent: bool
    config: ScenarioConfig = None

    @property
    def n_slots(self):
        return len(self.slots)

    @property
    def mean_consumed_per_cycle_j(self):
        return float(self.consumed_j.mean()) if self.n_slots else 0.0

    @property
    def mean_residual_j(self):
        """Residual-energy metric averaged over every slot of the run."""
        return float(self.residual_j.mean()) if self.n_slots else self.initial_residual_j

    @property
    def final_residual_j(self):
        return float(self.residual_j[-1]) if self.n_slots else self.initial_residual_j

    @property
    def total_motion_j(self):
        return float(self.actor_motion_j.sum())

    def records(self):
        for k in range(self.n_slots):
            yield MetricsRecord(int(self.slots[k]), float(self.consumed_j[k]), float(self.residual_j[k]),
                                int(self.alive[k]), float(self.coverage[k]))


# ---------------------------------------------------------------------------
# metrics

def coverage_grid(region, resolution):
    """Centres of the smallest square tiling with cells no wider than
    ``resolution``."""
    if resolution <= 0:
        raise ValueError("grid resolution must be positive")
    n = int(math.ceil(region.side / resolution - 1e-9))
    c = (np.arange(n) + 0.5) * (region.side / n)
    gx, gy = np.meshgrid(c, c, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _alive_positions(sensors):
    if isinstance(sensors, np.ndarray):
        return sensors.reshape(-1, 2)
    return np.array([s.position for s in sensors if s.alive], dtype=float).reshape(-1, 2)


def coverage_fraction(sensors, region, sensing_radius, grid_resolution):
    """Share of grid points within ``sensing_radius`` of an alive sensor.

    ``sensors`` is a list of :class:`Sensor` or an array of alive positions.
    """
    grid = coverage_grid(region, grid_resolution)
    pos = _alive_positions(sensors)
    if len(pos) == 0:
        return 0.0
    covered = np.zeros(len(grid), dtype=bool)
    r2 = sensing_radius ** 2
    for start in range(0, len(pos), 256):
        block = pos[start:start + 256]
        d2 = ((grid[:, None, :] - block[None, :, :]) ** 2).sum(-1)
        covered |= (d2 <= r2).any(axis=1)
    return float(covered.mean())


def nearest_sensor_indices(ep_positions, sensor_positions):
    ep = np.asarray(ep_positions, dtype=float).reshape(-1, 2)
    sp = np.asarray(sensor_positions, dtype=float).reshape(-1, 2)
    if len(sp) == 0:
        raise NoSensors("residual metric needs at least one sensor")
    d2 = ((ep[:, None, :] - sp[None, :, :]) ** 2).sum(-1)
    return np.argmin(d2, axis=1)


def residual_metric(state):
    """Mean stored energy of the sensor nearest each event point (dead
    sensors included)."""
    if not state.sensors:
        raise NoSensors("residual metric needs at least one sensor")
    idx = nearest_sensor_indices([e.position for e in state.eps], [s.position for s in state.sensors])
    return float(np.mean([state.sensors[i].stored_energy for i in idx]))


# ---------------------------------------------------------------------------
# scenario construction

@dataclass(eq=False)
class ScenarioState:
    config: ScenarioConfig
    region: Region
    eps: list
    diagram: object
    plan: object
    sensors: list
    actors: list
    model: ent.EnergyModel
    curve: rf.HarvestCurve
    duty_key: int
    clock: int = 0
    history: list = field(default_factory=list)


def energy_model(cfg):
    return ent.EnergyModel(
        active_power_w=cfg.active_power_w,
        slot_seconds=cfg.slot_seconds,
        max_tx_power_dbm=cfg.max_tx_power_dbm,
        motion_coefficient=cfg.motion_coefficient,
        motion_exponent=cfg.motion_exponent,
        revival=cfg.revival,
        revive_threshold_j=cfg.revive_threshold_j,
        radiation_duty=cfg.radiation_duty,
    )


def harvest_curve(cfg):
    if cfg.harvest_trace:
        return rf.load_harvest_trace(cfg.harvest_trace)
    return rf.HarvestCurve()


def event_positions(cfg):
    if cfg.ep_coords is not None:
        return np.asarray(cfg.ep_coords, dtype=float).reshape(-1, 2)
    return stream(cfg.seed, "events").uniform(0.0, cfg.side, size=(cfg.n_eps, 2))


def sensor_positions(cfg):
    return stream(cfg.seed, "sensors").uniform(0.0, cfg.side, size=(cfg.sensor_count, 2))


def build_state(cfg):
    region = Region(cfg.side)
    ep_pos = event_positions(cfg)
    diagram = build_voronoi(ep_pos, region)
    plan = build_plan(cfg.model, ep_pos, diagram, cfg.n_actors) if cfg.n_actors > 0 else None
    model = energy_model(cfg)
    eps = [ent.EventPoint(i, Point(*p), cfg.min_required_power_dbm) for i, p in enumerate(ep_pos)]
    sensors = [
        ent.Sensor(i, Point(*p), stored_energy=cfg.sensor_initial_j, capacity=cfg.sensor_capacity_j,
                   alive_threshold=cfg.alive_threshold_j, consume_probability=cfg.consume_probability,
                   alive=cfg.sensor_initial_j > cfg.alive_threshold_j)
        for i, p in enumerate(sensor_positions(cfg))
    ]
    actors = []
    if plan is not None:
        speed = cfg.actor_speed_mps if cfg.model.mobile else 0.0
        for i in range(plan.n_actors):
            actors.append(ent.Actor(i, Point(*plan.positions[i]), speed=speed, path=plan.paths[i],
                                    arc_offset=float(plan.offsets[i])))
    return ScenarioState(cfg, region, eps, diagram, plan, sensors, actors, model, harvest_curve(cfg),
                         duty_key(cfg.seed))


def stop_reached(coverage, cfg):
    return coverage < cfg.coverage_stop_fraction


# ---------------------------------------------------------------------------
# reference slot update

def step(state):
    """Advance ``state`` by one slot in place and return the slot's metrics."""
    cfg, model = state.config, state.model
    before = sum(a.consumed_energy for a in state.actors)
    actors = []
    for a in state.actors:
        a = ent.advance_actor(a, model)
        a = replace(a, tx_power_dbm=ent.select_tx_power(a, state.eps, cfg.frequency_hz, model))
        actors.append(ent.bill_transmission(a, model))
    state.actors = actors
    draws = [duty_uniform(state.duty_key, s.id, state.clock + 1) for s in state.sensors]
    sensors = []
    for s, u in zip(state.sensors, draws):
        s = ent.sensor_charge_step(s, actors, cfg.frequency_hz, state.curve, model, cfg.sensitivity_mode)
        sensors.append(ent.sensor_consume_step(s, None, model, draw=u))
    state.sensors = sensors
    state.clock += 1
    rec = MetricsRecord(
        slot=state.clock,
        consumed_j=sum(a.consumed_energy for a in actors) - before,
        residual_j=residual_metric(state),
        alive=sum(s.alive for s in sensors),
        coverage=coverage_fraction(sensors, state.region, cfg.sensing_radius_m, cfg.grid_resolution_m),
    )
    state.history.append(rec)
    return rec


def run_reference(cfg):
    """Slow object-level run; same contract as :func:`run`."""
    state = build_state(cfg)
    cov0 = coverage_fraction(state.sensors, state.region, cfg.sensing_radius_m, cfg.grid_resolution_m)
    initial_residual = residual_metric(state)
    stopped = stop_reached(cov0, cfg)
    while not stopped and state.clock < cfg.max_slots:
        rec = step(state)
        stopped = stop_reached(rec.coverage, cfg)
    h = state.history
    motion = np.array([a.motion_energy for a in state.actors])
    tx = np.array([a.tx_energy for a in state.actors])
    consumed = np.array([r.consumed_j for r in h])
    return RunResult(
        lifetime_s=state.clock * cfg.slot_seconds,
        censored=not stopped,
        slots=np.array([r.slot for r in h], dtype=np.int64),
        consumed_j=consumed,
        residual_j=np.array([r.residual_j for r in h]),
        alive=np.array([r.alive for r in h], dtype=np.int64),
        coverage=np.array([r.coverage for r in h]),
        initial_residual_j=initial_residual,
        actor_motion_j=motion,
        actor_tx_j=tx,
        ledger_consistent=math.isclose(math.fsum(consumed), math.fsum(motion) + math.fsum(tx),
                                       rel_tol=1e-9, abs_tol=1e-9),
        config=cfg,
    )


# ---------------------------------------------------------------------------
# fast path

@numba.njit(cache=True)
def _efficiency(dbm, knots, eff, floor):
    if dbm < floor:
        return 0.0
    n = knots.shape[0]
    if dbm <= knots[0]:
        return eff[0]
    if dbm >= knots[n - 1]:
        return eff[n - 1]
    j = np.searchsorted(knots, dbm, side="right") - 1
    t = (dbm - knots[j]) / (knots[j + 1] - knots[j])
    return eff[j] + t * (eff[j + 1] - eff[j])


@numba.njit(cache=True, fastmath=True)
def _incident_row(total, actor_xy, tx_w, sensor_xy, gain, min_r2):
    total[:] = 0.0
    # contiguous coordinate columns let the inner loop vectorise
    sx = np.ascontiguousarray(sensor_xy[:, 0])
    sy = np.ascontiguousarray(sensor_xy[:, 1])
    for a in range(actor_xy.shape[0]):
        c = tx_w[a] * gain
        ax = actor_xy[a, 0]
        ay = actor_xy[a, 1]
        for i in range(sx.shape[0]):
            dx = sx[i] - ax
            dy = sy[i] - ay
            total[i] += c / max(dx * dx + dy * dy, min_r2)


@numba.njit(cache=True)
def _incident_row_per_actor(total, actor_xy, tx_w, sensor_xy, gain, min_r2, floor_w):
    total[:] = 0.0
    for a in range(actor_xy.shape[0]):
        c = tx_w[a] * gain
        for i in range(sensor_xy.shape[0]):
            dx = sensor_xy[i, 0] - actor_xy[a, 0]
            dy = sensor_xy[i, 1] - actor_xy[a, 1]
            p = c / max(dx * dx + dy * dy, min_r2)
            if p >= floor_w:
                total[i] += p


@numba.njit(cache=True)
def _harvest_row(out, actor_xy, tx_w, sensor_xy, gain, min_r2, floor_w, per_actor, knots, eff, floor_dbm):
    if per_actor:
        _incident_row_per_actor(out, actor_xy, tx_w, sensor_xy, gain, min_r2, floor_w)
    else:
        _incident_row(out, actor_xy, tx_w, sensor_xy, gain, min_r2)
    for i in range(out.shape[0]):
        total = out[i]
        # cheap rejection before the logarithm; the exact dBm test follows
        if total > 0.0 and total >= 0.999 * floor_w:
            out[i] = _efficiency(10.0 * np.log10(total) + 30.0, knots, eff, floor_dbm) * total
        else:
            out[i] = 0.0


@numba.njit(cache=True)
def _run_chunk(n_slots, actor_xy, tx_w, static, sensor_xy, gain, min_r2, floor_w, per_actor, knots, eff,
               floor_dbm, slot_s, energy, alive, key, slot0, prob, drain, capacity, alive_thr, revival,
               revive_thr, cover_ptr, cover_idx, cover_count, n_covered, n_grid, stop_frac,
               residual_idx, out_residual, out_alive, out_coverage):
    n_s = energy.shape[0]
    harvest = np.zeros(n_s)
    if static:
        _harvest_row(harvest, actor_xy[0], tx_w[0], sensor_xy, gain, min_r2, floor_w, per_actor, knots,
                     eff, floor_dbm)
    n_alive = 0
    for i in range(n_s):
        if alive[i]:
            n_alive += 1
    for k in range(n_slots):
        if not static:
            _harvest_row(harvest, actor_xy[k], tx_w[k], sensor_xy, gain, min_r2, floor_w, per_actor, knots,
                         eff, floor_dbm)
        for i in range(n_s):
            gained = harvest[i] * slot_s
            if gained > 0.0:
                e = energy[i] + gained
                energy[i] = e if e < capacity else capacity
                if alive[i]:
                    if energy[i] <= alive_thr:
                        alive[i] = False
                        n_alive -= 1
                        for q in range(cover_ptr[i], cover_ptr[i + 1]):
                            g = cover_idx[q]
                            cover_count[g] -= 1
                            if cover_count[g] == 0:
                                n_covered -= 1
                elif revival and energy[i] >= revive_thr:
                    alive[i] = True
                    n_alive += 1
                    for q in range(cover_ptr[i], cover_ptr[i + 1]):
                        g = cover_idx[q]
                        if cover_count[g] == 0:
                            n_covered += 1
                        cover_count[g] += 1
            if alive[i] and _duty_uniform_nb(key, i, slot0 + k) < prob:
                e = energy[i] - drain
                energy[i] = e if e > 0.0 else 0.0
                if energy[i] <= alive_thr:
                    alive[i] = False
                    n_alive -= 1
                    for q in range(cover_ptr[i], cover_ptr[i + 1]):
                        g = cover_idx[q]
                        cover_count[g] -= 1
                        if cover_count[g] == 0:
                            n_covered -= 1
        acc = 0.0
        for j in range(residual_idx.shape[0]):
            acc += energy[residual_idx[j]]
        out_residual[k] = acc / residual_idx.shape[0]
        out_alive[k] = n_alive
        cov = n_covered / n_grid
        out_coverage[k] = cov
        if cov < stop_frac:
            return k + 1, True, n_covered
    return n_slots, False, n_covered


@numba.njit(cache=True)
def _disk_cells(sensor_xy, n_side, cell, radius, ptr, idx, fill):
    """Grid points within ``radius`` of each sensor, as CSR rows. Called once
    with ``fill=False`` to size the rows and once to write them."""
    r2 = radius * radius
    q = 0
    for s in range(sensor_xy.shape[0]):
        x = sensor_xy[s, 0]
        y = sensor_xy[s, 1]
        j0 = max(0, int(math.floor((y - radius) / cell - 0.5)))
        j1 = min(n_side - 1, int(math.ceil((y + radius) / cell - 0.5)))
        i0 = max(0, int(math.floor((x - radius) / cell - 0.5)))
        i1 = min(n_side - 1, int(math.ceil((x + radius) / cell - 0.5)))
        for j in range(j0, j1 + 1):
            dy = (j + 0.5) * cell - y
            for i in range(i0, i1 + 1):
                dx = (i + 0.5) * cell - x
                if dx * dx + dy * dy <= r2:
                    if fill:
                        idx[q] = j * n_side + i
                    q += 1
        if not fill:
            ptr[s + 1] = q
    return q


def _coverage_index(sensor_xy, grid, radius):
    n_side = int(round(math.sqrt(len(grid))))
    # grid points are ((i + 0.5) * cell, (j + 0.5) * cell), i along x
    cell = 2.0 * grid[0, 0]
    ptr = np.zeros(len(sensor_xy) + 1, dtype=np.int64)
    total = _disk_cells(sensor_xy, n_side, cell, radius, ptr, np.zeros(0, dtype=np.int64), False)
    idx = np.empty(total, dtype=np.int64)
    _disk_cells(sensor_xy, n_side, cell, radius, ptr, idx, True)
    return ptr, idx


class _ActorArrays:
    """Per-slot actor positions and transmit powers for a block of slots."""

    def __init__(self, state):
        cfg = state.config
        self.cfg = cfg
        self.actors = state.actors
        self.ep_xy = np.array([e.position for e in state.eps], dtype=float)
        self.ep_pmin = np.array([e.min_required_power_dbm for e in state.eps], dtype=float)
        self.lam = rf.wavelength(cfg.frequency_hz)
        self.model = state.model
        self.mobile = [a.mobile for a in self.actors]
        # actors on the same path object move together: group them
        self.groups = {}
        for k, a in enumerate(self.actors):
            if a.mobile:
                self.groups.setdefault(id(a.path), (a.path, []))[1].append(k)
        self.start_xy = np.array([a.position for a in self.actors], dtype=float).reshape(-1, 2)
        self.offsets = np.array([a.arc_offset for a in self.actors], dtype=float)
        self.speeds = np.array([a.speed for a in self.actors], dtype=float)
        motion_w = np.array([ent.motion_power(a.speed, self.model) if a.mobile else 0.0 for a in self.actors])
        self.motion_nj = np.rint(motion_w * cfg.slot_seconds * NANO).astype(np.int64)

    @property
    def any_mobile(self):
        return any(self.mobile)

    def positions(self, slots):
        xy = np.broadcast_to(self.start_xy, (len(slots),) + self.start_xy.shape).copy()
        for path, members in self.groups.values():
            arc = self.offsets[members][None, :] + self.speeds[members][None, :] * (
                self.cfg.slot_seconds * slots[:, None])
            xy[:, members, :] = path.positions(arc)
        return xy

    def tx_dbm(self, xy):
        d2 = ((xy[:, :, None, :] - self.ep_xy[None, None, :, :]) ** 2).sum(-1)
        nearest = np.argmin(d2, axis=-1)
        r = np.maximum(np.sqrt(np.take_along_axis(d2, nearest[..., None], -1)[..., 0]), self.model.min_range_m)
        need = self.ep_pmin[nearest] + 20.0 * np.log10(4.0 * math.pi * r / self.lam)
        return np.minimum(need, self.model.max_tx_power_dbm)


def run(cfg, chunk=None, engine="fast"):
    """Simulate one scenario until the coverage stop or ``max_slots``."""
    if engine == "reference":
        return run_reference(cfg)
    state = build_state(cfg)
    model, curve = state.model, state.curve
    sensor_xy = np.array([s.position for s in state.sensors], dtype=float)
    n_s, n_a = len(sensor_xy), len(state.actors)
    energy = np.array([s.stored_energy for s in state.sensors], dtype=float)
    alive = np.array([s.alive for s in state.sensors], dtype=np.bool_)
    residual_idx = nearest_sensor_indices([e.position for e in state.eps], sensor_xy).astype(np.int64)
    initial_residual = float(energy[residual_idx].mean())

    grid = coverage_grid(state.region, cfg.grid_resolution_m)
    cover_ptr, cover_idx = _coverage_index(sensor_xy, grid, cfg.sensing_radius_m)
    cover_count = np.zeros(len(grid), dtype=np.int64)
    for i in np.flatnonzero(alive):
        np.add.at(cover_count, cover_idx[cover_ptr[i]:cover_ptr[i + 1]], 1)
    n_covered = int((cover_count > 0).sum())
    n_grid = len(grid)

    acts = _ActorArrays(state) if n_a else None
    static = acts is None or not acts.any_mobile
    gain = (rf.wavelength(cfg.frequency_hz) / (4.0 * math.pi)) ** 2
    floor_w = rf.dbm_to_watts(curve.floor_dbm)
    knots = np.array(curve.knots_dbm)
    eff = np.array(curve.efficiency)
    drain = model.active_power_w * model.slot_seconds

    if chunk is None:
        chunk = 4096 if static else int(np.clip(2_000_000 // max(1, n_a * max(n_s, 8)), 64, 2048))

    consumed_parts, residual_parts, alive_parts, cov_parts = [], [], [], []
    motion_nj = np.zeros(n_a, dtype=np.int64)
    tx_nj = np.zeros(n_a, dtype=np.int64)
    clock = 0
    stopped = stop_reached(n_covered / n_grid, cfg)
    if static:
        if n_a:
            xy = acts.start_xy[None]
            tx_dbm_static = acts.tx_dbm(xy)
            tx_w_static = rf.dbm_to_watts(tx_dbm_static) * model.radiation_duty
        else:
            xy = np.zeros((1, 0, 2))
            tx_w_static = np.zeros((1, 0))
    while not stopped and clock < cfg.max_slots:
        k = min(chunk, cfg.max_slots - clock)
        slots = np.arange(clock + 1, clock + k + 1, dtype=float)
        if static:
            pos, tx_w = xy, tx_w_static
        else:
            pos = acts.positions(slots)
            tx_w = rf.dbm_to_watts(acts.tx_dbm(pos)) * model.radiation_duty
        out_res = np.empty(k)
        out_alive = np.empty(k, dtype=np.int64)
        out_cov = np.empty(k)
        done, stopped, n_covered = _run_chunk(
            k, np.ascontiguousarray(pos), np.ascontiguousarray(tx_w), static, sensor_xy, gain,
            model.min_range_m ** 2, floor_w, cfg.sensitivity_mode == "per_actor", knots, eff,
            curve.floor_dbm, model.slot_seconds, energy, alive, np.uint64(state.duty_key), clock + 1,
            cfg.consume_probability, drain,
            cfg.sensor_capacity_j, cfg.alive_threshold_j, model.revival, model.revive_threshold_j,
            cover_ptr, cover_idx, cover_count, n_covered, n_grid, cfg.coverage_stop_fraction,
            residual_idx, out_res, out_alive, out_cov)
        if n_a:
            tx_slot_nj = np.rint(np.broadcast_to(tx_w, (k, n_a))[:done] * (model.slot_seconds * NANO))
            tx_slot_nj = tx_slot_nj.astype(np.int64)
            tx_nj += tx_slot_nj.sum(axis=0)
            motion_nj += acts.motion_nj * done
            consumed_parts.append(tx_slot_nj.sum(axis=1) + acts.motion_nj.sum())
        else:
            consumed_parts.append(np.zeros(done, dtype=np.int64))
        residual_parts.append(out_res[:done])
        alive_parts.append(out_alive[:done])
        cov_parts.append(out_cov[:done])
        clock += done

    def cat(parts, dtype):
        return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)

    consumed_nj = cat(consumed_parts, np.int64)
    return RunResult(
        lifetime_s=clock * cfg.slot_seconds,
        censored=not stopped,
        slots=np.arange(1, clock + 1, dtype=np.int64),
        consumed_j=consumed_nj / NANO,
        residual_j=cat(residual_parts, float),
        alive=cat(alive_parts, np.int64),
        coverage=cat(cov_parts, float),
        initial_residual_j=initial_residual,
        actor_motion_j=motion_nj / NANO,
        actor_tx_j=tx_nj / NANO,
        ledger_consistent=int(consumed_nj.sum()) == int(motion_nj.sum() + tx_nj.sum()),
        config=cfg,
    )


# ---------------------------------------------------------------------------
# output

def _fmt(x):
    return repr(float(x))


def write_run_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRIC_HEADER)
        for k in range(result.n_slots):
            w.writerow((int(result.slots[k]), _fmt(result.consumed_j[k]), _fmt(result.residual_j[k]),
                        int(result.alive[k]), _fmt(result.coverage[k])))


def write_summary_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        w.writerow((_fmt(result.lifetime_s), _fmt(result.mean_consumed_per_cycle_j),
                    _fmt(result.final_residual_j), int(result.censored)))


def write_outputs(result, out_dir, name="run.csv"):
    os.makedirs(out_dir, exist_ok=True)
    write_run_csv(result, os.path.join(out_dir, name))
    write_summary_csv(result, os.path.join(out_dir, "run_summary.csv"))
