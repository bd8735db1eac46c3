"""Parameter sweeps over the four mobility variants and per-figure CSVs."""
import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import FIELD_TYPES, coerce_overrides
from .errors import MissingSweep, SimulationError, ValidationError
from .mobility import ALL_MODELS, MobilityModel
from .sim import _splitmix64, run

# sweepable axes and the values each one takes in the reference study
AXES = {
    "consume_probability": (1 / 10, 1 / 20, 1 / 30, 1 / 40),
    "max_tx_power_dbm": (36.0,),
    "n_actors": (10, 20, 30, 40),
    "n_eps": (10, 20, 30, 40),
    "min_required_power_dbm": (-20.0, -10.0, 0.0, 5.0, 10.0),
    "frequency_hz": (642e6, 915e6, 2.4e9, 5.1e9),
    "area_m2": (150.0, 200.0, 250.0),
}

SWEEP_COLUMNS = (
    "axis", "value", "by", "by_value", "variant", "runs", "failed", "censored",
    "lifetime_mean_s", "lifetime_std_s", "consumed_mean_j", "consumed_std_j",
    "residual_mean_j", "residual_std_j", "final_residual_mean_j", "final_residual_std_j",
    "motion_mean_j",
)


def derive_seed(base, index):
    """Seed for replicate ``index``. The same replicate sees the same
    layout at every sweep point and for every variant."""
    return _splitmix64((_splitmix64(int(base) & (2 ** 64 - 1)) + int(index)) & (2 ** 64 - 1)) >> 33


@dataclass
class SweepSpec:
    axis: str
    values: tuple
    variants: tuple = ALL_MODELS
    seeds: int = 30
    by: str = None
    by_values: tuple = ()

    def __post_init__(self):
        for name in (self.axis, self.by):
            if name is not None and name not in FIELD_TYPES:
                raise ValidationError(name, "unknown sweep axis")
        if not self.values:
            raise SimulationError("a sweep needs at least one value")
        if self.by is not None and not self.by_values:
            raise SimulationError("a secondary axis needs at least one value")
        if self.seeds < 1:
            raise SimulationError("need at least one seed per point")
        self.variants = tuple(MobilityModel.parse(v) for v in self.variants)

    @property
    def name(self):
        return self.axis if self.by is None else f"{self.axis}__{self.by}"


@dataclass
class PointResult:
    value: object
    by_value: object
    variant: MobilityModel
    lifetime: np.ndarray = field(default_factory=lambda: np.zeros(0))
    consumed: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    final_residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    motion: np.ndarray = field(default_factory=lambda: np.zeros(0))
    censored: int = 0
    failed: int = 0
    errors: list = field(default_factory=list)

    @staticmethod
    def _mean(x):
        return float(np.mean(x)) if len(x) else math.nan

    @staticmethod
    def _std(x):
        return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0 if len(x) else math.nan

    def stderr(self, metric):
        x = getattr(self, metric)
        return self._std(x) / math.sqrt(len(x)) if len(x) else math.nan

    def mean(self, metric):
        return self._mean(getattr(self, metric))

    def row(self, spec):
        return {
            "axis": spec.axis, "value": self.value, "by": spec.by or "", "by_value": "" if self.by_value is None
            else self.by_value, "variant": self.variant.value, "runs": len(self.lifetime) + self.failed,
            "failed": self.failed, "censored": self.censored,
            "lifetime_mean_s": self._mean(self.lifetime), "lifetime_std_s": self._std(self.lifetime),
            "consumed_mean_j": self._mean(self.consumed), "consumed_std_j": self._std(self.consumed),
            "residual_mean_j": self._mean(self.residual), "residual_std_j": self._std(self.residual),
            "final_residual_mean_j": self._mean(self.final_residual),
            "final_residual_std_j": self._std(self.final_residual),
            "motion_mean_j": self._mean(self.motion),
        }


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list

    def point(self, value, variant, by_value=None):
        variant = MobilityModel.parse(variant)
        for p in self.points:
            if p.value == value and p.variant == variant and p.by_value == by_value:
                return p
        raise KeyError((value, variant, by_value))

    def series(self, variant, metric, by_value=None):
        """Seed-averaged ``metric`` for ``variant`` in sweep-value order."""
        return np.array([self.point(v, variant, by_value).mean(metric) for v in self.spec.values])

    def stderrs(self, variant, metric, by_value=None):
        return np.array([self.point(v, variant, by_value).stderr(metric) for v in self.spec.values])

    @property
    def rows(self):
        return [p.row(self.spec) for p in self.points]

    @property
    def all_censored(self):
        return all(p.censored == len(p.lifetime) for p in self.points if len(p.lifetime))


def point_config(base, spec, value, by_value, variant, seed_index):
    changes = {spec.axis: value, "mobility_model": variant.value,
               "seed": derive_seed(base.seed, seed_index)}
    if spec.by is not None:
        changes[spec.by] = by_value
    if "area_m2" in changes or "region_side_m" in changes:
        # hold density fixed when the region changes
        if base.n_sensors is not None:
            changes["sensor_density"] = base.n_sensors / base.region_area
            changes["n_sensors"] = None
    return base.with_(**coerce_overrides({k: v for k, v in changes.items()}))


def _run_one(cfg):
    try:
        r = run(cfg)
    except SimulationError as exc:
        return str(exc)
    return (r.lifetime_s, r.mean_consumed_per_cycle_j, r.mean_residual_j, r.final_residual_j,
            r.total_motion_j, r.censored)


def run_sweep(spec, base, progress=None, jobs=1):
    """Run every (value, by-value, variant, seed) combination.

    With ``jobs > 1`` the runs go to a process pool; rows come out in the
    same order either way.
    """
    by_values = spec.by_values if spec.by is not None else (None,)
    keys = [(bv, v, var) for bv in by_values for v in spec.values for var in spec.variants]
    cfgs = []
    for bv, v, var in keys:
        for s in range(spec.seeds):
            try:
                cfgs.append(point_config(base, spec, v, bv, var, s))
            except SimulationError as exc:
                cfgs.append(exc)

    def execute(c):
        return str(c) if isinstance(c, Exception) else _run_one(c)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [None if isinstance(c, Exception) else pool.submit(_run_one, c) for c in cfgs]
            outcomes = [str(c) if f is None else f.result() for c, f in zip(cfgs, futures)]
    else:
        outcomes = None

    points = []
    for n, (bv, v, var) in enumerate(keys):
        pt = PointResult(v, bv, var)
        rows = []
        for k in range(n * spec.seeds, (n + 1) * spec.seeds):
            out = outcomes[k] if outcomes is not None else execute(cfgs[k])
            if isinstance(out, str):
                pt.failed += 1
                pt.errors.append(out)
            else:
                rows.append(out)
        cols = np.array(rows, dtype=float).reshape(-1, 6)
        pt.lifetime, pt.consumed, pt.residual, pt.final_residual, pt.motion = (
            cols[:, i].copy() for i in range(5))
        pt.censored = int(cols[:, 5].sum())
        points.append(pt)
        if progress:
            progress(pt)
    return SweepResult(spec, points)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_sweep_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in result.rows:
            w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])


def read_sweep_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# figure name -> (sweep axis, secondary axis, sweep column, fixed variant)
FIGURES = {
    "fig3a": ("min_required_power_dbm", None, "consumed_mean_j", None),
    "fig3b": ("min_required_power_dbm", None, "residual_mean_j", None),
    "fig4a": ("frequency_hz", None, "consumed_mean_j", None),
    "fig4b": ("frequency_hz", None, "residual_mean_j", None),
    "fig5a": ("min_required_power_dbm", "frequency_hz", "consumed_mean_j", "mobile_em"),
    "fig5b": ("min_required_power_dbm", "frequency_hz", "residual_mean_j", "mobile_em"),
    "fig6a": ("n_actors", None, "consumed_mean_j", None),
    "fig6b": ("n_actors", None, "residual_mean_j", None),
    "fig7a": ("n_eps", None, "consumed_mean_j", None),
    "fig7b": ("consume_probability", None, "residual_mean_j", None),
    "fig8a": ("area_m2", None, "consumed_mean_j", None),
    "fig8b": ("area_m2", None, "residual_mean_j", None),
    "fig9a": ("frequency_hz", None, "lifetime_mean_s", None),
    "fig9b": ("n_actors", None, "lifetime_mean_s", None),
    "fig9c": ("n_eps", None, "lifetime_mean_s", None),
}


def sweep_filename(axis, by=None):
    return f"sweep_{axis}.csv" if by is None else f"sweep_{axis}__{by}.csv"


def figure_table(rows, figure):
    """Project sweep rows onto the columns one figure plots."""
    axis, by, column, variant = FIGURES[figure]
    if not rows:
        raise MissingSweep(f"{figure}: sweep over {axis} is empty")
    xs = list(dict.fromkeys(r["value"] for r in rows))
    if by is None:
        series = list(dict.fromkeys(r["variant"] for r in rows))
        key = "variant"
    else:
        rows = [r for r in rows if r["variant"] == variant]
        series = list(dict.fromkeys(r["by_value"] for r in rows))
        key = "by_value"
        if not rows:
            raise MissingSweep(f"{figure}: no {variant} rows in the sweep")
    lookup = {(r["value"], r[key]): r[column] for r in rows}
    header = [axis] + [s if by is None else f"{by}={s}" for s in series]
    table = [[x] + [lookup.get((x, s), "") for s in series] for x in xs]
    return header, table


def emit_figure_data(figure, sweep_dir, out_dir=None):
    """Write ``<figure>.csv`` from the matching sweep file in ``sweep_dir``."""
    if figure not in FIGURES:
        raise MissingSweep(f"unknown figure {figure!r}")
    axis, by, _, _ = FIGURES[figure]
    path = os.path.join(sweep_dir, sweep_filename(axis, by))
    if not os.path.exists(path):
        raise MissingSweep(f"{figure}: {path} not found; run the {axis} sweep first")
    header, table = figure_table(read_sweep_csv(path), figure)
    out_dir = out_dir or sweep_dir
    os.makedirs(out_dir, exist_ok=True)
    out = os.path.join(out_dir, f"{figure}.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(table)
    return out
