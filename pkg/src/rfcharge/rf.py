"""Free-space link budget and the harvester efficiency model.

Powers are plain floats (or numpy arrays): dBm where the name says ``dbm``,
watts otherwise. Antenna gains default to 1 (isotropic).
"""
import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonPositivePower, ValidationError, ZeroDistance

SPEED_OF_LIGHT = 2.998e8  # m/s
SENSITIVITY_FLOOR_DBM = -20.0

# Placeholder efficiency knots used when no measured trace is supplied.
DEFAULT_HARVEST_KNOTS = ((-20.0, 0.05), (-10.0, 0.15), (0.0, 0.30), (10.0, 0.40))


def dbm_to_watts(p_dbm):
    if np.ndim(p_dbm):
        return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w):
    if np.ndim(p_w):
        p = np.asarray(p_w, dtype=float)
        if np.any(p <= 0):
            raise NonPositivePower("power must be > 0 W to express in dBm")
        return 10.0 * np.log10(p) + 30.0
    if p_w <= 0:
        raise NonPositivePower(f"power must be > 0 W to express in dBm, got {p_w}")
    return 10.0 * math.log10(p_w) + 30.0


def wavelength(freq_hz):
    if freq_hz <= 0:
        raise ValueError(f"frequency must be positive, got {freq_hz}")
    return SPEED_OF_LIGHT / freq_hz


def path_gain(freq_hz, r):
    """Free-space power gain (lambda / (4 pi r))**2 at distance ``r``."""
    return (wavelength(freq_hz) / (4.0 * math.pi * r)) ** 2


def friis_received(p_tx_w, freq_hz, r, g_tx=1.0, g_rx=1.0):
    """Received power in watts for a transmitter of ``p_tx_w`` watts."""
    if np.any(np.asarray(r) <= 0):
        raise ZeroDistance("Friis distance must be > 0")
    return p_tx_w * g_tx * g_rx * path_gain(freq_hz, r)


class TxPower(NamedTuple):
    dbm: float
    clamped: bool


def required_tx_power(p_min_dbm, r, freq_hz, cap_dbm):
    """Smallest transmit power that delivers ``p_min_dbm`` at distance ``r``.

    The result is capped at ``cap_dbm``; ``clamped`` tells the caller the
    target is not met.
    """
    if r <= 0:
        raise ZeroDistance(f"distance must be > 0, got {r}")
    needed = p_min_dbm + 20.0 * math.log10(4.0 * math.pi * r / wavelength(freq_hz))
    if needed > cap_dbm:
        return TxPower(float(cap_dbm), True)
    return TxPower(needed, False)


@dataclass(frozen=True)
class HarvestCurve:
    """RF-to-DC efficiency as a function of incident power.

    Efficiency is linearly interpolated in dBm between knots and held at the
    end knots outside their range; below ``floor_dbm`` nothing is harvested.
    """
    knots_dbm: tuple = field(default=tuple(k for k, _ in DEFAULT_HARVEST_KNOTS))
    efficiency: tuple = field(default=tuple(e for _, e in DEFAULT_HARVEST_KNOTS))
    floor_dbm: float = SENSITIVITY_FLOOR_DBM

    def __post_init__(self):
        k = np.asarray(self.knots_dbm, dtype=float)
        e = np.asarray(self.efficiency, dtype=float)
        if k.ndim != 1 or k.size == 0 or k.shape != e.shape:
            raise ValidationError("harvest_trace", "need matching, non-empty knot lists")
        if np.any(np.diff(k) <= 0):
            raise ValidationError("harvest_trace", "knots must be strictly increasing in dBm")
        if np.any((e < 0) | (e > 1)):
            raise ValidationError("harvest_trace", "efficiency must lie in [0, 1]")
        object.__setattr__(self, "knots_dbm", tuple(float(x) for x in k))
        object.__setattr__(self, "efficiency", tuple(float(x) for x in e))

    def efficiency_at(self, incident_dbm):
        eta = np.interp(incident_dbm, self.knots_dbm, self.efficiency)
        eta = np.where(np.asarray(incident_dbm) < self.floor_dbm, 0.0, eta)
        return eta if np.ndim(incident_dbm) else float(eta)


def harvested_power(curve, incident_dbm):
    """DC power in watts extracted from ``incident_dbm`` of RF input."""
    return curve.efficiency_at(incident_dbm) * dbm_to_watts(incident_dbm)


def harvested_from_watts(curve, incident_w):
    """Same as :func:`harvested_power` but takes watts; 0 W yields 0 W."""
    w = np.asarray(incident_w, dtype=float)
    with np.errstate(divide="ignore"):
        dbm = 10.0 * np.log10(w) + 30.0
    out = curve.efficiency_at(dbm) * w
    return out if np.ndim(incident_w) else float(out)


def load_harvest_trace(path, floor_dbm=SENSITIVITY_FLOOR_DBM):
    """Read an ``incident_dbm,efficiency`` CSV into a :class:`HarvestCurve`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["incident_dbm", "efficiency"]:
            raise ValidationError("harvest_trace", f"{path}: header must be 'incident_dbm,efficiency'")
        knots, eff = [], []
        for row in reader:
            try:
                knots.append(float(row["incident_dbm"]))
                eff.append(float(row["efficiency"]))
            except (TypeError, ValueError) as exc:
                raise ValidationError("harvest_trace", f"{path}: bad row {row}") from exc
    return HarvestCurve(tuple(knots), tuple(eff), floor_dbm)
