"""Acceptance checks, one per criterion, each printing a single PASS/FAIL line.

Criteria 1-8 are exact or oracle checks. Criteria 9-15 are trend checks over
30-seed sweeps. The trend sweeps read the area as a region side in metres
(150/200/250 m sides) at 0.05 sensors/m^2; every other setting is the
package default. Under the default literal reading (a 14 m square) three of
the four variants keep their coverage indefinitely, so no lifetime is
observable there.

Run with ``pytest -v tests/test_acceptance.py`` or as a script.
"""
import functools
import itertools
import math
import time

import numpy as np
import pytest

from rfcharge import rf
from rfcharge.config import ScenarioConfig
from rfcharge.entities import motion_power
from rfcharge.experiment import SweepSpec, run_sweep
from rfcharge.geometry import Region, build_voronoi, distance_matrix, nearest_site, tour_length, tsp_order
from rfcharge.mobility import ALL_MODELS, MobilityModel, build_plan, em_branches
from rfcharge.sim import run, write_outputs

SEEDS = 30
SWEEP_BUDGET_S = 300.0
TREND_BASE = ScenarioConfig(region_side_m=200.0, sensor_density=0.05)
MOBILE = (MobilityModel.MOBILE_EM, MobilityModel.MOBILE_CM)
STATIC = (MobilityModel.STATIC_EM, MobilityModel.STATIC_CM)


def report(n, ok, detail):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    return ok


# ---------------------------------------------------------------------------
# helpers for the trend checks

@functools.lru_cache(maxsize=None)
def sweep(axis, values, variants=tuple(m.value for m in ALL_MODELS)):
    t0 = time.perf_counter()
    res = run_sweep(SweepSpec(axis, values, variants, SEEDS), TREND_BASE)
    return res, time.perf_counter() - t0


def diff_stderr(se_a, se_b):
    return math.hypot(se_a, se_b)


def nondecreasing(means, ses):
    """At most one inversion, and that one smaller than the stderr of the
    difference between the two points."""
    drops = [(i, means[i] - means[i + 1]) for i in range(len(means) - 1) if means[i + 1] < means[i]]
    if not drops:
        return True
    if len(drops) > 1:
        return False
    i, drop = drops[0]
    return drop < diff_stderr(ses[i], ses[i + 1])


def rel_variation(x):
    x = np.asarray(x, dtype=float)
    return float((x.max() - x.min()) / abs(x.mean()))


def fmt(x, nd=3):
    return "[" + ", ".join(f"{v:.{nd}f}" for v in x) + "]"


def timing(elapsed):
    return elapsed <= SWEEP_BUDGET_S, f"{elapsed:.0f}s"


# ---------------------------------------------------------------------------
# analytic / oracle criteria

def criterion_1():
    f = 915e6
    r0 = rf.wavelength(f) / (4 * math.pi)
    unit = abs(rf.friis_received(1.0, f, r0) - 1.0) <= 1e-12
    ratios = [rf.friis_received(1.0, f, r) / rf.friis_received(1.0, f, 2 * r) for r in (0.5, 1.0, 3.7, 10.0, 80.0)]
    quarter = all(abs(q / 4.0 - 1.0) <= 1e-12 for q in ratios)
    return report(1, unit and quarter, f"P_R(lambda/4pi)=P_T {unit}; doubling ratios {fmt(ratios, 12)}")


def criterion_2():
    hi = rf.dbm_to_watts(rf.required_tx_power(-20.0, 1.0, 915e6, 100.0).dbm)
    lo = rf.dbm_to_watts(rf.required_tx_power(-20.0, 1.0, 642e6, 100.0).dbm)
    ratio = hi / lo
    exact = (915 / 642) ** 2
    ok = abs(ratio - exact) <= 1e-6
    return report(2, ok, f"ratio {ratio:.7f} vs (915/642)^2 = {exact:.7f} (quoted 2.0314)")


def criterion_3():
    p = motion_power(2.0)
    exact = 0.05 * 2 ** 1.5
    return report(3, abs(p - exact) <= 1e-9, f"motion_power(2) = {p:.10f} W vs 0.05*2^1.5 = {exact:.10f} "
                                            f"(quoted 0.141421)")


def criterion_4():
    a, b = rf.wavelength(642e6), rf.wavelength(915e6)
    ok = float(f"{a:.3g}") == 0.467 and float(f"{b:.3g}") == 0.328
    return report(4, ok, f"642 MHz -> {a:.5f} m, 915 MHz -> {b:.5f} m")


def criterion_5():
    agree = total = 0
    spent = 0.0
    c = np.arange(100) + 0.5
    grid = np.array([(x, y) for x in c for y in c])
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 41))
        sites = rng.uniform(0, 100, size=(n, 2))
        # exhaustive scan; argmin keeps the lowest index on ties
        d2 = ((grid[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2)
        brute = np.argmin(d2, axis=1)
        t0 = time.perf_counter()
        d = build_voronoi(sites, Region(100.0))
        got = np.array([nearest_site(d, p) for p in grid])
        spent += time.perf_counter() - t0
        agree += int(np.sum(got == brute))
        total += len(grid)
    ok = agree == total and spent / 20 < 1.0
    return report(5, ok, f"{agree}/{total} grid points agree over 20 layouts; {spent / 20:.3f}s per layout")


def criterion_6():
    worst, perms = 0.0, True
    for seed in range(10):
        sites = np.random.default_rng(seed).uniform(0, 100, size=(7, 2))
        dist = distance_matrix(sites)
        order = tsp_order(sites)
        perms &= sorted(order) == list(range(7))
        best = min(tour_length((0,) + p, dist) for p in itertools.permutations(range(1, 7)))
        worst = max(worst, tour_length(order, dist) / best)
    return report(6, perms and worst <= 1.05, f"worst tour/optimum {worst:.4f}, permutations valid {perms}")


def _gaps_equal(start, end, pts):
    length = np.linalg.norm(end - start)
    d = np.sort([np.linalg.norm(p - start) for p in pts])
    gaps = np.diff(np.concatenate([[0.0], d, [length]]))
    return np.ptp(gaps) <= 1e-9


def criterion_7():
    ok, checked, notes = True, 0, []
    for seed, n_act, n_eps in itertools.product(range(20), (1, 10, 11, 40), (4, 10)):
        eps = np.random.default_rng(seed).uniform(0, 100, size=(n_eps, 2))
        d = build_voronoi(eps, Region(100.0))
        for model in ALL_MODELS:
            if model.edge_based and not d.inner_vertices:
                notes.append(f"seed {seed}/{n_eps} EPs has no inner vertex")
                continue
            plan = build_plan(model, eps, d, n_act)
            checked += 1
            ok &= int(plan.counts.sum()) == n_act and np.ptp(plan.counts) <= 1
            if not model.mobile and not model.edge_based:
                continue
            for slot in range(len(plan.counts)):
                members = plan.positions[plan.slot_of == slot]
                if not len(members):
                    continue
                if model.edge_based:
                    edge, _ = em_branches(d)[slot]
                    a, b = d.edges[edge]
                    ok &= _gaps_equal(d.vertices[a], d.vertices[b], members)
                else:
                    wp = plan.paths[0].waypoints
                    ok &= _gaps_equal(wp[slot], wp[(slot + 1) % len(wp)], members)
    eps4 = np.random.default_rng(0).uniform(0, 100, size=(4, 2))
    split = build_plan("mobile_cm", eps4, build_voronoi(eps4, Region(100.0)), 11).counts.tolist()
    ok &= sorted(split, reverse=True) == [3, 3, 3, 2]
    extra = f"; skipped {len(notes)}" if notes else ""
    return report(7, bool(ok), f"{checked} plans even and equidistant; 4 EPs/11 actors split {split}{extra}")


def criterion_8(tmp_dir):
    cfg = ScenarioConfig(seed=1)
    results, spent = [], []
    for sub in ("a", "b"):
        t0 = time.perf_counter()
        r = run(cfg)
        write_outputs(r, f"{tmp_dir}/{sub}")
        spent.append(time.perf_counter() - t0)
        results.append(r)
    blobs = [open(f"{tmp_dir}/{s}/run.csv", "rb").read() for s in ("a", "b")]
    same = blobs[0] == blobs[1]
    ledger = all(r.ledger_consistent for r in results)
    fast = max(spent) < 1.0
    return report(8, same and ledger and fast,
                  f"{len(blobs[0])} byte CSVs identical {same}; ledger exact {ledger}; "
                  f"{results[0].n_slots} slots, censored {results[0].censored}; "
                  f"{max(spent):.1f}s per run{'' if fast else ' X (budget 1s)'}")


# ---------------------------------------------------------------------------
# trend criteria

def criterion_9():
    res, t = sweep("n_actors", (10, 20, 30, 40))
    ok_t, tt = timing(t)
    parts, ok = [], ok_t
    for m in ALL_MODELS:
        life = res.series(m, "lifetime")
        good = nondecreasing(life, res.stderrs(m, "lifetime"))
        ok &= good
        parts.append(f"{m.value} {fmt(life, 1)}{'' if good else ' X'}")
    cm_res = res.series("mobile_cm", "residual")
    good = nondecreasing(cm_res, res.stderrs("mobile_cm", "residual"))
    ok &= good
    parts.append(f"mobile_cm residual {fmt(cm_res)}{'' if good else ' X'}")
    return report(9, ok, "lifetime " + "; ".join(parts) + f"; {tt}")


def criterion_10():
    res, t = sweep("frequency_hz", (642e6, 915e6, 2.4e9), tuple(m.value for m in MOBILE))
    ok, tt = timing(t)
    parts = []
    for m in MOBILE:
        life, se = res.series(m, "lifetime"), res.stderrs(m, "lifetime")
        gaps = [(life[i] - life[i + 1]) / diff_stderr(se[i], se[i + 1]) for i in range(2)]
        good = all(g > 1.0 for g in gaps)
        ok &= good
        parts.append(f"{m.value} {fmt(life, 1)} gaps/stderr {fmt(gaps, 2)}{'' if good else ' X'}")
    return report(10, ok, "; ".join(parts) + f"; {tt}")


def criterion_11():
    res, t = sweep("min_required_power_dbm", (-20.0, -10.0, 0.0, 5.0, 10.0))
    ok, tt = timing(t)
    cm = res.series("mobile_cm", "consumed")
    em = res.series("mobile_em", "consumed")
    spread_cm, spread_em = np.ptp(cm), np.ptp(em)
    ok &= spread_cm > spread_em
    return report(11, ok, f"consumed spread mobile_cm {spread_cm:.3f} J vs mobile_em {spread_em:.3f} J; {tt}")


def criterion_12():
    res, t = sweep("consume_probability", (1 / 10, 1 / 20, 1 / 30, 1 / 40))
    ok, tt = timing(t)
    parts = []
    for m in ALL_MODELS:
        resid = res.series(m, "residual")
        cons = res.series(m, "consumed")
        inc = bool(np.all(np.diff(resid) > 0))
        flat = rel_variation(cons) < 0.01
        ok &= inc and flat
        parts.append(f"{m.value} residual {fmt(resid)}{'' if inc else ' X'} consumed var "
                     f"{rel_variation(cons):.2%}{'' if flat else ' X'}")
    return report(12, ok, "; ".join(parts) + f"; {tt}")


def criterion_13():
    res, t = sweep("n_eps", (10, 20, 30, 40), tuple(m.value for m in MOBILE))
    ok, tt = timing(t)
    parts = []
    for m in MOBILE:
        lv = rel_variation(res.series(m, "lifetime"))
        cv = rel_variation(res.series(m, "consumed"))
        good_l, good_c = lv < 0.15, cv > 0.15
        ok &= good_l and good_c
        parts.append(f"{m.value} lifetime var {lv:.2%}{'' if good_l else ' X'} consumed var "
                     f"{cv:.2%}{'' if good_c else ' X'}")
    return report(13, ok, "; ".join(parts) + f"; {tt}")


def criterion_14():
    res, t = sweep("region_side_m", (150.0, 200.0, 250.0))
    ok, tt = timing(t)
    parts = []
    for m in MOBILE:
        resid = res.series(m, "residual")
        dec = bool(np.all(np.diff(resid) < 0))
        ok &= dec
        parts.append(f"{m.value} residual {fmt(resid)}{'' if dec else ' X'}")
    cm = res.series("mobile_cm", "residual")
    ratio = cm[0] / cm[-1]
    ok &= ratio > 1.5
    parts.append(f"mobile_cm 150/250 ratio {ratio:.3f}{'' if ratio > 1.5 else ' X'}")
    for m in ALL_MODELS:
        cv = rel_variation(res.series(m, "consumed"))
        ok &= cv < 0.10
        parts.append(f"{m.value} consumed var {cv:.2%}{'' if cv < 0.10 else ' X'}")
    return report(14, ok, "; ".join(parts) + f"; {tt}")


def criterion_15():
    res, t = sweep("min_required_power_dbm", (-20.0, -10.0, 0.0, 5.0, 10.0))
    ok, tt = timing(t)
    parts = []
    for m in STATIC:
        rv = rel_variation(res.series(m, "residual"))
        motion = max(float(np.max(np.abs(res.point(v, m).motion))) for v in res.spec.values)
        good = rv < 0.10 and motion == 0.0
        ok &= good
        parts.append(f"{m.value} residual var {rv:.2%}, max motion {motion:g} J{'' if good else ' X'}")
    return report(15, ok, "; ".join(parts) + f"; {tt}")


# ---------------------------------------------------------------------------
# pytest entry points

# the PASS/FAIL lines are meant to be seen even when the test passes, so
# capture is switched off around each check

@pytest.mark.parametrize("n", range(1, 8))
def test_analytic(n, capsys):
    with capsys.disabled():
        assert globals()[f"criterion_{n}"]()


def test_determinism_and_ledger(tmp_path, capsys):
    with capsys.disabled():
        assert criterion_8(tmp_path)


@pytest.mark.parametrize("n", range(9, 16))
def test_trend(n, capsys):
    with capsys.disabled():
        assert globals()[f"criterion_{n}"]()


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        outcomes = [globals()[f"criterion_{n}"]() for n in range(1, 8)]
        outcomes.append(criterion_8(tmp))
        outcomes += [globals()[f"criterion_{n}"]() for n in range(9, 16)]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria pass")
