"""Acceptance criteria, each exercised in double and single precision.

Every criterion records its outcome per precision; the session summary
(see ``conftest.py``) prints one PASS/FAIL line per criterion.  Run on
its own with ``pytest tests/test_acceptance.py -v``.
"""
from __future__ import annotations

import functools
import io
import json
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from conftest import Instance, face_slices, rel_err
from mpdata import MpdataOptions, MpdataSolver, make_preset, total_mass
from mpdata import kernels as K
from mpdata.config import from_dict
from mpdata.diagnostics import Timers, error_norms
from mpdata.driver import EXIT_OK, EXIT_REFERENCE, main, run_simulation

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

PRECISIONS = ("f64", "f32")
DTYPE = {"f64": np.float64, "f32": np.float32}
EP = {"f64": 1e-10, "f32": 1e-6}
ORACLE_TOL = {"f64": 1e-14, "f32": 1e-5}
SLACK = {"f64": 1e-12, "f32": 1e-4}
# conservation bounds are stated for double; single precision scales them
# by the ratio of machine epsilons
EPS_SCALE = {"f64": 1.0,
             "f32": float(np.finfo(np.float32).eps / np.finfo(np.float64).eps)}

TITLES = {
    1: "oracle equivalence of the five kernels",
    2: "FCT monotonicity on cart32",
    3: "mass conservation on cart32",
    4: "sine1d convergence order",
    5: "cart32 accuracy: gauge vs upwind",
    6: "decomposition and worker independence",
    7: "spherical over-pole rotation",
    8: "reference-norm regression mechanism",
    9: "timer report",
    10: "precision switch",
}
RESULTS: dict[int, dict[str, tuple[bool, str]]] = {}


def summary_lines() -> list[str]:
    lines = []
    for num, title in TITLES.items():
        got = RESULTS.get(num)
        if not got:
            continue
        ok = all(v[0] for v in got.values())
        parts = "; ".join(f"{p}: {d}" for p, (_, d) in got.items())
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {num:>2} ({title}) | {parts}")
    return lines


def criterion(num):
    """Record the outcome of a per-precision check under ``num``."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(prec, *args, **kw):
            try:
                detail = fn(prec, *args, **kw)
            except Exception as exc:
                RESULTS.setdefault(num, {})[prec] = (False, str(exc).splitlines()[0])
                raise
            RESULTS.setdefault(num, {})[prec] = (True, detail)
        return wrapper
    return deco


def _solve(p, opts, nsteps, callback=None, **kw):
    with MpdataSolver(p.grid, p.vel, opts, p.boundaries, **kw) as s:
        s.set_tracer(p.initial)
        s.run(nsteps, callback)
        return s.tracer()


def _l2(p, opts):
    return error_norms(_solve(p, opts, p.steps_per_period), p.initial).err0


# ---------------------------------------------------------------------------------------

@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(1)
def test_criterion_01_oracle_equivalence(prec):
    dt, ep, tol = DTYPE[prec], EP[prec], ORACLE_TOL[prec]
    rng = np.random.default_rng(1)
    worst = dict.fromkeys(["upwind", "pseudo", "extrema", "fct", "corrective"], 0.0)
    t0 = time.perf_counter()
    count = 100
    for n in range(count):
        inst = Instance(rng, dt)
        variant = ("gauge", "standard")[n % 2]
        fct = (n // 2) % 2 == 0
        h, G, rhr = inst.static
        inner = inst.grid.interior_slices

        got = K.upwind_pass(inst.x_in, inst.vel, inst.grid)
        want = oracles.upwind(inst.x_in.data, *inst.vel.components, h, G, rhr, inst.shape, inst.H)
        worst["upwind"] = max(worst["upwind"], rel_err(got.data, want, inner))

        pv = K.pseudo_velocities(inst.xant, inst.vel, inst.grid, variant, ep)
        want = oracles.pseudo_velocities(inst.xant.data, *inst.vel.components, h, G,
                                         inst.shape, inst.H, variant, ep)
        for d in range(3):
            e = rel_err(pv.components[d], want[d], face_slices(inst.grid, d))
            worst["pseudo"] = max(worst["pseudo"], e)

        mx, mn = K.local_extrema(inst.x_in, inst.xant)
        wmx, wmn = oracles.extrema(inst.x_in.data, inst.xant.data, inst.shape, inst.H)
        worst["extrema"] = max(worst["extrema"], rel_err(mx.data, wmx, inner),
                               rel_err(mn.data, wmn, inner))

        cp, cn = K.fct_coefficients(inst.xant, mx, mn, pv, inst.grid, ep, variant)
        wcp, wcn = oracles.limiters(inst.xant.data, mx.data, mn.data, *pv.components, h, G,
                                    inst.shape, inst.H, ep, variant)
        worst["fct"] = max(worst["fct"], rel_err(cp.data, wcp, inner), rel_err(cn.data, wcn, inner))

        got = K.corrective_pass(inst.xant, pv, cp, cn, inst.grid, fct, variant)
        want = oracles.corrective(inst.xant.data, *pv.components, cp.data, cn.data, h, G, rhr,
                                  inst.shape, inst.H, fct, variant)
        worst["corrective"] = max(worst["corrective"], rel_err(got.data, want, inner))
    elapsed = time.perf_counter() - t0
    detail = (f"{count} instances, worst rel err "
              + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f} s")
    assert all(v <= tol for v in worst.values()), f"tolerance {tol:g} exceeded: {detail}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f} s >= 10 s"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(2)
def test_criterion_02_fct_monotonicity(prec):
    p = make_preset("cart32", dtype=DTYPE[prec])
    inner = p.grid.interior_slices
    cmax = max(float(np.abs(c[inner]).max()) for c in p.vel.components)
    assert cmax <= 0.5, f"max |C| = {cmax}"
    lo, hi = float(p.initial.interior.min()), float(p.initial.interior.max())
    seen = {"min": lo, "max": hi, "steps": 0}

    def check(s):
        x = s.tracer().interior
        seen["min"] = min(seen["min"], float(x.min()))
        seen["max"] = max(seen["max"], float(x.max()))
        seen["steps"] += 1

    t0 = time.perf_counter()
    _solve(p, MpdataOptions("standard", fct=True, precision=prec), p.steps_per_period, check)
    elapsed = time.perf_counter() - t0
    under, over = lo - seen["min"], seen["max"] - hi
    detail = (f"{seen['steps']} steps checked, undershoot {under:.1e}, overshoot {over:.1e}, "
              f"max |C| {cmax:.3f}, {elapsed:.1f} s")
    assert under <= SLACK[prec] and over <= SLACK[prec], f"bounds violated: {detail}"
    assert elapsed < 60.0, f"runtime {elapsed:.1f} s >= 60 s"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(3)
def test_criterion_03_conservation(prec):
    p = make_preset("cart32", dtype=DTYPE[prec])
    assert np.all(p.grid.rhr == 1)
    m0 = total_mass(p.initial)
    track = {"prev": m0, "step": 0.0}

    def check(s):
        m = total_mass(s.tracer())
        track["step"] = max(track["step"], abs(m - track["prev"]) / abs(m0))
        track["prev"] = m

    _solve(p, MpdataOptions("gauge", precision=prec), p.steps_per_period, check)
    total = abs(track["prev"] - m0) / abs(m0)
    tol_step, tol_rev = 1e-13 * EPS_SCALE[prec], 1e-11 * EPS_SCALE[prec]
    detail = (f"worst per-step drift {track['step']:.1e} (<= {tol_step:.1e}), "
              f"per revolution {total:.1e} (<= {tol_rev:.1e})")
    assert track["step"] <= tol_step and total <= tol_rev, f"drift too large: {detail}"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(4)
def test_criterion_04_convergence_order(prec):
    t0 = time.perf_counter()
    err = {}
    for n in (64, 128):
        p = make_preset("sine1d", dtype=DTYPE[prec], n=n, courant=0.5)
        err["gauge", n] = _l2(p, MpdataOptions("gauge", fct=False, precision=prec))
        err["upwind", n] = _l2(p, MpdataOptions("gauge", precision=prec, upwind_only=True))
    elapsed = time.perf_counter() - t0
    rg = err["gauge", 64] / err["gauge", 128]
    ru = err["upwind", 64] / err["upwind", 128]
    detail = (f"gauge ratio {rg:.3f} (target [3.4, 4.6]), upwind ratio {ru:.3f} "
              f"(target [1.8, 2.2]), {elapsed:.1f} s")
    assert 3.4 <= rg <= 4.6 and 1.8 <= ru <= 2.2, f"ratio out of range: {detail}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f} s >= 10 s"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(5)
def test_criterion_05_accuracy_ordering(prec):
    p = make_preset("cart32", dtype=DTYPE[prec])
    g = _l2(p, MpdataOptions("gauge", fct=False, precision=prec))
    u = _l2(p, MpdataOptions("gauge", precision=prec, upwind_only=True))
    detail = f"gauge L2 {g:.4f}, upwind L2 {u:.4f}, ratio {g / u:.3f} (target < 0.5)"
    assert g < 0.5 * u, f"ordering not met: {detail}"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(6)
def test_criterion_06_decomposition_independence(prec, tmp_path):
    base = {"preset": "cart32", "variant": "gauge", "fct": True, "precision": prec,
            "nsteps": 60, "iout": 10}
    outputs = {}
    for dec in ((1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2)):
        for workers in (1, 2, 3, 4):
            out = tmp_path / f"{'x'.join(map(str, dec))}_w{workers}"
            cfg = from_dict(dict(base, decomposition=list(dec), workers=workers, output=str(out)))
            res = run_simulation(cfg, out=io.StringIO())
            assert res.status == EXIT_OK, f"run {dec} w{workers} exited {res.status}"
            outputs[dec, workers] = (out / "norms.csv").read_bytes()
    ref = outputs[(1, 1, 1), 1]
    differ = [k for k, v in outputs.items() if v != ref]
    detail = f"{len(outputs)} runs, {len(differ)} differ from the single-domain CSV"
    assert not differ, f"{detail}: {differ}"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(7)
def test_criterion_07_sphere_over_pole(prec):
    p = make_preset("sphere-pole", dtype=DTYPE[prec])
    assert p.grid.shape[:2] == (128, 64)
    lo, hi = float(p.initial.interior.min()), float(p.initial.interior.max())
    m0 = total_mass(p.initial)
    seen = {"min": lo, "max": hi, "drift": 0.0}

    def check(s):
        x = s.tracer()
        seen["min"] = min(seen["min"], float(x.interior.min()))
        seen["max"] = max(seen["max"], float(x.interior.max()))
        seen["drift"] = max(seen["drift"], abs(total_mass(x) - m0) / m0)

    t0 = time.perf_counter()
    final = _solve(p, MpdataOptions("sphere", fct=True, precision=prec), p.steps_per_period,
                   check)
    elapsed = time.perf_counter() - t0
    assert np.isfinite(final.interior).all()
    mp = error_norms(final, p.initial).err0
    up = _l2(p, MpdataOptions("sphere", precision=prec, upwind_only=True))
    tol_mass = 1e-11 * EPS_SCALE[prec]
    under, over = lo - seen["min"], seen["max"] - hi
    detail = (f"{p.steps_per_period} steps in {elapsed:.1f} s, mass drift {seen['drift']:.1e} "
              f"(<= {tol_mass:.1e}), L2 {mp:.4f} vs upwind {up:.4f}, "
              f"undershoot {under:.1e}, overshoot {over:.1e}")
    assert seen["drift"] <= tol_mass, f"mass drift: {detail}"
    assert mp < up, f"not more accurate than upwind: {detail}"
    assert under <= SLACK[prec] and over <= SLACK[prec], f"extrema not bounded: {detail}"
    assert elapsed < 120.0, f"runtime: {detail}"
    return detail


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(8)
def test_criterion_08_regression_mechanism(prec, tmp_path):
    name = "sine1d_gauge.json" if prec == "f64" else "sine1d_gauge_f32.json"
    raw = json.loads((CONFIGS / name).read_text())
    assert raw["precision"] == prec
    tol = raw["reference"]["tol"]

    path = tmp_path / name
    path.write_text(json.dumps(raw))
    status = main(["--config", str(path), "--output", str(tmp_path / "stored")])
    assert status == EXIT_OK, f"stored reference exited {status}"

    def run(**delta):
        ref = dict(raw["reference"])
        for k, v in delta.items():
            ref[k] += v
        cfg = from_dict(dict(raw, reference=ref, output=str(tmp_path / "p")))
        return run_simulation(cfg, out=io.StringIO())

    inside = run(err0=0.5 * tol, linf=-0.5 * tol)
    assert inside.status == EXIT_OK, "perturbation within tolerance rejected"
    for key in ("err0", "linf"):
        res = run(**{key: 10 * tol})
        assert res.status == EXIT_REFERENCE and res.failures == [key], \
            f"{key} perturbed by 10 tol gave status {res.status}"
    return f"{name} passes as stored, fails with err0 or linf moved by 10 x tol ({tol:g})"


@pytest.mark.parametrize("prec", PRECISIONS)
@criterion(9)
def test_criterion_09_timer_report(prec, tmp_path):
    cfg = from_dict({"preset": "cart32", "variant": "standard", "fct": True, "precision": prec,
                     "nsteps": 20, "iout": 1, "dump_fields": True, "decomposition": [2, 1, 1],
                     "workers": 2, "output": str(tmp_path / "t")})
    t0 = time.perf_counter()
    res = run_simulation(cfg, out=io.StringIO())
    wall = time.perf_counter() - t0
    assert res.status == EXIT_OK
    r = res.report
    phases = ("upwind_pass", "local_extrema", "pseudo_velocities", "fct_coefficients",
              "corrective_pass", "halo_update", "mpdata_step", "timeloop", "initialization",
              "output")
    for name in phases:
        row = r[name]
        assert row.calls >= 1 and not row.malformed, f"{name}: {row}"
        assert row.min <= row.avg <= row.max, f"{name}: min/avg/max out of order"
    loop, init, out = r["timeloop"].max, r["initialization"].max, r["output"].max
    assert loop >= r["mpdata_step"].max, "timeloop shorter than the steps it contains"
    assert loop + init + out <= wall, "timeloop overlaps initialization or output"
    return (f"{len(phases)} routines present, timeloop {loop:.2f} s + init {init:.2f} s "
            f"+ output {out:.2f} s <= wall {wall:.2f} s")


@pytest.mark.parametrize("prec", ["both"])
@criterion(10)
def test_criterion_10_precision_switch(prec):
    p = make_preset("cart32", dtype=np.float32)
    opts = MpdataOptions(precision="f32")
    with MpdataSolver(p.grid, p.vel, opts, p.boundaries, timers=Timers()) as s:
        s.set_tracer(p.initial)
        s.step()
        assert s.tracer().data.dtype == np.float32
        assert all(c.dtype == np.float32 for c in s.vel[0].components)
    assert MpdataOptions(precision="f32").ep == 1e-6
    missing = [n for n in range(1, 10) if set(RESULTS.get(n, {})) != set(PRECISIONS)]
    assert not missing, f"criteria {missing} did not run in both precisions"
    diverge = [n for n in range(1, 10) if RESULTS[n]["f32"][0] != RESULTS[n]["f64"][0]]
    assert not diverge, f"criteria {diverge} change outcome between precisions"
    return "criteria 1-9 ran in both precisions with identical outcomes; single-precision state stays float32"


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
