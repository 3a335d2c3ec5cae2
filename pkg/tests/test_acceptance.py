"""One test per acceptance criterion; a summary line per criterion is printed at the end."""

import math
import time

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import record_acceptance
from yamabe2.checks import random_weight
from yamabe2.constants import ah_sandwich, n_product_lower_bound, sphere_volume, sphere_yamabe, y_rn_formula
from yamabe2.experiments import default_t_grid, paper_tables, sandwich_sweep, y2n_limit_sweep
from yamabe2.groundstate import closed_form_alpha_n1, shoot_ground_state
from yamabe2.periodic import (
    PhasePortrait,
    circumference,
    nodal_solutions,
    ode_residual,
    positive_solutions,
    round_trip_defect,
)
from yamabe2.spectra import (
    ProductSpace,
    conformal_laplacian_spectrum,
    conformal_operator,
    fd_circle_operator,
    generalized_eigenvalues,
    operator_eigenvalues,
    round_sphere,
)


def _check(number, title, passed, detail):
    record_acceptance(number, title, bool(passed), detail)
    assert passed, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture(scope="module")
def sandwich_16():
    t0 = time.perf_counter()
    res = sandwich_sweep(3, default_t_grid())
    return res, time.perf_counter() - t0


def test_criterion_01_alpha_22():
    t0 = time.perf_counter()
    a = shoot_ground_state(2, 2).alpha
    dt = time.perf_counter() - t0
    _check(1, "alpha_{2,2}", abs(a - 0.41343) <= 5e-4 and dt < 5.0, f"alpha={a:.8f} |diff|={abs(a - 0.41343):.2e} t={dt:.2f}s")


def test_criterion_02_alpha_33():
    t0 = time.perf_counter()
    a = shoot_ground_state(3, 3).alpha
    dt = time.perf_counter() - t0
    _check(2, "alpha_{3,3}", abs(a - 0.31257) <= 5e-4 and dt < 5.0, f"alpha={a:.8f} |diff|={abs(a - 0.31257):.2e} t={dt:.2f}s")


def test_criterion_03_closed_form_n1():
    diffs = {m: abs(shoot_ground_state(m, 1).alpha - closed_form_alpha_n1(m)) for m in (2, 3, 4)}
    _check(3, "shooting vs closed form, n=1", max(diffs.values()) <= 1e-6,
           ", ".join(f"m={m}: {d:.1e}" for m, d in diffs.items()))


def test_criterion_04_product_bounds():
    v22 = n_product_lower_bound(2, 2, 8 * math.pi, 0.41343)
    v33 = n_product_lower_bound(3, 3, sphere_yamabe(3), 0.31257)
    ok = abs(v22 - 84.01080) <= 1e-3 and abs(v33 - 119.33249) <= 1e-2
    _check(4, "S2xS2 and S3xS3 bounds", ok, f"{v22:.6f} (vs 84.01080), {v33:.6f} (vs 119.33249)")


def _sig10(a, b):
    return abs(a - b) <= 5e-10 * abs(b)


def test_criterion_05_tables():
    reps = {r.name: r for r in paper_tables()}
    cp2, rp3 = reps["Y2(CP^2)"], reps["Y2(RP^3)"]
    y3 = sphere_yamabe(3)
    ok = (_sig10(cp2.lower, 24 * math.pi) and _sig10(cp2.upper, 4 * math.sqrt(42) * math.pi)
          and _sig10(rp3.lower, y3) and _sig10(rp3.upper, 1.5 ** (2 / 3) * y3))
    # the CP^2 upper bound (Y^2 + Y(S^4)^2)^(1/2) = 4 sqrt(42) pi with Y = 12 sqrt(2) pi forces Y(S^4)
    forced = math.sqrt((4 * math.sqrt(42) * math.pi) ** 2 - (12 * math.sqrt(2) * math.pi) ** 2)
    ok = ok and _sig10(forced, 8 * math.sqrt(6) * math.pi) and _sig10(sphere_yamabe(4), forced)
    _check(5, "CP2 / RP3 tables", ok,
           f"CP2 [{cp2.lower:.10g}, {cp2.upper:.10g}] RP3 [{rp3.lower:.10g}, {rp3.upper:.10g}] Y(S4)={forced:.10g}")


def test_criterion_06_sandwich_convergence(sandwich_16):
    res, dt = sandwich_16
    target = 2 ** (2 / 3) * sphere_yamabe(3)
    last = res.records[-1]
    g_low = abs(last["lower"] - target) / target
    g_up = abs(last["second"] - target) / target
    ok = res.t_grid[-1] == pytest.approx(1e4) and len(res.t_grid) == 16 and g_low <= 0.01 and g_up <= 0.01 and dt < 60
    _check(6, "sandwich convergence on S2xS1", ok, f"gaps {g_low:.2e}/{g_up:.2e} at t=1e4, 16 points in {dt:.1f}s")


def test_criterion_07_limit_theorem():
    gaps = {}
    for d in (2, 3):
        M = round_sphere(d)
        res = y2n_limit_sweep(M, default_t_grid())
        target = 2 ** (2 / (d + 1)) * y_rn_formula(d, 1, M.scalar, M.volume, closed_form_alpha_n1(d))
        assert res.target == target
        gaps[d] = abs(res.records[-1]["second"] - target) / target
    _check(7, "second N-invariant limit", max(gaps.values()) <= 0.01,
           ", ".join(f"S{d}: gap {g:.2e}" for d, g in gaps.items()))


def test_criterion_08_lemma_inequality(sandwich_16):
    res, _ = sandwich_16
    other = y2n_limit_sweep(round_sphere(3), default_t_grid())
    bad = [r["t"] for rr in (res, other) for r in rr.records if not r["second"] >= r["lower"]]
    _check(8, "second_N >= 2^(2/k) first_N (exact)", not bad,
           f"{len(res.records) + len(other.records)} points, violations at {bad}")


def test_criterion_09_spectral_oracle():
    errs = {}
    for t in (1.0, 4.0, 100.0):
        P = ProductSpace(round_sphere(2), round_sphere(1), t)
        analytic = sorted({e.value for e in conformal_laplacian_spectrum(P, 4)})[1]
        assert analytic == pytest.approx(2 + 8 / t, rel=1e-14)
        disc = operator_eigenvalues(fd_circle_operator(P.scalar, P.dimdata.a, circumference(t), 4096), 3)[1]
        errs[t] = abs(disc - analytic) / analytic
    _check(9, "analytic vs 4096-point lambda_2", max(errs.values()) <= 1e-4,
           ", ".join(f"t={t:g}: {e:.1e}" for t, e in errs.items()))


def test_criterion_10_conformal_and_sign():
    rng = np.random.default_rng(2024)
    n, p, a, ell = 512, 6.0, 8.0, 2 * math.pi
    base = fd_circle_operator(0.0, a, ell, n)
    u = random_weight(rng, n)
    v = rng.standard_normal(n)
    lhs = conformal_operator(base + 2.0 * sp.identity(n), u, p) @ v
    rhs = u ** (1 - p) * ((base + 2.0 * sp.identity(n)) @ (u * v))
    ident = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    lam2 = operator_eigenvalues(base, 3)[1]
    mismatches = 0
    refs = []
    for shift in (-1.5 * lam2, -lam2, -0.5 * lam2):  # lambda_2 < 0, = 0, > 0
        op = (base + shift * sp.identity(n)).tocsr()
        ref = operator_eigenvalues(op, 3)[1]
        refs.append(ref)
        ref_sign = 0 if abs(ref) < 1e-6 else int(np.sign(ref))
        for _ in range(100):
            val = generalized_eigenvalues(op, random_weight(rng, n), p, 3)[1]
            mismatches += (0 if abs(val) < 1e-6 else int(np.sign(val))) != ref_sign
    ok = ident <= 1e-8 and mismatches == 0 and refs[0] < 0 and abs(refs[1]) < 1e-6 and refs[2] > 0
    _check(10, "conformal identity and sign of lambda_2", ok,
           f"identity defect {ident:.1e}, {mismatches} sign changes in 300 weights, base lambda_2 {[f'{r:.2g}' for r in refs]}")


def test_criterion_11_property_suite():
    s, a, p, vol = 2.0, 8.0, 6.0, 4 * math.pi
    rng = np.random.default_rng(11)
    # scale invariance of the value functional
    scale = 0.0
    for c in rng.uniform(0.2, 5.0, 4):
        base = nodal_solutions(4 * math.pi, s, a, p, max_pairs=1, vol_M=vol)[0].value
        scaled = nodal_solutions(4 * math.pi, s, a, p, max_pairs=1, vol_M=vol, lam=c ** (2 - p))[0].value
        scale = max(scale, abs(scaled - base) / base)
    # ODE residuals
    res = 0.0
    for ell in (2 * math.pi, 20.0, 100.0):
        for sol in nodal_solutions(ell, s, a, p, max_pairs=2) + positive_solutions(ell, s, a, p)[1:2]:
            res = max(res, float(np.max(np.abs(ode_residual(sol)))))
    # period round trip
    P = PhasePortrait(2.0, 6.0, 4.0)
    trip = max(round_trip_defect(P, E) for E in (-0.45, -0.2, -0.01, 0.01, 0.5, 5.0))
    # sandwich ordering on a 1000-point grid
    order_ok = True
    for k in range(3, 9):
        for Y in np.linspace(0.0, sphere_yamabe(k), 1000):
            lo, hi = ah_sandwich(k, Y)
            order_ok &= lo <= hi
    ok = scale <= 1e-10 and res <= 1e-8 and trip <= 1e-8 and order_ok
    _check(11, "property suite", ok,
           f"scale {scale:.1e}, residual {res:.1e}, round trip {trip:.1e}, sandwich ordering {'ok' if order_ok else 'violated'}")


def test_sphere_volume_used_in_targets_is_exact():
    # supporting check for criteria 6-7: S^2 volume enters the targets
    assert sphere_volume(2) == pytest.approx(4 * math.pi, rel=1e-15)
