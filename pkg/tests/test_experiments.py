import math
import warnings

import numpy as np
import pytest

from yamabe2.constants import product_constants, sphere_volume, sphere_yamabe
from yamabe2.errors import ValidationError
from yamabe2.experiments import (
    PAPER_ALPHA,
    crossover_scalar,
    default_t_grid,
    paper_tables,
    sandwich_sweep,
    strict_upper_check,
    y2n_limit_sweep,
)
from yamabe2.groundstate import closed_form_alpha_n1
from yamabe2.spectra import abstract_manifold, round_sphere

GRID = [1.0, 10.0, 100.0, 1000.0, 1e4]


@pytest.fixture(scope="module")
def s2_sandwich():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sandwich_sweep(3, GRID)


def test_default_grid():
    g = default_t_grid()
    assert g.size == 16 and g[0] == 1.0 and g[-1] == pytest.approx(1e4)
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))
    with pytest.raises(ValidationError):
        default_t_grid(10.0, 1.0, 4)


def test_sandwich_target_and_verdict(s2_sandwich):
    assert s2_sandwich.target == pytest.approx(2 ** (2 / 3) * sphere_yamabe(3), rel=1e-15)
    assert s2_sandwich.target == pytest.approx(69.565, abs=1e-2)
    assert s2_sandwich.verdict
    assert s2_sandwich.final_gap <= 0.01


def test_sandwich_envelopes_ordered(s2_sandwich):
    for r in s2_sandwich.records:
        assert r["lower"] <= r["second"]
        assert r["lemma_holds"]


def test_sandwich_reference_lines(s2_sandwich):
    assert s2_sandwich.reference_lines[2] == pytest.approx(s2_sandwich.target, rel=1e-9)
    assert s2_sandwich.reference_lines[3] == pytest.approx(3 ** (2 / 3) * sphere_yamabe(3), rel=1e-9)


def test_sandwich_target_cross_formula():
    # target equals 2^(2/3) A_{2,1} (unit-volume s)^(2/3) / alpha_{2,1}
    s_unit = 2.0 * sphere_volume(2)
    formula = 2 ** (2 / 3) * product_constants(2, 1).A * s_unit ** (2 / 3) / closed_form_alpha_n1(2)
    assert formula == pytest.approx(2 ** (2 / 3) * sphere_yamabe(3), rel=1e-3)


def test_sweep_sorted_and_serialisable(s2_sandwich):
    d = s2_sandwich.to_dict()
    assert d["verdict"] == "pass"
    ts = [r["t"] for r in d["records"]]
    assert ts == sorted(ts)
    rows = list(s2_sandwich.csv_rows())
    assert len(rows) == len(GRID) and len(rows[0]) == len(s2_sandwich.CSV_COLUMNS)


def test_sweep_order_independent():
    a = sandwich_sweep(3, [100.0, 1.0, 10.0])
    b = sandwich_sweep(3, [1.0, 10.0, 100.0])
    assert a.to_dict() == b.to_dict()


def test_sweep_validation():
    with pytest.raises(ValidationError):
        sandwich_sweep(2, GRID)
    with pytest.raises(ValidationError):
        sandwich_sweep(3, [1.0, -2.0])
    with pytest.raises(ValidationError):
        y2n_limit_sweep(abstract_manifold(2, -1.0, 1.0), GRID)


@pytest.mark.parametrize("d", [2, 3])
def test_limit_sweep(d):
    res = y2n_limit_sweep(round_sphere(d), GRID)
    assert res.verdict
    assert res.target == pytest.approx(2 ** (2 / (d + 1)) * sphere_yamabe(d + 1), rel=1e-10)


def test_limit_sweep_solver_alpha_agrees():
    a = y2n_limit_sweep(round_sphere(2), [1e4])
    b = y2n_limit_sweep(round_sphere(2), [1e4], use_solver_alpha=True)
    assert b.target == pytest.approx(a.target, rel=1e-8)


def test_limit_sweep_on_abstract_factor():
    # s = 2 on a unit-volume surface is a rescaled sphere setting; only the
    # constant-curvature data enter
    M = abstract_manifold(2, 2.0, 4 * math.pi)
    res = y2n_limit_sweep(M, [1.0, 1e4])
    assert res.verdict


def test_soft_warning_on_non_monotone_gap():
    from yamabe2.experiments import ConvergenceWarning, _soft_monotone

    notes = []
    with pytest.warns(ConvergenceWarning):
        _soft_monotone([{"gap": g} for g in (0.3, 0.2, 0.25, 0.1)], "gap", "demo", notes)
    assert notes
    quiet = []
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _soft_monotone([{"gap": g} for g in (0.3, 0.2, 0.1)], "gap", "demo", quiet)
    assert not quiet


def test_strict_upper_report():
    rep = strict_upper_check(3, [1.0, 100.0, 1e4])
    assert len(rep.records) == 3
    for r in rep.records:
        assert r["margin"] == pytest.approx(r["upper"] - r["second"])
    # both sides share the limit 2^(2/3) Y(S^3) for a circle factor
    last = rep.records[-1]
    assert last["upper"] == pytest.approx(last["second"], rel=1e-9)
    assert "n >= 2" in rep.note
    assert rep.to_dict()["m"] == 3


def test_paper_tables():
    reps = {r.name: r for r in paper_tables()}
    cp2 = reps["Y2(CP^2)"]
    assert cp2.lower == pytest.approx(24 * math.pi, rel=1e-14)
    assert cp2.upper == pytest.approx(4 * math.sqrt(42) * math.pi, rel=1e-14)
    rp3 = reps["Y2(RP^3)"]
    assert rp3.lower == pytest.approx(sphere_yamabe(3), rel=1e-14)
    assert rp3.upper == pytest.approx(1.5 ** (2 / 3) * sphere_yamabe(3), rel=1e-14)
    for k in range(3, 9):
        r = reps[f"Y2(S^{k - 1} x S^1)"]
        assert r.lower == r.upper == pytest.approx(2 ** (2 / k) * sphere_yamabe(k))
        assert reps[f"Y2(S^{k} + S^{k})"].lower == pytest.approx(2 ** (2 / k) * sphere_yamabe(k))
    assert reps["Y2_S^2(S^2 x S^2)"].lower == pytest.approx(84.01080, abs=1e-3)
    assert reps["Y2_S^3(S^3 x S^3)"].lower == pytest.approx(119.33249, abs=1e-2)


def test_paper_tables_deterministic():
    a = [r.to_dict() for r in paper_tables()]
    b = [r.to_dict() for r in paper_tables()]
    assert a == b


def test_paper_tables_solver_alpha():
    reps = {r.name: r for r in paper_tables(use_paper_alpha=False)}
    assert reps["Y2_S^2(S^2 x S^2)"].lower == pytest.approx(84.0108, abs=5e-3)


def test_crossover_scalar():
    for (m, n), alpha in PAPER_ALPHA.items():
        s_star = crossover_scalar(m, n, alpha)
        assert math.isfinite(s_star) and s_star > 0
        A = product_constants(m, n).A
        assert A * s_star ** (m / (m + n)) / alpha == pytest.approx(sphere_yamabe(m + n), rel=1e-12)
    # for n = 1 the round sphere sits exactly on the crossover
    s_star = crossover_scalar(2, 1, closed_form_alpha_n1(2))
    assert s_star == pytest.approx(2.0 * sphere_volume(2), rel=1e-12)
    with pytest.raises(ValidationError):
        crossover_scalar(2, 2, 0.0)
