"""Fast invariant suite behind ``yamabe2 check``.

Each check is a small self-contained computation returning a measured
defect and the tolerance it is judged against.  The suite is deterministic
given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constants import ah_sandwich, sphere_yamabe
from .groundstate import closed_form_alpha_n1, shoot_ground_state
from .periodic import (
    PhasePortrait,
    first_N_yamabe,
    nodal_solutions,
    ode_residual,
    round_trip_defect,
    second_N_yamabe,
)
from .spectra import (
    ProductSpace,
    conformal_laplacian_spectrum,
    conformal_operator,
    fd_circle_operator,
    generalized_eigenvalues,
    operator_eigenvalues,
    round_sphere,
)

__all__ = ["CheckResult", "run_invariant_suite", "random_weight"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "defect": self.defect, "tolerance": self.tolerance, "passed": self.passed}


def random_weight(rng, n, modes=4, spread=0.8):
    """Smooth positive periodic weight built from a few random Fourier modes."""
    x = np.arange(n) * 2.0 * np.pi / n
    u = np.ones(n)
    for j in range(1, modes + 1):
        u += spread / modes * (rng.uniform(-1, 1) * np.cos(j * x) + rng.uniform(-1, 1) * np.sin(j * x))
    return np.abs(u) + 0.05


def _sandwich_ordering(rng):
    worst = -math.inf
    for k in range(3, 9):
        ys = sphere_yamabe(k)
        for Y in rng.uniform(0.0, ys, 1000):
            lo, hi = ah_sandwich(k, Y)
            worst = max(worst, lo - hi)
    return CheckResult("ah_sandwich lower <= upper (1000 Y per k)", max(worst, 0.0), 0.0)


def _scale_invariance(rng):
    s, a, p, ell = 2.0, 8.0, 6.0, 4.0 * math.pi
    base = nodal_solutions(ell, s, a, p, max_pairs=1)[0].value
    c = float(rng.uniform(0.2, 5.0))
    scaled = nodal_solutions(ell, s, a, p, max_pairs=1, lam=c ** (2.0 - p))[0].value
    return CheckResult(f"value scale invariance (c={c:.4f})", abs(scaled - base) / base, 1e-10)


def _residual():
    sol = nodal_solutions(4.0 * math.pi, 2.0, 8.0, 6.0, max_pairs=1)[0]
    return CheckResult("nodal ODE residual", float(np.max(np.abs(ode_residual(sol)))), 1e-8)


def _round_trip():
    P = PhasePortrait(2.0, 6.0, 4.0)
    worst = max(round_trip_defect(P, E) for E in (-0.5, -0.1, 0.3, 3.0))
    return CheckResult("period round trip", worst, 1e-8)


def _lemma():
    worst = 0.0
    for ell in (2 * math.pi, 4 * math.pi, 20.0, 60.0):
        first, _ = first_N_yamabe(ell, 2.0, 8.0, 6.0, 4 * math.pi)
        second, _ = second_N_yamabe(ell, 2.0, 8.0, 6.0, 4 * math.pi)
        worst = max(worst, 2.0 ** (2.0 / 3.0) * first - second)
    return CheckResult("second_N >= 2^(2/k) first_N", worst, 0.0)


def _conformal_identity(rng):
    n, p = 512, 6.0
    op = fd_circle_operator(2.0, 8.0, 2 * math.pi, n)
    u = random_weight(rng, n)
    v = rng.standard_normal(n)
    lhs = conformal_operator(op, u, p) @ v
    rhs = u ** (1.0 - p) * (op @ (u * v))
    return CheckResult("L_{G_u} v = u^(1-p) L_G(u v)", float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))), 1e-8)


def _sign_preservation(rng, weights=20):
    n, p, ell, a = 256, 6.0, 2 * math.pi, 8.0
    base = fd_circle_operator(0.0, a, ell, n)
    lam2 = operator_eigenvalues(base, 3)[1]
    bad = 0
    for shift in (-0.5 * lam2, -lam2, -1.5 * lam2):
        op = base + shift * sp.identity(n, format="csr")
        ref = operator_eigenvalues(op, 3)[1]
        ref_sign = 0 if abs(ref) < 1e-6 else int(np.sign(ref))
        for _ in range(weights):
            val = generalized_eigenvalues(op, random_weight(rng, n), p, 3)[1]
            sign = 0 if abs(val) < 1e-6 else int(np.sign(val))
            bad += sign != ref_sign
    return CheckResult("sign of lambda_2 under conformal weights", float(bad), 0.0)


def _spectral_oracle():
    worst = 0.0
    for t in (1.0, 4.0):
        P = ProductSpace(round_sphere(2), round_sphere(1), t)
        analytic = sorted({e.value for e in conformal_laplacian_spectrum(P, 4)})[1]
        ell = 2 * math.pi * math.sqrt(t)
        disc = operator_eigenvalues(fd_circle_operator(P.scalar, P.dimdata.a, ell, 4096), 3)[1]
        worst = max(worst, float(abs(disc - analytic) / analytic))
    return CheckResult("analytic vs discrete lambda_2 on S^2 x S^1", worst, 1e-4)


def _gn_closed_form():
    d = abs(shoot_ground_state(2, 1).alpha - closed_form_alpha_n1(2))
    return CheckResult("alpha_{2,1} shooting vs closed form", float(d), 1e-6)


def run_invariant_suite(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [
        _sandwich_ordering(rng),
        _scale_invariance(rng),
        _residual(),
        _round_trip(),
        _lemma(),
        _conformal_identity(rng),
        _sign_preservation(rng),
        _spectral_oracle(),
        _gn_closed_form(),
    ]
