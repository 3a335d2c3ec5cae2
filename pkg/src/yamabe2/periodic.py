"""Periodic solutions of the one-dimensional Yamabe equation on a circle.

For ``(M x S^1, g + t h)`` with constant ``s_g`` and functions of the circle
variable only, the Yamabe equation reduces to

    -a w'' + s w = lam |w|^(p-2) w,        x in R / ell Z,

with ``a = a_k``, ``p = p_k``, ``k = dim M + 1`` and ``ell = 2 pi sqrt(t)``.
It is Hamiltonian: ``(a/2) w'^2 + V(w) = E`` with
``V(u) = -s u^2 / 2 + lam |u|^p / p``.  Positive non-constant solutions are
closed orbits inside one well (``V(u*) < E < 0``), sign-changing ones are
the orbits around both wells (``E > 0``).  A solution with ``j`` copies of
an orbit of period ``T`` exists on the circle iff ``j T = ell``.

Periods and ``L^p`` integrals are computed in the phase plane.  Near ``u = 0``
the substitution ``u = u_lo cosh(sigma)`` (well) or
``u = sqrt(2E/s) sinh(sigma)`` (sign-changing) turns the logarithmic
approach to the saddle into a bounded integrand; near the outer turning
point ``u = u_hi - tau^2`` removes the inverse square root.  Both are done
with composite Gauss-Legendre panels.  Orbits are parametrised by
``log u_lo`` and ``log sqrt(2E/s)`` so that separatrix-hugging orbits
(periods of several hundred) stay representable.

The scale-free quantity attached to a solution is

    value = lam * (vol_M * int_0^ell |w|^p dx)^(2/k),     2/k = (p-2)/p,

which is invariant under ``w -> c w`` (``lam -> lam c^(2-p)``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import beta as beta_fn

from .errors import AccuracyError, ValidationError

__all__ = [
    "PhasePortrait",
    "PeriodicSolution",
    "circumference",
    "period_integral",
    "positive_solutions",
    "nodal_solutions",
    "first_N_yamabe",
    "second_N_yamabe",
    "ode_residual",
    "energy_defect",
    "round_trip_defect",
]

log = logging.getLogger(__name__)

_GL_X, _GL_W = leggauss(16)
_SIGMA_PANEL = 0.25
_TAU_PANELS = 32
# Below this |E| / |V(u*)| the lobe integral is taken from its linearisation
# at the separatrix, where direct quadrature can no longer resolve the
# difference between neighbouring energies.
_LINEAR_REGIME = 1e-8
PROFILE_GRID = 4096


def circumference(t: float) -> float:
    """Length of the circle factor of ``g + t g_0^1``."""
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")
    return 2.0 * math.pi * math.sqrt(t)


# -- numerically safe elementary pieces ----------------------------------


def _logcosh(x):
    x = np.abs(x)
    small = x < 1.0
    xs = np.where(small, x, 0.0)
    xl = np.where(small, 1.0, x)
    return np.where(small, np.log1p(2.0 * np.sinh(xs / 2.0) ** 2), xl + np.log1p(np.exp(-2.0 * xl)) - math.log(2.0))


def _logsinh(x):
    small = x < 20.0
    xs = np.where(small, x, 1.0)
    xl = np.where(small, 20.0, x)
    with np.errstate(divide="ignore"):
        return np.where(small, np.log(np.sinh(xs)), xl - math.log(2.0) + np.log1p(-np.exp(-2.0 * xl)))


def _log_expm1(x):
    big = x > 30.0
    xs = np.where(big, 1.0, x)
    xb = np.where(big, x, 31.0)
    return np.where(big, xb + np.log1p(-np.exp(-xb)), np.log(np.expm1(xs)))


def _acosh_exp(y):
    """``arccosh(exp(y))`` for ``y >= 0`` without overflow."""
    return math.acosh(math.exp(y)) if y < 20 else y + math.log(2.0) + math.log1p(-math.exp(-2 * y) / 4)


def _asinh_exp(y):
    """``arcsinh(exp(y))`` without overflow."""
    return math.asinh(math.exp(y)) if y < 20 else y + math.log(2.0) + math.log1p(math.exp(-2 * y) / 4)


class _Panels:
    """Composite Gauss-Legendre rule on ``[0, L]`` with cumulative sums."""

    def __init__(self, length, count, integrand):
        self.length = length
        self.edges = np.linspace(0.0, length, count + 1)
        self.f = integrand
        half = np.diff(self.edges)[:, None] / 2.0
        mid = (self.edges[:-1] + self.edges[1:])[:, None] / 2.0
        self.nodes = mid + half * _GL_X
        self.weights = half * _GL_W
        self.values = integrand(self.nodes)
        per_panel = np.sum(self.values * self.weights, axis=1)
        self.cumulative = np.concatenate([[0.0], np.cumsum(per_panel)])

    @property
    def total(self):
        return self.cumulative[-1]

    def integrate(self, g):
        """``int_0^L g(y) f(y) dy`` for a second factor ``g``."""
        return float(np.sum(g(self.nodes) * self.values * self.weights))

    def primitive(self, y):
        y = np.clip(np.asarray(y, dtype=float), 0.0, self.length)
        i = np.clip(np.searchsorted(self.edges, y, side="right") - 1, 0, len(self.edges) - 2)
        left = self.edges[i]
        half = (y - left)[..., None] / 2.0
        pts = left[..., None] + half * (1.0 + _GL_X)
        return self.cumulative[i] + np.sum(self.f(pts) * half * _GL_W, axis=-1)

    def invert(self, target):
        """Solve ``primitive(y) = target`` by Newton from panel-wise interpolation."""
        target = np.clip(np.asarray(target, dtype=float), 0.0, self.total)
        y = np.interp(target, self.cumulative, self.edges)
        for _ in range(50):
            step = (self.primitive(y) - target) / self.f(y)
            y = np.clip(y - step, 0.0, self.length)
            if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(y))):
                break
        return y


@dataclass(frozen=True)
class PhasePortrait:
    """Hamiltonian data of ``a w'' = s w - lam |w|^(p-2) w``."""

    s: float
    a: float
    p: float
    lam: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError(f"s must be positive, got {self.s}")
        if not self.a > 0:
            raise ValidationError(f"a must be positive, got {self.a}")
        if not self.p > 2:
            raise ValidationError(f"p must exceed 2, got {self.p}")
        if not self.lam > 0:
            raise ValidationError(f"lam must be positive, got {self.lam}")

    @property
    def u_star(self) -> float:
        """Centres of the two wells, ``+-(s/lam)^(1/(p-2))``."""
        return (self.s / self.lam) ** (1.0 / (self.p - 2.0))

    @property
    def u_zero(self) -> float:
        """Positive zero of ``V``, where the separatrix turns."""
        return (self.p * self.s / (2.0 * self.lam)) ** (1.0 / (self.p - 2.0))

    def potential(self, u):
        u = np.asarray(u, dtype=float)
        return -self.s * u**2 / 2.0 + self.lam * np.abs(u) ** self.p / self.p

    def force(self, u):
        """``-V'(u)``; the ODE reads ``a w'' = -V'(w)``."""
        u = np.asarray(u, dtype=float)
        return self.s * u - self.lam * np.abs(u) ** (self.p - 2.0) * u

    @property
    def v_star(self) -> float:
        return float(self.potential(self.u_star))

    @property
    def harmonic_period(self) -> float:
        """Limit of the well period at the bottom: ``2 pi sqrt(a / ((p-2) s))``."""
        return 2.0 * math.pi * math.sqrt(self.a / ((self.p - 2.0) * self.s))

    def period(self, E: float) -> float:
        return period_integral(self, E)

    @cached_property
    def homoclinic_integral(self) -> float:
        """``int_R w^p`` over the separatrix solution (closed form)."""
        p = self.p
        return self.u_zero**p * math.sqrt(self.a / self.s) * 2.0 / (p - 2.0) * beta_fn(p / (p - 2.0), 0.5)

    @cached_property
    def lobe_slope(self) -> float:
        """Derivative in E of the lobe integral at the separatrix (central difference)."""
        h = 1e-6 * abs(self.v_star)
        up = _Orbit.nodal(self, 0.5 * math.log(2.0 * h / self.s))
        down = _Orbit.well(self, _well_eta_from_energy(self, -h))
        return (up.direct_lobe_integral - down.direct_lobe_integral) / (up.energy - down.energy)


def _well_eta_from_energy(P, E):
    if not P.v_star < E < 0:
        raise ValidationError(f"well energy must lie in ({P.v_star}, 0), got {E}")
    guess = 0.5 * math.log(2.0 * abs(E) / P.s)
    top = math.log(P.u_star)

    def f(eta):
        return float(P.potential(math.exp(eta))) - E

    lo = min(guess - 2.0, top - 1e-3)
    while f(lo) <= 0:
        lo -= 2.0
    return brentq(f, lo, top, xtol=1e-15, rtol=4 * np.finfo(float).eps)


class _Orbit:
    """One closed orbit: period, lobe integral and the descending branch."""

    def __init__(self, P: PhasePortrait, kind: str, param: float):
        self.P = P
        self.kind = kind
        self.param = param
        s, p, lam = P.s, P.p, P.lam
        ustar = P.u_star
        if kind == "well":
            self.u_lo = math.exp(param)
            self.energy = float(P.potential(self.u_lo))
            lo, hi = ustar, P.u_zero
            self.sigma_end = _acosh_exp(math.log(ustar) - param)
        else:
            self.u_lo = 0.0
            self.energy = s * math.exp(2.0 * param) / 2.0
            lo, hi = P.u_zero, 2.0 * P.u_zero
            while float(P.potential(hi)) <= self.energy:
                hi *= 2.0
            self.sigma_end = _asinh_exp(math.log(ustar) - param)
        E = self.energy

        def g(u):
            return float(P.potential(u)) - E

        if g(lo) >= 0:
            # energy indistinguishable from the level at the bracket end
            self.u_hi = lo
        else:
            self.u_hi = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        self.tau_end = math.sqrt(max(self.u_hi - ustar, 0.0))

        n_sigma = max(4, int(math.ceil(self.sigma_end / _SIGMA_PANEL)))
        self.low = _Panels(self.sigma_end, n_sigma, self._dx_dsigma)
        self.top = _Panels(self.tau_end, _TAU_PANELS, self._dx_dtau)

    @classmethod
    def well(cls, P, eta):
        return cls(P, "well", eta)

    @classmethod
    def nodal(cls, P, beta):
        return cls(P, "nodal", beta)

    # integrands ----------------------------------------------------------

    def _log_r(self, sigma):
        P = self.P
        p = P.p
        base = math.log(P.lam) + (p - 2.0) * self.param - math.log(p)
        if self.kind == "well":
            # R is smooth at sigma = 0; keep the log form away from 0/0
            sigma = np.maximum(sigma, 1e-8)
            return base + _log_expm1(p * _logcosh(sigma)) - 2.0 * _logsinh(sigma)
        return base + p * _logsinh(sigma) - 2.0 * _logcosh(sigma)

    def _dx_dsigma(self, sigma):
        P = self.P
        return np.sqrt(P.a / (P.s - 2.0 * np.exp(self._log_r(sigma))))

    def u_of_sigma(self, sigma):
        if self.kind == "well":
            return np.exp(self.param + _logcosh(sigma))
        return np.exp(self.param + _logsinh(sigma))

    def _gap_over_tau2(self, tau):
        """``(V(u_hi) - V(u_hi - tau^2)) / tau^2`` without cancellation."""
        P = self.P
        uh, p = self.u_hi, P.p
        t2 = np.maximum(tau, 1e-8) ** 2
        quad_part = -P.s / 2.0 * (2.0 * uh - t2)
        pow_part = -P.lam * uh**p / p * np.expm1(p * np.log1p(-t2 / uh)) / t2
        return quad_part + pow_part

    def _dx_dtau(self, tau):
        return np.sqrt(2.0 * self.P.a / self._gap_over_tau2(tau))

    def u_of_tau(self, tau):
        return self.u_hi - tau**2

    # derived quantities --------------------------------------------------

    @property
    def half_branch(self) -> float:
        """Time from the maximum down to ``u_lo`` (well) or to zero (nodal)."""
        return self.low.total + self.top.total

    @property
    def period(self) -> float:
        return (2.0 if self.kind == "well" else 4.0) * self.half_branch

    @cached_property
    def direct_lobe_integral(self) -> float:
        """``int w^p`` over one period (well) or one positive lobe (nodal)."""
        p = self.P.p
        return 2.0 * (self.low.integrate(lambda y: self.u_of_sigma(y) ** p)
                      + self.top.integrate(lambda y: self.u_of_tau(y) ** p))

    @property
    def lobe_integral(self) -> float:
        P = self.P
        if abs(self.energy) < _LINEAR_REGIME * abs(P.v_star):
            return P.homoclinic_integral + P.lobe_slope * self.energy
        return self.direct_lobe_integral

    def branch(self, y):
        """``w`` at time ``y`` in ``[0, half_branch]`` after the maximum."""
        y = np.asarray(y, dtype=float)
        in_top = y <= self.top.total
        out = np.empty_like(y)
        if np.any(in_top):
            out[in_top] = self.u_of_tau(self.top.invert(y[in_top]))
        rest = ~in_top
        if np.any(rest):
            out[rest] = self.u_of_sigma(self.low.invert(self.half_branch - y[rest]))
        return out

    def evaluate(self, x):
        """Orbit with its maximum at ``x = 0``, any real ``x``."""
        T = self.period
        y = np.mod(np.asarray(x, dtype=float), T)
        y = np.where(y > T / 2.0, T - y, y)
        if self.kind == "well":
            return self.branch(y)
        quarter = T / 4.0
        flip = y > quarter
        return np.where(flip, -self.branch(np.where(flip, T / 2.0 - y, 0.0)),
                        self.branch(np.where(flip, 0.0, y)))


def period_integral(portrait: PhasePortrait, E: float) -> float:
    """Period of the closed orbit at energy ``E``.

    Well orbits need ``V(u*) < E < 0``, sign-changing orbits ``E > 0``.
    """
    P = portrait
    if P.v_star < E < 0:
        return _Orbit.well(P, _well_eta_from_energy(P, E)).period
    if E > 0:
        return _Orbit.nodal(P, 0.5 * math.log(2.0 * E / P.s)).period
    raise ValidationError(f"no closed orbit at energy {E}: need {P.v_star} < E < 0 or E > 0")


# -- solutions on the circle -------------------------------------------------


@dataclass
class PeriodicSolution:
    ell: float
    s: float
    a: float
    p: float
    lam: float
    kind: str  # "constant" | "well" | "nodal"
    j: int
    energy: float
    nodal_count: int
    value: float
    vol_M: float = 1.0
    _orbit: _Orbit | None = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> float:
        return 2.0 * self.p / (self.p - 2.0)

    @property
    def portrait(self) -> PhasePortrait:
        return PhasePortrait(self.s, self.a, self.p, self.lam)

    def evaluate(self, x):
        """``w(x)``; the maximum sits at ``x = 0``."""
        x = np.asarray(x, dtype=float)
        if self._orbit is None:
            return np.full_like(x, self.portrait.u_star)
        return self._orbit.evaluate(x)

    def profile(self, grid: int = PROFILE_GRID):
        x = np.arange(grid) * (self.ell / grid)
        return x, self.evaluate(x)

    def lp_integral(self) -> float:
        """``int_0^ell |w|^p dx``."""
        if self._orbit is None:
            return self.ell * self.portrait.u_star**self.p
        per = self._orbit.lobe_integral
        return self.j * per * (2.0 if self.kind == "nodal" else 1.0)

    def to_dict(self, include_profile: bool = False, grid: int = PROFILE_GRID) -> dict:
        out = {
            "kind": self.kind,
            "circumference": self.ell,
            "s": self.s,
            "a": self.a,
            "p": self.p,
            "lambda": self.lam,
            "j": self.j,
            "energy": self.energy,
            "nodal_count": self.nodal_count,
            "value": self.value,
            "vol_M": self.vol_M,
        }
        if include_profile:
            x, w = self.profile(grid)
            out["profile"] = [[float(a), float(b)] for a, b in zip(x, w)]
        return out


def _check_params(ell, s, a, p, vol_M):
    if not ell > 0:
        raise ValidationError(f"circumference must be positive, got {ell}")
    if not vol_M > 0:
        raise ValidationError(f"vol_M must be positive, got {vol_M}")
    return PhasePortrait(s, a, p)


def _value(P, vol_M, integral):
    return P.lam * (vol_M * integral) ** ((P.p - 2.0) / P.p)


def _constant_solution(P, ell, vol_M):
    sol = PeriodicSolution(ell, P.s, P.a, P.p, P.lam, "constant", 0, P.v_star, 0, 0.0, vol_M)
    sol.value = _value(P, vol_M, sol.lp_integral())
    return sol


def _solve_monotone(fn, target, start, step):
    """Bracket and solve ``fn(x) = target`` for a decreasing ``fn``.

    Both orbit families have periods decreasing in their log parameters.
    """
    lo, hi = start - step, start
    f_hi = fn(hi)
    while f_hi > target:
        lo, hi = hi, hi + step
        step *= 2.0
        f_hi = fn(hi)
    f_lo = fn(lo)
    while f_lo < target:
        hi, lo = lo, lo - step
        step *= 2.0
        f_lo = fn(lo)
    return brentq(lambda x: fn(x) - target, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _verify_monotone(fn, lo, hi, decreasing_in_param, points=24):
    grid = np.linspace(lo, hi, points)
    vals = np.array([fn(x) for x in grid])
    d = np.diff(vals)
    ok = np.all(d < 0) if decreasing_in_param else np.all(d > 0)
    if not ok:
        raise AccuracyError("period function not monotone on the scanned branch")


def positive_solutions(ell: float, s: float, a: float, p: float, vol_M: float = 1.0,
                       lam: float = 1.0, j_max: int | None = None) -> list[PeriodicSolution]:
    """Constant solution plus every non-constant positive periodic solution.

    A non-constant one with ``j`` bumps exists iff ``ell / j`` exceeds the
    harmonic period at the bottom of the well.
    """
    P = _check_params(ell, s, a, p, vol_M)
    P = PhasePortrait(s, a, p, lam)
    out = [_constant_solution(P, ell, vol_M)]
    n_bumps = int(math.ceil(ell / P.harmonic_period)) - 1
    if j_max is not None:
        n_bumps = min(n_bumps, j_max)
    if n_bumps < 1:
        return out
    top = math.log(P.u_star) + math.log1p(-1e-7)

    def period_of(eta):
        return _Orbit.well(P, eta).period

    etas = {}
    for j in range(1, n_bumps + 1):
        target = ell / j
        if period_of(top) >= target:
            log.info("j=%d: orbit amplitude below resolution, skipped", j)
            continue
        etas[j] = _solve_monotone(period_of, target, top, 1.0)
    if len(etas) >= 1:
        _verify_monotone(period_of, min(etas.values()), top, decreasing_in_param=True)
    for j, eta in etas.items():
        orb = _Orbit.well(P, eta)
        sol = PeriodicSolution(ell, s, a, p, lam, "well", j, orb.energy, 0, 0.0, vol_M, orb)
        sol.value = _value(P, vol_M, sol.lp_integral())
        out.append(sol)
    return out


def nodal_solutions(ell: float, s: float, a: float, p: float, max_pairs: int = 8,
                    vol_M: float = 1.0, lam: float = 1.0) -> list[PeriodicSolution]:
    """Sign-changing solutions with ``2j`` zeros, ``j = 1 .. max_pairs``."""
    _check_params(ell, s, a, p, vol_M)
    if max_pairs < 1:
        raise ValidationError(f"max_pairs must be >= 1, got {max_pairs}")
    P = PhasePortrait(s, a, p, lam)

    def period_of(beta):
        return _Orbit.nodal(P, beta).period

    start = 0.5 * math.log(2.0 * abs(P.v_star) / P.s)
    betas = {}
    for j in range(1, max_pairs + 1):
        try:
            betas[j] = _solve_monotone(period_of, ell / j, start, 1.0)
        except (ValueError, OverflowError) as exc:
            log.warning("j=%d: period %.6g not bracketed (%s), skipped", j, ell / j, exc)
    if betas:
        _verify_monotone(period_of, min(betas.values()), max(betas.values()) + 1.0, decreasing_in_param=True)
    out = []
    factor = 2.0 ** ((p - 2.0) / p)
    for j, beta in betas.items():
        orb = _Orbit.nodal(P, beta)
        sol = PeriodicSolution(ell, s, a, p, lam, "nodal", j, orb.energy, 2 * j, 0.0, vol_M, orb)
        # two mirror lobes per period: 2^(2/k) times the one-lobe value
        sol.value = factor * _value(P, vol_M, j * orb.lobe_integral)
        out.append(sol)
    return out


def first_N_yamabe(ell, s, a, p, vol_M=1.0, lam=1.0):
    """Smallest value over positive solutions: the N-Yamabe constant candidate."""
    sols = positive_solutions(ell, s, a, p, vol_M=vol_M, lam=lam)
    best = min(sols, key=lambda x: x.value)
    return best.value, best


def second_N_yamabe(ell, s, a, p, vol_M=1.0, lam=1.0, max_pairs=8):
    """Smallest value over nodal solutions with up to ``max_pairs`` zero pairs."""
    sols = nodal_solutions(ell, s, a, p, max_pairs=max_pairs, vol_M=vol_M, lam=lam)
    if not sols:
        raise AccuracyError("no nodal solution found")
    best = min(sols, key=lambda x: x.value)
    if best.j != 1:
        log.info("second N-Yamabe minimum at j=%d", best.j)
    return best.value, best


# -- verification helpers --------------------------------------------------

_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
_D1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _stencil(sol, x, h):
    offs = np.arange(-4, 5) * h
    vals = sol.evaluate(np.asarray(x)[:, None] + offs)
    return vals[:, 4], vals @ _D1 / h, vals @ _D2 / h**2


def _stencil_step(sol):
    per = sol.ell / max(sol.j, 1)
    return min(0.05, per / 400.0)


def ode_residual(sol: PeriodicSolution, x=None) -> np.ndarray:
    """``-a w'' + s w - lam |w|^(p-2) w`` with eighth-order differences."""
    if x is None:
        x = sol.profile()[0]
    w, _, d2 = _stencil(sol, x, _stencil_step(sol))
    return -sol.a * d2 + sol.s * w - sol.lam * np.abs(w) ** (sol.p - 2.0) * w


def energy_defect(sol: PeriodicSolution, x=None) -> np.ndarray:
    """``(a/2) w'^2 + V(w) - E`` along the profile."""
    if x is None:
        x = sol.profile()[0]
    w, d1, _ = _stencil(sol, x, _stencil_step(sol))
    return sol.a / 2.0 * d1**2 + sol.portrait.potential(w) - sol.energy


def round_trip_defect(portrait: PhasePortrait, E: float, rtol: float = 1e-13) -> float:
    """Integrate the ODE for one computed period from the outer turning point.

    Returns ``max(|w(T) - w(0)|, |w'(T)|)``; small iff the period is right.
    """
    P = portrait
    T = period_integral(P, E)
    if E > 0:
        orb = _Orbit.nodal(P, 0.5 * math.log(2.0 * E / P.s))
    else:
        orb = _Orbit.well(P, _well_eta_from_energy(P, E))
    u0 = orb.u_hi

    def rhs(x, y):
        return [y[1], float(P.force(y[0])) / P.a]

    sol = solve_ivp(rhs, (0.0, T), [u0, 0.0], method="DOP853", rtol=rtol, atol=rtol * 1e-3)
    wT, vT = sol.y[0, -1], sol.y[1, -1]
    return float(max(abs(wT - u0), abs(vT)))
