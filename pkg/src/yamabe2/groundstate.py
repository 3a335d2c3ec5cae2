"""Gagliardo-Nirenberg constants from the radial ground state.

The constant is the reciprocal of the infimum over ``H^1(R^n)`` of

    D^(n/(m+n)) Q^(m/(m+n)) / P^((m+n-2)/(m+n))

with ``D = int |grad u|^2``, ``Q = int u^2``, ``P = int |u|^p``,
``p = p_{m+n}``.  The quotient is invariant under ``u -> c u`` and
``u -> u(sigma x)``, and its minimiser is (up to those symmetries) the
positive radial solution of

    u'' + (n-1)/r u' - u + u^(p-1) = 0,   u'(0) = 0,  u(inf) = 0,

found here by bisection on ``u(0)``.  Initial values above the ground state
overshoot and cross zero; values below turn around at a positive minimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp
from scipy.special import beta, kv

from .constants import dim_data, sphere_volume
from .errors import AccuracyError, ConfigurationError, ValidationError

__all__ = [
    "GNConfig",
    "GroundState",
    "shoot_ground_state",
    "closed_form_alpha_n1",
    "sech_profile",
    "gn_alpha",
    "gn_exponent",
    "classify_shot",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GNConfig:
    r_max: float = 40.0
    ode_tol: float = 1e-12
    bisect_tol: float = 1e-12
    quad_h: float = 1e-3
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not val > 0:
                raise ValidationError(f"{name} must be positive, got {val}")


def gn_exponent(m: int, n: int) -> float:
    if m < 1 or n < 1:
        raise ValidationError(f"m, n must be >= 1, got ({m}, {n})")
    return dim_data(m + n).p


def gn_alpha(D: float, Q: float, P: float, m: int, n: int) -> float:
    """Reciprocal of the Gagliardo-Nirenberg quotient at ``(D, Q, P)``."""
    k = m + n
    return 1.0 / (D ** (n / k) * Q ** (m / k) / P ** ((k - 2) / k))


@dataclass
class GroundState:
    m: int
    n: int
    p: float
    u0: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    dirichlet: float
    mass: float
    pnorm: float
    alpha: float
    r_tail: float
    max_residual: float
    config: GNConfig = field(default_factory=GNConfig)

    def to_dict(self, include_profile: bool = False) -> dict:
        out = {
            "m": self.m,
            "n": self.n,
            "p": self.p,
            "u0": self.u0,
            "integrals": {"dirichlet": self.dirichlet, "mass": self.mass, "pnorm": self.pnorm},
            "alpha": self.alpha,
            "r_tail": self.r_tail,
            "max_residual": self.max_residual,
            "config": asdict(self.config),
        }
        if include_profile:
            out["profile"] = [[float(a), float(b)] for a, b in zip(self.r, self.u)]
        return out


def _rhs(n, p):
    def f(r, y):
        u, v = y
        return [v, -(n - 1) / r * v + u - abs(u) ** (p - 2) * u]

    return f


def _series_start(u0, n, p, r0):
    # u = u0 + c2 r^2 + c4 r^4 + O(r^6) from the regular expansion at r = 0
    c2 = (u0 - u0 ** (p - 1)) / (2 * n)
    c4 = (1.0 - (p - 1) * u0 ** (p - 2)) * c2 / (4 * (n + 2))
    return [u0 + c2 * r0**2 + c4 * r0**4, 2 * c2 * r0 + 4 * c4 * r0**3]


def classify_shot(u0: float, n: int, p: float, config: GNConfig = GNConfig(), dense: bool = False):
    """Integrate from ``u(0) = u0`` and classify the trajectory.

    Returns ``(kind, solution)`` where kind is ``+1`` for a zero crossing
    (overshoot), ``-1`` for a positive local minimum (undershoot) and ``0``
    if neither happened before ``r_max``.
    """
    r0 = config.quad_h

    def crossing(r, y):
        return y[0]

    crossing.terminal = True

    def turning(r, y):
        return y[1]

    turning.terminal = True
    turning.direction = 1

    sol = solve_ivp(
        _rhs(n, p),
        (r0, config.r_max),
        _series_start(u0, n, p, r0),
        method="DOP853",
        rtol=config.ode_tol,
        atol=config.ode_tol * 1e-3,
        events=[crossing, turning],
        dense_output=dense,
    )
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return 0, sol


def _bracket(n, p, config):
    lo = 1.0 + 1e-3
    kind, _ = classify_shot(lo, n, p, config)
    if kind != -1:
        raise ConfigurationError(f"u0={lo} does not undershoot; cannot bracket the ground state")
    hi = 2.0
    for _ in range(60):
        kind, _ = classify_shot(hi, n, p, config)
        if kind == 1:
            return lo, hi
        if kind == -1:
            lo = hi
        hi *= 2.0
    raise ConfigurationError("no overshooting initial value found")


def _classify_extending(u0, n, p, config, doublings=3):
    """Classify a shot, doubling ``r_max`` while the outcome is undecided."""
    cfg = config
    for _ in range(doublings + 1):
        kind, sol = classify_shot(u0, n, p, cfg)
        if kind != 0:
            return kind, sol
        cfg = replace(cfg, r_max=2.0 * cfg.r_max)
    raise ConfigurationError(f"shot from u0={u0} undecided before r_max={cfg.r_max / 2}")


def _bisect(n, p, config):
    lo, hi = _bracket(n, p, config)
    while hi - lo > config.bisect_tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        kind, _ = _classify_extending(mid, n, p, config)
        if kind == 1:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _tail_model(n):
    nu = (n - 2) / 2.0

    def u(r):
        return r**-nu * kv(nu, r)

    def du(r):
        return -(r**-nu) * kv(nu + 1, r)

    return u, du


def _tail_integrals(R, uR, n, p):
    """Integrals over ``r > R`` of the decaying linearised solution matched at R."""
    tu, tdu = _tail_model(n)
    c = uR / tu(R)
    opts = dict(epsabs=0.0, epsrel=1e-10, limit=200)
    D = quad(lambda r: (c * tdu(r)) ** 2 * r ** (n - 1), R, np.inf, **opts)[0]
    Q = quad(lambda r: (c * tu(r)) ** 2 * r ** (n - 1), R, np.inf, **opts)[0]
    P = quad(lambda r: abs(c * tu(r)) ** p * r ** (n - 1), R, np.inf, **opts)[0]
    return D, Q, P


def _residual(r, u, du, n, p, h):
    """Pointwise ODE residual using a fourth-order difference of ``u'``."""
    d2 = (-du[4:] + 8 * du[3:-1] - 8 * du[1:-3] + du[:-4]) / (12 * h)
    rr, uu, vv = r[2:-2], u[2:-2], du[2:-2]
    return d2 + (n - 1) / rr * vv - uu + np.abs(uu) ** (p - 2) * uu


def shoot_ground_state(m: int, n: int, config: GNConfig = GNConfig()) -> GroundState:
    """Radial ground state in dimension ``n`` with exponent ``p_{m+n}``, and alpha_{m,n}."""
    p = gn_exponent(m, n)
    if m + n < 3:
        raise ValidationError("m+n must be >= 3")
    lo, hi = _bisect(n, p, config)
    _, sol_lo = classify_shot(lo, n, p, config, dense=True)
    _, sol_hi = classify_shot(hi, n, p, config, dense=True)

    h = config.quad_h
    r_end = min(sol_lo.t[-1], sol_hi.t[-1])
    r = np.arange(1, int(r_end / h)) * h
    y_lo, y_hi = sol_lo.sol(r), sol_hi.sol(r)
    u = 0.5 * (y_lo[0] + y_hi[0])
    du = 0.5 * (y_lo[1] + y_hi[1])
    # accepted region: the two bracketing shots still agree closely
    split = np.abs(y_lo[0] - y_hi[0]) > 1e-6 * np.abs(u)
    cut = int(np.argmax(split)) if split.any() else r.size
    # keep an even number of intervals and stay on the decreasing part
    cut = min(cut, int(np.argmax(du >= 0)) if np.any(du >= 0) else cut)
    if cut < 100:
        raise ConfigurationError("accepted profile too short; tighten bisect_tol or ode_tol")
    r = np.concatenate([[0.0], r[:cut]])
    u = np.concatenate([[0.5 * (lo + hi)], u[:cut]])
    du = np.concatenate([[0.0], du[:cut]])
    if np.any(np.diff(u) >= 0) or np.any(u <= 0):
        raise AccuracyError("ground state profile not positive and decreasing")

    res = _residual(r[1:], u[1:], du[1:], n, p, h)
    max_res = float(np.max(np.abs(res)))
    if max_res > config.residual_tol:
        raise AccuracyError(f"ground state ODE residual {max_res:.3e} exceeds {config.residual_tol:.1e}")

    area = sphere_volume(n - 1)
    w = r ** (n - 1)
    D = simpson(du**2 * w, x=r)
    Q = simpson(u**2 * w, x=r)
    P = simpson(u**p * w, x=r)
    tD, tQ, tP = _tail_integrals(r[-1], u[-1], n, p)
    D, Q, P = area * (D + tD), area * (Q + tQ), area * (P + tP)
    alpha = gn_alpha(D, Q, P, m, n)
    log.debug("ground state m=%d n=%d u0=%.15g alpha=%.12g tail from r=%.3f", m, n, u[0], alpha, r[-1])
    return GroundState(
        m=m, n=n, p=p, u0=float(u[0]), r=r, u=u, du=du,
        dirichlet=D, mass=Q, pnorm=P, alpha=alpha,
        r_tail=float(r[-1]), max_residual=max_res, config=config,
    )


# -- n = 1 closed form ------------------------------------------------------


def sech_profile(p: float):
    """The even solution of ``u'' = u - u^(p-1)`` on the line and its derivatives.

    ``u(x) = (p/2 sech^2((p-2) x / 2))^(1/(p-2))``.
    """
    b = (p - 2.0) / 2.0
    g = 2.0 / (p - 2.0)
    amp = (p / 2.0) ** (1.0 / (p - 2.0))

    def u(x):
        y = np.abs(b * np.asarray(x, dtype=float))
        # sech written with decaying exponentials so large |x| cannot overflow
        return amp * (2.0 * np.exp(-y) / (1.0 + np.exp(-2.0 * y))) ** g

    def du(x):
        return -g * b * np.tanh(b * np.asarray(x, dtype=float)) * u(x)

    def d2u(x):
        th = np.tanh(b * np.asarray(x, dtype=float))
        return g * b**2 * u(x) * (g * th**2 - (1.0 - th**2))

    return u, du, d2u


def closed_form_alpha_n1(m: int) -> float:
    """alpha_{m,1} from the explicit sech profile via Beta-function integrals."""
    if m < 2:
        raise ValidationError(f"m must be >= 2 for a finite exponent, got {m}")
    p = gn_exponent(m, 1)
    b = (p - 2.0) / 2.0
    g = 2.0 / (p - 2.0)
    amp = (p / 2.0) ** (1.0 / (p - 2.0))
    # int sech^c(b x) dx = B(c/2, 1/2) / b
    Q = amp**2 * beta(g, 0.5) / b
    P = amp**p * beta(p * g / 2.0, 0.5) / b
    # u'^2 = (g b)^2 u^2 tanh^2 and tanh^2 = 1 - sech^2
    D = (g * b) ** 2 * amp**2 * (beta(g, 0.5) - beta(g + 1.0, 0.5)) / b
    return gn_alpha(D, Q, P, m, 1)
