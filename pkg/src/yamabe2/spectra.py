"""Conformal Laplacian spectra on model products and a discrete circle oracle.

The analytic side enumerates ``a_k (mu_i + nu_j / t) + s_g + s_h / t`` over
the Laplace spectra of the two factors.  The discrete side is a periodic
second-difference operator ``-a v'' + s v`` on a circle, together with the
weighted problem ``L v = lam u^(p-2) v`` that realises the conformal change
``u^(p-2) G`` for a factor depending on the circle variable only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .constants import DimData, dim_data, sphere_volume
from .errors import UnsupportedSpectrumError, ValidationError

__all__ = [
    "ModelManifold",
    "ProductSpace",
    "SpectrumEntry",
    "round_sphere",
    "circle",
    "abstract_manifold",
    "conformal_laplacian_spectrum",
    "brute_force_spectrum",
    "fd_circle_operator",
    "conformal_operator",
    "generalized_eigenvalues",
    "generalized_second_eigenvalue",
    "normalized_eigenvalue",
    "operator_eigenvalues",
]


@dataclass(frozen=True)
class ModelManifold:
    kind: str  # "round-sphere" | "circle" | "abstract"
    dim: int
    scalar: float
    volume: float
    length: float | None = None

    @property
    def has_spectrum(self) -> bool:
        return self.kind != "abstract"

    def laplace_eigenvalue(self, j: int) -> float:
        if self.kind == "round-sphere":
            return float(j * (j + self.dim - 1))
        if self.kind == "circle":
            return (2.0 * math.pi * j / self.length) ** 2
        raise UnsupportedSpectrumError(f"{self.kind} manifold carries no spectrum")

    def multiplicity(self, j: int) -> int:
        if self.kind == "round-sphere":
            d = self.dim
            return (2 * j + d - 1) * math.factorial(j + d - 2) // (math.factorial(j) * math.factorial(d - 1))
        if self.kind == "circle":
            return 1 if j == 0 else 2
        raise UnsupportedSpectrumError(f"{self.kind} manifold carries no spectrum")


def round_sphere(d: int) -> ModelManifold:
    """Unit round sphere S^d; d = 1 gives the circle of length 2*pi."""
    if d < 1:
        raise ValidationError(f"sphere dimension must be >= 1, got {d}")
    if d == 1:
        return circle(2.0 * math.pi)
    return ModelManifold("round-sphere", d, float(d * (d - 1)), sphere_volume(d))


def circle(length: float) -> ModelManifold:
    if not length > 0:
        raise ValidationError(f"circumference must be positive, got {length}")
    return ModelManifold("circle", 1, 0.0, float(length), float(length))


def abstract_manifold(dim: int, scalar: float, volume: float) -> ModelManifold:
    """Constant scalar curvature datum without spectral information."""
    if dim < 1 or not volume > 0:
        raise ValidationError("abstract manifold needs dim >= 1 and positive volume")
    return ModelManifold("abstract", int(dim), float(scalar), float(volume))


@dataclass(frozen=True)
class ProductSpace:
    """``(M x N, g + t h)``."""

    M: ModelManifold
    N: ModelManifold
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValidationError(f"t must be positive, got {self.t}")
        if self.k < 3:
            raise ValidationError(f"product dimension must be >= 3, got {self.k}")

    @property
    def k(self) -> int:
        return self.M.dim + self.N.dim

    @cached_property
    def dimdata(self) -> DimData:
        return dim_data(self.k)

    @property
    def scalar(self) -> float:
        return self.M.scalar + self.N.scalar / self.t

    @property
    def volume(self) -> float:
        return self.M.volume * self.t ** (self.N.dim / 2.0) * self.N.volume


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    labels: tuple[int, int]


def _pair_entries(P, imax, jmax):
    a, t, s = P.dimdata.a, P.t, P.scalar
    mu = [P.M.laplace_eigenvalue(i) for i in range(imax + 1)]
    nu = [P.N.laplace_eigenvalue(j) for j in range(jmax + 1)]
    entries = [
        SpectrumEntry(a * (mu[i] + nu[j] / t) + s, P.M.multiplicity(i) * P.N.multiplicity(j), (i, j))
        for i in range(imax + 1)
        for j in range(jmax + 1)
    ]
    entries.sort(key=lambda e: (e.value, e.labels))
    return entries


def _take(entries, count):
    out, total = [], 0
    for e in entries:
        if total >= count:
            break
        out.append(e)
        total += e.multiplicity
    return out


def conformal_laplacian_spectrum(P: ProductSpace, count: int) -> list[SpectrumEntry]:
    """Lowest eigenvalues of ``L_{g+th}`` covering at least ``count`` with multiplicity.

    Entries are one per factor-mode pair ``(i, j)``, sorted by
    ``(value, i, j)``.  The index box grows until the next mode of either
    factor alone lies above the last returned value, so no pair outside the
    box can undercut it.
    """
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    for f in (P.M, P.N):
        if not f.has_spectrum:
            raise UnsupportedSpectrumError("abstract factor has no spectrum")
    a, t, s = P.dimdata.a, P.t, P.scalar
    imax = jmax = 1
    while True:
        taken = _take(_pair_entries(P, imax, jmax), count)
        cutoff = taken[-1].value
        short = sum(e.multiplicity for e in taken) < count
        grow_i = short or a * P.M.laplace_eigenvalue(imax + 1) + s <= cutoff
        grow_j = short or a * P.N.laplace_eigenvalue(jmax + 1) / t + s <= cutoff
        if not (grow_i or grow_j):
            return taken
        imax += grow_i
        jmax += grow_j


def brute_force_spectrum(P: ProductSpace, count: int, imax: int = 50, jmax: int = 50) -> list[SpectrumEntry]:
    """Fixed-box double loop; the test oracle for the adaptive enumeration."""
    return _take(_pair_entries(P, imax, jmax), count)


# -- discrete circle ---------------------------------------------------------


def fd_circle_operator(s: float, a: float, ell: float, grid: int) -> sp.csr_matrix:
    """Periodic three-point discretisation of ``v -> -a v'' + s v``.

    Symmetric, with every row summing to ``s`` so constants are exact
    eigenvectors.
    """
    if grid < 16:
        raise ValidationError(f"grid must be >= 16, got {grid}")
    if not ell > 0:
        raise ValidationError(f"circumference must be positive, got {ell}")
    h = ell / grid
    c = a / h**2
    main = np.full(grid, 2.0 * c + s)
    off = np.full(grid, -c)
    op = sp.diags([off[:-1], main, off[:-1]], [-1, 0, 1], shape=(grid, grid), format="lil")
    op[0, grid - 1] = -c
    op[grid - 1, 0] = -c
    return op.tocsr()


def conformal_operator(op, u, p):
    """Discrete ``L_{G_u} = u^(1-p) L_G (u .)`` as a sparse matrix."""
    u = _check_weight(u)
    return (sp.diags(u ** (1.0 - p)) @ sp.csr_matrix(op) @ sp.diags(u)).tocsr()


def _check_weight(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)) or np.any(u <= 0):
        raise ValidationError("conformal weight must be strictly positive on the grid")
    return u


def _gershgorin_floor(mat):
    mat = sp.csr_matrix(mat)
    diag = mat.diagonal()
    radius = np.asarray(abs(mat).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius))


def operator_eigenvalues(op, count: int = 3) -> np.ndarray:
    """Smallest ``count`` eigenvalues of a sparse symmetric operator."""
    return generalized_eigenvalues(op, np.ones(op.shape[0]), 2.0, count)


# Weight spread beyond which the symmetric substitution loses accuracy and
# the shift-invert pencil is used instead.
_MAX_WEIGHT_SPREAD = 1e6


def generalized_eigenvalues(op, u, p: float, count: int = 3) -> np.ndarray:
    """Smallest eigenvalues of ``L v = lam u^(p-2) v``.

    With a moderate weight the problem is symmetrised through
    ``v = u^((2-p)/2) w`` and the standard problem is solved.  Weights
    spanning many orders of magnitude (e.g. ``|w|`` of a nodal solution)
    make that matrix ill-conditioned; then the pencil is handed to
    shift-invert Lanczos with a shift below the spectrum.
    """
    u = _check_weight(u)
    op = sp.csr_matrix(op, dtype=float)
    n = op.shape[0]
    if count >= n - 1:
        raise ValidationError("count too large for the grid")
    weight = u ** (p - 2.0)
    spread = weight.max() / weight.min()
    if spread <= _MAX_WEIGHT_SPREAD:
        scale = sp.diags(weight**-0.5)
        sym = (scale @ op @ scale).tocsc()
        sigma = _gershgorin_floor(sym) - 1.0
        vals = eigsh(sym, k=count, sigma=sigma, which="LM", tol=0, return_eigenvectors=False)
    else:
        floor = _gershgorin_floor(op)
        if floor <= 0:
            # lowest weighted eigenvalue is bounded by floor / min(weight) when floor < 0
            sigma = floor / weight.min() - 1.0 if floor < 0 else -1.0
        else:
            # positive definite: all weighted eigenvalues are positive
            sigma = 0.0
        vals = eigsh(op.tocsc(), k=count, M=sp.diags(weight).tocsc(), sigma=sigma, which="LM", tol=0,
                     return_eigenvectors=False)
    return np.sort(vals)


def generalized_second_eigenvalue(op, u, p: float) -> float:
    """Second smallest ``lam`` of ``L v = lam u^(p-2) v`` (u > 0 on the grid)."""
    if not p > 2:
        raise ValidationError(f"p must exceed 2, got {p}")
    return float(generalized_eigenvalues(op, u, p, count=3)[1])


def normalized_eigenvalue(lam: float, u, p: float, dx: float, vol_M: float = 1.0) -> float:
    """``lam * (vol_M * sum(u^p) dx)^((p-2)/p)``, the scale-free version of ``lam``.

    ``(p-2)/p`` equals ``2/k`` when ``p = p_k``.
    """
    u = _check_weight(u)
    return lam * (vol_M * np.sum(u**p) * dx) ** ((p - 2.0) / p)
