"""Closed-form dimensional constants and bound formulas.

Everything here is pure arithmetic on doubles.  Sphere volumes avoid a
general Gamma approximation: for the round unit sphere S^d

    odd d:   vol = 2 pi^h / (h-1)!,          h = (d+1)/2
    even d:  vol = 2 (4 pi)^j j! / (2j)!,    j = d/2

which is exact rational algebra times a power of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ValidationError

__all__ = [
    "DimData",
    "SphereData",
    "ProductConstants",
    "BoundReport",
    "dim_data",
    "sphere_volume",
    "sphere_data",
    "sphere_yamabe",
    "second_sphere_yamabe",
    "ah_sandwich",
    "product_constants",
    "y_rn_formula",
    "n_product_lower_bound",
    "invariant_lower_bounds",
    "LOWER_BOUND_CASES",
    "SURFACE_C",
]

# (1.047)^2, the isoperimetric constant entering the surface-times-S2 bound
SURFACE_C = 1.047**2

# Fraction of Y(S^5) in the two five-dimensional bounds
_DIM3_TIMES_S2 = 0.62
_DIM2_TIMES_S3 = 0.75

# Relative slack accepted when a computed Yamabe constant is compared with
# the sphere value it can never exceed.
_SPHERE_SLACK = 1e-9


@dataclass(frozen=True)
class DimData:
    k: int
    a: float
    p: float


@dataclass(frozen=True)
class SphereData:
    d: int
    volume: float
    scalar: float
    yamabe: float | None


@dataclass(frozen=True)
class ProductConstants:
    m: int
    n: int
    A: float
    B: float | None


@dataclass(frozen=True)
class BoundReport:
    """A named quantity bracketed by ``lower <= value <= upper``.

    ``upper`` is ``math.inf`` when only a lower bound is known.
    """

    name: str
    lower: float
    upper: float
    formulas: tuple[str, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValidationError(f"{self.name}: lower {self.lower} exceeds upper {self.upper}")

    def to_dict(self):
        return {
            "name": self.name,
            "lower": self.lower,
            "upper": None if math.isinf(self.upper) else self.upper,
            "formulas": list(self.formulas),
            "params": dict(self.params),
        }


def _check_int(name, value, minimum):
    if isinstance(value, bool) or int(value) != value:
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def dim_data(k: int) -> DimData:
    """Return ``a_k = 4(k-1)/(k-2)`` and ``p_k = 2k/(k-2)``."""
    k = _check_int("k", k, 3)
    return DimData(k=k, a=4.0 * (k - 1) / (k - 2), p=2.0 * k / (k - 2))


def sphere_volume(d: int) -> float:
    """Volume of the round unit sphere S^d (d >= 0; S^0 is two points)."""
    d = _check_int("d", d, 0)
    if d % 2:
        h = (d + 1) // 2
        return 2.0 * math.pi**h / math.factorial(h - 1)
    j = d // 2
    ratio = Fraction(4**j * math.factorial(j), math.factorial(2 * j))
    return 2.0 * float(ratio) * math.pi**j


def sphere_yamabe(d: int) -> float:
    """Yamabe constant of the round sphere, ``d(d-1) vol(S^d)^(2/d)``."""
    d = _check_int("d", d, 3)
    return d * (d - 1) * sphere_volume(d) ** (2.0 / d)


def sphere_data(d: int) -> SphereData:
    """Volume, scalar curvature and Yamabe constant of S^d.

    For d = 2 the Yamabe slot holds 8*pi (Gauss-Bonnet), used only as the
    Y(M) input of the product lower bounds.  For d = 1 it is ``None``.
    """
    d = _check_int("d", d, 1)
    if d >= 3:
        y = sphere_yamabe(d)
    elif d == 2:
        y = 8.0 * math.pi
    else:
        y = None
    return SphereData(d=d, volume=sphere_volume(d), scalar=float(d * (d - 1)), yamabe=y)


def second_sphere_yamabe(k: int) -> float:
    """``2^(2/k) Y(S^k)``: second Yamabe constant of the round sphere."""
    return 2.0 ** (2.0 / k) * sphere_yamabe(k)


def ah_sandwich(k: int, Y: float) -> tuple[float, float]:
    """Two-sided bound on the second Yamabe constant from the first one.

    Returns ``(2^(2/k) Y, (Y^(k/2) + Y(S^k)^(k/2))^(2/k))``.
    """
    k = _check_int("k", k, 3)
    Y = float(Y)
    if not Y >= 0.0:
        raise ValidationError(f"Y must be non-negative, got {Y}")
    ys = sphere_yamabe(k)
    if Y > ys * (1.0 + _SPHERE_SLACK):
        raise ValidationError(f"Y={Y} exceeds Y(S^{k})={ys}")
    lower = 2.0 ** (2.0 / k) * Y
    upper = (Y ** (k / 2.0) + ys ** (k / 2.0)) ** (2.0 / k)
    # equal in exact arithmetic at Y = Y(S^k); keep the ordering under rounding
    return lower, max(lower, upper)


def product_constants(m: int, n: int) -> ProductConstants:
    """A_{m,n} (and B_{m,n} when both factors have dimension >= 3)."""
    m = _check_int("m", m, 1)
    n = _check_int("n", n, 1)
    k = m + n
    if k < 3:
        raise ValidationError(f"m+n must be >= 3, got {k}")
    ak = dim_data(k).a
    A = ak ** (n / k) * k * m ** (-m / k) * n ** (-n / k)
    B = None
    if m >= 3 and n >= 3:
        B = ak * k * (m * dim_data(m).a) ** (-m / k) * (n * dim_data(n).a) ** (-n / k)
    return ProductConstants(m=m, n=n, A=A, B=B)


def y_rn_formula(m: int, n: int, s_g: float, vol_M: float, alpha: float) -> float:
    """N-Yamabe constant of ``M x R^n`` from the Gagliardo-Nirenberg constant.

    ``(M, g)`` is rescaled to unit volume first, so callers pass the raw
    scalar curvature and volume: ``A_{m,n} (s_g vol_M^(2/m))^(m/(m+n)) / alpha``.
    """
    for name, val in (("s_g", s_g), ("vol_M", vol_M), ("alpha", alpha)):
        if not val > 0:
            raise ValidationError(f"{name} must be positive, got {val}")
    pc = product_constants(m, n)
    s_unit = s_g * vol_M ** (2.0 / m)
    return pc.A * s_unit ** (m / (m + n)) / alpha


def n_product_lower_bound(m: int, n: int, Y_M: float, alpha: float) -> float:
    """``2^(2/(m+n)) A_{m,n} Y(M)^(m/(m+n)) / alpha_{m,n}``."""
    if not Y_M > 0:
        raise ValidationError(f"Y(M) must be positive, got {Y_M}")
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    k = m + n
    pc = product_constants(m, n)
    return 2.0 ** (2.0 / k) * pc.A * Y_M ** (m / k) / alpha


def _case_product_mn(m, n, Y_M):
    m = _check_int("m", m, 3)
    n = _check_int("n", n, 3)
    if not 0 < Y_M <= sphere_yamabe(m) * (1 + _SPHERE_SLACK):
        raise ValidationError(f"Y(M) must lie in (0, Y(S^{m})], got {Y_M}")
    k = m + n
    B = product_constants(m, n).B
    lower = 2.0 ** (2.0 / k) * B * Y_M ** (m / k) * sphere_yamabe(n) ** (n / k)
    return k, lower, ("2^(2/k) B_{m,n} Y(M)^(m/k) Y(S^n)^(n/k)",)


def _case_surface_times_s2():
    return 4, 2.0 * SURFACE_C / 3.0**0.75 * sphere_yamabe(4), ("2c/3^(3/4) Y(S^4), c=1.047^2",)


def _case_ricci_times_s1(m, vol_ratio):
    m = _check_int("m", m, 2)
    # Bishop: Ric >= (m-1) forces vol(M) <= vol(S^m)
    if not 0 < vol_ratio <= 1:
        raise ValidationError(f"vol(M)/vol(S^m) must lie in (0, 1], got {vol_ratio}")
    k = m + 1
    lower = 2.0 ** (2.0 / k) * vol_ratio ** (2.0 / k) * sphere_yamabe(k)
    return k, lower, ("2^(2/(m+1)) (vol M / vol S^m)^(2/(m+1)) Y(S^(m+1))",)


def _case_dim3_times_s2():
    return 5, 2.0 ** 0.4 * _DIM3_TIMES_S2 * sphere_yamabe(5), ("2^(2/5) 0.62 Y(S^5)",)


def _case_dim2_times_s3():
    return 5, 2.0 ** 0.4 * _DIM2_TIMES_S3 * sphere_yamabe(5), ("2^(2/5) 0.75 Y(S^5)",)


_CASES = {
    "product-mn": _case_product_mn,
    "surface-times-S2": _case_surface_times_s2,
    "ricci-times-S1": _case_ricci_times_s1,
    "dim3-times-S2": _case_dim3_times_s2,
    "dim2-times-S3": _case_dim2_times_s3,
}

LOWER_BOUND_CASES = tuple(_CASES) + ("n-product",)


def invariant_lower_bounds(case: str, **params) -> BoundReport:
    """Lower bound on a second Yamabe invariant for one of the named cases.

    The upper value is the second invariant of the sphere of the same
    dimension, ``2^(2/k) Y(S^k)``, except for ``"n-product"`` (the
    A/alpha bound on the second N-Yamabe invariant) where no upper bound is
    known and ``upper`` is infinite.
    """
    if case == "n-product":
        try:
            m, n, Y_M, alpha = params["m"], params["n"], params["Y_M"], params["alpha"]
        except KeyError as exc:
            raise ValidationError(f"n-product needs m, n, Y_M, alpha; missing {exc}") from None
        lower = n_product_lower_bound(m, n, Y_M, alpha)
        return BoundReport(
            name=f"Y2_N(M^{m} x N^{n})",
            lower=lower,
            upper=math.inf,
            formulas=("2^(2/(m+n)) A_{m,n} Y(M)^(m/(m+n)) / alpha_{m,n}",),
            params=dict(params),
        )
    try:
        fn = _CASES[case]
    except KeyError:
        raise ValidationError(f"unknown case {case!r}; expected one of {LOWER_BOUND_CASES}") from None
    try:
        k, lower, formulas = fn(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {case}: {exc}") from None
    return BoundReport(
        name=f"Y2({case})",
        lower=lower,
        upper=second_sphere_yamabe(k),
        formulas=formulas + ("upper: 2^(2/k) Y(S^k)",),
        params=dict(params, k=k),
    )
