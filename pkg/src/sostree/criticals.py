"""Critical-value algebra for the ``b = 0`` branch.

With ``x = e^{l2} / (2θ)`` the scalar equation for ``l2`` becomes
``η x = g(x)`` with ``g(x) = ((1+x)/(ζ+x))^d``.  The tangency condition
``x g'(x) = g(x)`` is the quadratic ``x² + [2 - (ζ-1)(d-1)] x + ζ = 0``; its two
roots give the critical slopes ``η1 < η2`` and, through ``η``, the critical
field parameters ``c*``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateError, DomainError, RegimeError

__all__ = [
    "PrefactorConvention",
    "CriticalSet",
    "zeta_of",
    "theta_critical",
    "discriminant",
    "discriminant_factored",
    "quadratic_roots",
    "eta_values",
    "c_star_bounds",
    "critical_set",
    "DEFAULT_BOUNDARY_TOL",
]

DEFAULT_BOUNDARY_TOL = 1e-9


class PrefactorConvention(enum.Enum):
    """Prefactor in front of ``ln(2θ^{d+1}/η)`` in the c* formulas.

    ``K_OVER_HSTAR`` follows from ``η = 2θ^{d+1} exp(-c h*/k)`` and is what the
    root counts actually obey; ``D_OVER_HSTAR`` is kept for comparison with the
    alternative printed form.
    """

    K_OVER_HSTAR = "k"
    D_OVER_HSTAR = "d"

    @classmethod
    def parse(cls, text: str) -> "PrefactorConvention":
        text = text.strip().lower()
        for member in cls:
            if text in (member.value, member.name.lower()):
                return member
        raise DomainError(f"unknown prefactor convention {text!r} (use 'k' or 'd')")


def _check_d(d) -> None:
    if d < 2:
        raise DomainError(f"d must be >= 2 for the critical-value formulas, got {d!r}")


def zeta_of(theta: float) -> float:
    if not (math.isfinite(theta) and theta > 0):
        raise DomainError(f"theta must be positive, got {theta!r}")
    return (1.0 + theta * theta) / (2.0 * theta * theta)


def theta_critical(d: int) -> float:
    """(d-1)/sqrt(d² + 6d + 1), the largest θ with three solutions."""
    _check_d(d)
    return (d - 1.0) / math.sqrt(d * d + 6.0 * d + 1.0)


def discriminant(zeta: float, d: int) -> float:
    """Discriminant of the tangency quadratic, expanded form."""
    _check_d(d)
    p = 2.0 - (zeta - 1.0) * (d - 1.0)
    return p * p - 4.0 * zeta


def discriminant_factored(zeta: float, d: int) -> float:
    """Same discriminant as ``(ζ-1)(d-1)²(ζ - ((d+1)/(d-1))²)``."""
    _check_d(d)
    r = (d + 1.0) / (d - 1.0)
    return (zeta - 1.0) * (d - 1.0) ** 2 * (zeta - r * r)


def quadratic_roots(zeta: float, d: int, tol: float = DEFAULT_BOUNDARY_TOL) -> tuple[float, float]:
    """Roots ``x1 <= x2`` of ``x² + [2 - (ζ-1)(d-1)] x + ζ = 0``.

    A discriminant within ``tol`` (relative to ζ²) of zero is treated as the
    double-root boundary.
    """
    disc = discriminant_factored(zeta, d)
    if disc < 0:
        if -disc > tol * max(1.0, zeta * zeta):
            raise RegimeError("no critical pair; unique-solution regime")
        disc = 0.0
    s = (zeta - 1.0) * (d - 1.0) - 2.0
    sq = math.sqrt(disc)
    # larger root first, then Vieta (x1 x2 = ζ) for the smaller to avoid cancellation
    x2 = (s + sq) / 2.0
    x1 = zeta / x2 if x2 != 0 else (s - sq) / 2.0
    return (min(x1, x2), max(x1, x2))


def eta_values(zeta: float, d: int, tol: float = DEFAULT_BOUNDARY_TOL) -> tuple[float, float]:
    """Critical slopes ``η_i = g(x_i)/x_i``, sorted ascending."""
    x1, x2 = quadratic_roots(zeta, d, tol)

    def eta(x):
        return ((1.0 + x) / (zeta + x)) ** d / x

    e1, e2 = eta(x1), eta(x2)
    return (min(e1, e2), max(e1, e2))


def c_star_bounds(
    theta: float,
    k: float,
    d: int,
    h_star: float,
    convention: PrefactorConvention = PrefactorConvention.K_OVER_HSTAR,
    tol: float = DEFAULT_BOUNDARY_TOL,
) -> tuple[float, float]:
    """Critical field parameters ``(c*1, c*2)``, returned sorted ascending.

    ``c*1`` is built from ``η2`` and ``c*2`` from ``η1``; for ``h* < 0`` the raw
    order reverses, which :class:`CriticalSet` records in ``order_reversed``.
    """
    if h_star == 0:
        raise DegenerateError("h* = 0: critical field parameters are undefined")
    theta_c = theta_critical(d)
    if theta > theta_c + tol:
        raise RegimeError("no critical pair; unique-solution regime (theta > theta_c)")
    zeta = zeta_of(theta)
    e1, e2 = eta_values(zeta, d, tol)
    pref = (k if convention is PrefactorConvention.K_OVER_HSTAR else d) / h_star
    log2t = math.log(2.0) + (d + 1.0) * math.log(theta)
    c1 = pref * (log2t - math.log(e2))
    c2 = pref * (log2t - math.log(e1))
    return (min(c1, c2), max(c1, c2))


@dataclass(frozen=True)
class CriticalSet:
    theta: float
    d: int
    theta_c: float
    zeta: float
    disc: float
    x1: float | None = None
    x2: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    c_star_1: float | None = None
    c_star_2: float | None = None
    prefactor_convention: PrefactorConvention = PrefactorConvention.K_OVER_HSTAR
    order_reversed: bool = False

    @property
    def has_pair(self) -> bool:
        return self.x1 is not None


def critical_set(
    theta: float,
    d: int,
    k: float | None = None,
    h_star: float | None = None,
    convention: PrefactorConvention = PrefactorConvention.K_OVER_HSTAR,
    tol: float = DEFAULT_BOUNDARY_TOL,
) -> CriticalSet:
    """Every critical quantity at ``(theta, d)``.

    Quantities that do not exist in the current regime are left as ``None``
    instead of raising; the c* pair additionally needs ``k`` and ``h_star``.
    """
    zeta = zeta_of(theta)
    theta_c = theta_critical(d)
    base = dict(
        theta=theta, d=d, theta_c=theta_c, zeta=zeta,
        disc=discriminant(zeta, d), prefactor_convention=convention,
    )
    if theta > theta_c + tol:
        return CriticalSet(**base)
    try:
        x1, x2 = quadratic_roots(zeta, d, tol)
    except RegimeError:
        return CriticalSet(**base)
    e1, e2 = eta_values(zeta, d, tol)
    extra = dict(x1=x1, x2=x2, eta1=e1, eta2=e2)
    if k is not None and h_star is not None and h_star != 0:
        c1, c2 = c_star_bounds(theta, k, d, h_star, convention, tol)
        extra.update(c_star_1=c1, c_star_2=c2, order_reversed=h_star < 0)
    return CriticalSet(**base, **extra)
