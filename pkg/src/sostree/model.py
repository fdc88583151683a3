"""Three-state SOS model on a Cayley tree: parameters, recursion kernels and
the four-dimensional boundary-field operator.

All kernels accept scalars or numpy arrays and are evaluated in log space so
that no intermediate exponential overflows for large ``|x|``.  At ``theta == 1``
every kernel is identically zero and is short-circuited to an exact 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .errors import ContractError, DomainError

__all__ = [
    "ModelParams",
    "BranchPattern",
    "FieldVector",
    "ReducedField",
    "kernel_f",
    "kernel_f_derivative",
    "kernel_f_second",
    "kernel_bounds",
    "inflection_point",
    "map_F",
    "operator_W",
    "reduced_rhs",
]


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    ``theta = exp(J * beta)``; the coupling and inverse temperature only ever
    enter through this combination.  ``m`` is the largest spin value, so the
    spin set is ``{0, ..., m}``.
    """

    theta: float
    k: int
    m: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise DomainError(f"theta must be positive and finite, got {self.theta!r}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"tree order k must be an integer >= 1, got {self.k!r}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be an integer >= 1, got {self.m!r}")

    @classmethod
    def from_coupling(cls, J: float, beta: float, k: int, m: int = 2) -> "ModelParams":
        return cls(theta=math.exp(J * beta), k=k, m=m)

    @property
    def degenerate(self) -> bool:
        return self.theta == 1.0

    def require_three_state(self) -> None:
        if self.m != 2:
            raise ContractError(f"this operation is defined for m = 2 only (got m = {self.m})")


@dataclass(frozen=True)
class BranchPattern:
    """Construction integers: an h-vertex has ``a`` h-children and ``b``
    l-children, an l-vertex has ``c`` h-children and ``d`` l-children."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"pattern entry {name} must be a nonnegative integer, got {v!r}")
        if self.a + self.b != self.c + self.d:
            raise ContractError(
                f"pattern {self.as_tuple()} violates a + b = c + d"
            )

    @property
    def k(self) -> int:
        return self.a + self.b

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def check(self, params: ModelParams) -> None:
        if self.k != params.k:
            raise ContractError(
                f"pattern {self.as_tuple()} has a+b = c+d = {self.k}, but k = {params.k}"
            )

    @classmethod
    def parse(cls, text: str) -> "BranchPattern":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ContractError(f"pattern must be 'a,b,c,d', got {text!r}")
        return cls(*(int(p) for p in parts))


@dataclass(frozen=True)
class FieldVector:
    """Full reduced boundary fields, ordered as the unknowns of the 4-D system."""

    h1: float
    h2: float
    l1: float
    l2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise DomainError(f"field components must be finite: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.h1, self.h2, self.l1, self.l2)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @property
    def on_invariant_set(self) -> bool:
        return self.h1 == 0.0 and self.l1 == 0.0


@dataclass(frozen=True)
class ReducedField:
    """Fields ``(h2, l2)`` on the invariant set ``h1 = l1 = 0``."""

    h2: float
    l2: float

    def __post_init__(self):
        if not (math.isfinite(self.h2) and math.isfinite(self.l2)):
            raise DomainError(f"field components must be finite: ({self.h2}, {self.l2})")

    def lift(self) -> FieldVector:
        return FieldVector(0.0, self.h2, 0.0, self.l2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.h2, self.l2)


def _check_theta(theta) -> None:
    if not (np.isfinite(theta) and theta > 0):
        raise DomainError(f"theta must be positive and finite, got {theta!r}")


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("kernel argument must be finite")
    return x


def _out(x: np.ndarray, value: np.ndarray):
    return float(value) if x.ndim == 0 else value


def kernel_f(x, theta: float):
    """ln((e^x + 2θ) / (θ² + θ e^x + 1))."""
    _check_theta(theta)
    x = _check_x(x)
    if theta == 1.0:
        return _out(x, np.zeros_like(x))
    lt = math.log(theta)
    num = np.logaddexp(x, math.log(2.0 * theta))
    den = np.logaddexp(x + lt, math.log1p(theta * theta))
    return _out(x, num - den)


def _parts(x: np.ndarray, theta: float):
    lt = math.log(theta)
    l2t = math.log(2.0 * theta)
    lden = np.logaddexp(x + lt, math.log1p(theta * theta))
    a = expit(x - l2t)  # u / (u + 2θ)
    c = np.exp(-np.logaddexp(x, l2t))  # 1 / (u + 2θ)
    b = np.exp(-lden)  # 1 / (θu + θ² + 1)
    ub = np.exp(x - lden)  # u / (θu + θ² + 1)
    return a, b, c, ub


def kernel_f_derivative(x, theta: float):
    """First derivative of :func:`kernel_f` in ``x``."""
    _check_theta(theta)
    x = _check_x(x)
    if theta == 1.0:
        return _out(x, np.zeros_like(x))
    a, b, _, _ = _parts(x, theta)
    return _out(x, -(theta * theta - 1.0) * a * b)


def kernel_f_second(x, theta: float):
    """Second derivative of :func:`kernel_f` in ``x``.

    Written as ``θ(θ²-1)[(uC)²(uB)B - s(uC)CB²]`` with ``C = 1/(u+2θ)``,
    ``B = 1/(θu+θ²+1)`` and ``s = 2θ²+2`` so every factor stays bounded.
    """
    _check_theta(theta)
    x = _check_x(x)
    if theta == 1.0:
        return _out(x, np.zeros_like(x))
    a, b, c, ub = _parts(x, theta)
    s = 2.0 * theta * theta + 2.0
    val = theta * (theta * theta - 1.0) * (a * a * ub * b - s * a * c * b * b)
    return _out(x, val)


def kernel_bounds(theta: float) -> tuple[float, float]:
    """Limits of ``kernel_f`` at ``x -> -inf`` and ``x -> +inf``, sorted."""
    _check_theta(theta)
    lo_lim = math.log(2.0 * theta / (theta * theta + 1.0))
    hi_lim = -math.log(theta)
    return (min(lo_lim, hi_lim), max(lo_lim, hi_lim))


def inflection_point(theta: float) -> float:
    """x* = ½ ln(2θ² + 2), where ``kernel_f_second`` changes sign."""
    _check_theta(theta)
    return 0.5 * math.log(2.0 * theta * theta + 2.0)


def map_F(h, params: ModelParams) -> np.ndarray:
    """General-m recursion map F(h, m, θ) acting on gauge-reduced fields.

    ``F_i = ln[(Σ_j θ^|i-j| e^{h_j} + θ^{m-i}) / (Σ_j θ^{m-j} e^{h_j} + 1)]``
    for ``i, j < m``.
    """
    h = np.asarray(h, dtype=float)
    m = params.m
    if h.shape != (m,):
        raise ContractError(f"field vector must have length m = {m}, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise DomainError("field vector must be finite")
    if params.theta == 1.0:
        return np.zeros(m)
    lt = math.log(params.theta)
    j = np.arange(m)
    den = logsumexp(np.append((m - j) * lt + h, 0.0))
    out = np.empty(m)
    for i in range(m):
        out[i] = logsumexp(np.append(np.abs(i - j) * lt + h, (m - i) * lt)) - den
    return out


def operator_W(v: FieldVector, pattern: BranchPattern, params: ModelParams) -> FieldVector:
    """Right-hand side of the 4-D fixed-point system ``v = W(v)``."""
    params.require_three_state()
    pattern.check(params)
    Fh = map_F([v.h1, v.h2], params)
    Fl = map_F([v.l1, v.l2], params)
    a, b, c, d = pattern.as_tuple()
    h = a * Fh + b * Fl
    l = c * Fh + d * Fl
    return FieldVector(float(h[0]), float(h[1]), float(l[0]), float(l[1]))


def reduced_rhs(r: ReducedField, pattern: BranchPattern, params: ModelParams) -> ReducedField:
    """``(a f(h2) + b f(l2), c f(h2) + d f(l2))`` on the invariant set."""
    params.require_three_state()
    pattern.check(params)
    fh = kernel_f(r.h2, params.theta)
    fl = kernel_f(r.l2, params.theta)
    a, b, c, d = pattern.as_tuple()
    return ReducedField(a * fh + b * fl, c * fh + d * fl)
