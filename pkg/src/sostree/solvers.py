"""Root finding for the scalar reductions of the boundary-field system.

Every solver scans a grid for sign changes, refines brackets by bisection and
additionally picks up tangential (double) roots where the residual touches
zero without crossing.  Bisection is used throughout because the residuals
have long flat stretches on which Newton steps run away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContractError, DomainError, ScanWindowError
from .model import (
    BranchPattern,
    ModelParams,
    ReducedField,
    kernel_bounds,
    kernel_f,
    kernel_f_derivative,
    reduced_rhs,
)

__all__ = [
    "RootFindConfig",
    "SolutionReport",
    "bracketed_roots",
    "scan_roots",
    "stability_tag",
    "phi_of",
    "psi_of",
    "psi_derivative",
    "g_of",
    "g_derivative",
    "ti_roots",
    "choose_h_star",
    "solve_ti",
    "solve_periodic",
    "solve_b_nonzero",
    "solve_b_zero",
    "solve_nonTI_23",
    "solve_reduced_system",
    "system_residual",
]

STABILITY_BAND = 1e-9


@dataclass(frozen=True)
class RootFindConfig:
    scan_lo: float = -40.0
    scan_hi: float = 40.0
    scan_points: int = 20001
    tol_x: float = 1e-13
    tol_residual: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.scan_lo < self.scan_hi:
            raise DomainError(f"scan window must satisfy lo < hi, got [{self.scan_lo}, {self.scan_hi}]")
        if self.scan_points < 100:
            raise DomainError("scan_points must be >= 100")
        if self.tol_x <= 0 or self.tol_residual <= 0 or self.max_iter < 1:
            raise DomainError("tolerances must be positive and max_iter >= 1")

    def covering(self, bound: float) -> "RootFindConfig":
        """Widen the window (keeping grid spacing) so it contains ``[-bound, bound]``."""
        bound = bound + 1.0
        if self.scan_lo <= -bound and self.scan_hi >= bound:
            return self
        lo, hi = min(self.scan_lo, -bound), max(self.scan_hi, bound)
        step = (self.scan_hi - self.scan_lo) / (self.scan_points - 1)
        points = max(self.scan_points, int(math.ceil((hi - lo) / step)) + 1)
        return replace(self, scan_lo=lo, scan_hi=hi, scan_points=points)

    @classmethod
    def parse_scan(cls, text: str, **kwargs) -> "RootFindConfig":
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"scan must be 'lo:hi:points', got {text!r}")
        return cls(scan_lo=float(parts[0]), scan_hi=float(parts[1]), scan_points=int(parts[2]), **kwargs)


@dataclass
class SolutionReport:
    """Roots of one fixed-point problem.

    ``roots`` holds :class:`ReducedField` pairs (or floats for purely scalar
    equations); ``derivatives`` is the slope of the scalar map at each root
    from which ``stability`` is derived.
    """

    roots: list
    residuals: list[float]
    stability: list[str]
    derivatives: list[float] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    regime_note: str = ""
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.roots)

    def as_dict(self) -> dict:
        def root(r):
            if isinstance(r, ReducedField):
                return {"h2": r.h2, "l2": r.l2}
            return r

        return {
            "roots": [root(r) for r in self.roots],
            "residuals": list(self.residuals),
            "stability": list(self.stability),
            "derivatives": list(self.derivatives),
            "tags": list(self.tags),
            "regime_note": self.regime_note,
            "info": dict(self.info),
        }


def stability_tag(slope: float, band: float = STABILITY_BAND) -> str:
    s = abs(slope)
    if s > 1.0 + band:
        return "unstable"
    if s < 1.0 - band:
        return "stable"
    return "marginal"


def _eval(fn: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([fn(float(x)) for x in xs], dtype=float)


def _bisect(fn: Callable, lo: np.ndarray, hi: np.ndarray, flo: np.ndarray, cfg: RootFindConfig) -> np.ndarray:
    """Vectorised bisection on many brackets at once."""
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    for _ in range(cfg.max_iter):
        if np.all(hi - lo <= cfg.tol_x):
            break
        mid = 0.5 * (lo + hi)
        fm = _eval(fn, mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        exact = fm == 0
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
    return 0.5 * (lo + hi)


def scan_roots(residual: Callable, cfg: RootFindConfig | None = None) -> list[tuple[float, bool]]:
    """Like :func:`bracketed_roots` but pairs each root with a flag telling
    whether it was found as a tangency (no sign change)."""
    cfg = cfg or RootFindConfig()
    xs = np.linspace(cfg.scan_lo, cfg.scan_hi, cfg.scan_points)
    r = _eval(residual, xs)
    if not np.all(np.isfinite(r)):
        raise DomainError("residual is not finite on the scan grid")
    s = np.sign(r)
    found: list[tuple[float, bool]] = []

    near = np.abs(r) < cfg.tol_residual
    found.extend((float(x), False) for x in xs[near])

    cross = np.nonzero((s[:-1] * s[1:] < 0) & ~near[:-1] & ~near[1:])[0]
    if cross.size:
        found.extend((float(x), False) for x in _bisect(residual, xs[cross], xs[cross + 1], r[cross], cfg))

    # tangential roots: |r| has an interior local minimum without a sign change
    ar = np.abs(r)
    inner = np.arange(1, len(xs) - 1)
    cand = inner[
        (s[inner - 1] == s[inner]) & (s[inner] == s[inner + 1]) & (s[inner] != 0)
        & (ar[inner] <= ar[inner - 1]) & (ar[inner] <= ar[inner + 1]) & ~near[inner]
    ]
    for i in cand:
        sign = s[i]
        res = minimize_scalar(
            lambda x: sign * float(residual(x)),
            bounds=(xs[i - 1], xs[i + 1]),
            method="bounded",
            options={"xatol": cfg.tol_x, "maxiter": cfg.max_iter},
        )
        xm, fm = float(res.x), float(residual(float(res.x)))
        if abs(fm) < cfg.tol_residual:
            found.append((xm, True))
        elif np.sign(fm) != sign:
            # two roots closer than the grid spacing
            for a, b, fa in ((xs[i - 1], xm, r[i - 1]), (xm, xs[i + 1], fm)):
                x = _bisect(residual, np.array([a]), np.array([b]), np.array([fa]), cfg)[0]
                found.append((float(x), False))

    found.sort()
    merged: list[tuple[float, bool]] = []
    for x, tangent in found:
        if merged and x - merged[-1][0] < 10 * cfg.tol_x:
            continue
        merged.append((x, tangent))
    return merged


def bracketed_roots(residual: Callable, cfg: RootFindConfig | None = None) -> list[float]:
    """All roots of a continuous scalar function inside the scan window.

    Sign changes between grid nodes are bisected to ``tol_x``.  Grid nodes
    with ``|residual| < tol_residual`` count as roots, and interior local
    minima of ``|residual|`` are refined to catch tangential roots.  Roots
    closer than ``10 * tol_x`` are merged.
    """
    return [x for x, _ in scan_roots(residual, cfg)]


def _tags(slopes, tangent) -> list[str]:
    # a tangential root is located only to ~sqrt(eps), so its slope is not trusted
    return ["marginal" if t else stability_tag(s) for s, t in zip(slopes, tangent)]


def _require_b(pattern: BranchPattern) -> None:
    if pattern.b == 0:
        raise ContractError("b = 0: phi/psi are undefined, use the b = 0 solver")


def _prepare(pattern: BranchPattern | None, params: ModelParams) -> None:
    params.require_three_state()
    if pattern is not None:
        pattern.check(params)


def phi_of(h2, pattern: BranchPattern, params: ModelParams):
    """l2 expressed through h2 from the first equation of the reduced system."""
    _require_b(pattern)
    a, b, c, d = pattern.as_tuple()
    return ((b * c - a * d) * kernel_f(h2, params.theta) + d * np.asarray(h2, dtype=float)) / b


def psi_of(h2, pattern: BranchPattern, params: ModelParams):
    """Scalar map whose fixed points are the solutions of the reduced system when b != 0."""
    _require_b(pattern)
    t = params.theta
    return pattern.a * kernel_f(h2, t) + pattern.b * kernel_f(phi_of(h2, pattern, params), t)


def psi_derivative(h2, pattern: BranchPattern, params: ModelParams):
    _require_b(pattern)
    a, b, c, d = pattern.as_tuple()
    t = params.theta
    fp = kernel_f_derivative(h2, t)
    return a * fp + ((b * c - a * d) * fp + d) * kernel_f_derivative(phi_of(h2, pattern, params), t)


def g_of(x, zeta: float, d: int):
    """((1+x)/(ζ+x))^d for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("g is defined for x >= 0 only")
    out = ((1.0 + x) / (zeta + x)) ** d
    return float(out) if out.ndim == 0 else out


def g_derivative(x, zeta: float, d: int):
    """g'(x) = g(x) d (ζ-1) / ((ζ+x)(1+x))."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(g_of(x, zeta, d)) * d * (zeta - 1.0) / ((zeta + x) * (1.0 + x))
    return float(out) if out.ndim == 0 else out


def _field_bound(params: ModelParams) -> float:
    lo, hi = kernel_bounds(params.theta)
    return params.k * max(abs(lo), abs(hi))


def system_residual(root: ReducedField, pattern: BranchPattern, params: ModelParams) -> float:
    """Sup-norm residual of the reduced 2-D system at ``root``."""
    img = reduced_rhs(root, pattern, params)
    return max(abs(img.h2 - root.h2), abs(img.l2 - root.l2))


def ti_roots(params: ModelParams, cfg: RootFindConfig | None = None) -> list[float]:
    """Roots of h = k f(h)."""
    cfg = (cfg or RootFindConfig()).covering(_field_bound(params))
    k, t = params.k, params.theta
    return bracketed_roots(lambda h: h - k * kernel_f(h, t), cfg)


def solve_ti(params: ModelParams, cfg: RootFindConfig | None = None) -> SolutionReport:
    """Translation-invariant solutions: h = k f(h)."""
    _prepare(None, params)
    cfg = cfg or RootFindConfig()
    k, t = params.k, params.theta
    found = scan_roots(lambda h: h - k * kernel_f(h, t), cfg.covering(_field_bound(params)))
    if not found:
        raise ScanWindowError("h = k f(h) always has a root; widen the scan window")
    roots = [h for h, _ in found]
    slopes = [float(k * kernel_f_derivative(h, t)) for h in roots]
    note = f"{len(roots)} translation-invariant solution(s)"
    if t > 1 and len(roots) != 1:
        note += "; WARNING: expected exactly one root for theta > 1"
    return SolutionReport(
        roots=roots,
        residuals=[abs(h - k * kernel_f(h, t)) for h in roots],
        stability=_tags(slopes, [tg for _, tg in found]),
        derivatives=slopes,
        tags=["translation-invariant"] * len(roots),
        regime_note=note,
    )


def choose_h_star(roots: list[float], index: int | None = None) -> float:
    """Middle root when there are three, smallest otherwise, unless ``index`` is given."""
    if not roots:
        raise ScanWindowError("no root of h = k f(h) available")
    if index is not None:
        if not -len(roots) <= index < len(roots):
            raise ContractError(f"h* index {index} out of range for {len(roots)} root(s)")
        return roots[index]
    return roots[1] if len(roots) == 3 else roots[0]


def solve_periodic(params: ModelParams, cfg: RootFindConfig | None = None, tol: float = 1e-9) -> SolutionReport:
    """Two-periodic solutions (a = d = 0): h2 = g(g(h2)), l2 = g(h2), g = k f."""
    _prepare(None, params)
    cfg = (cfg or RootFindConfig()).covering(_field_bound(params))
    k, t = params.k, params.theta

    def g(h):
        return k * kernel_f(h, t)

    def gp(h):
        return k * kernel_f_derivative(h, t)

    found = scan_roots(lambda h: h - g(g(h)), cfg)
    if not found:
        raise ScanWindowError("h = g(g(h)) always has a root; widen the scan window")
    roots = [h for h, _ in found]
    pairs = [ReducedField(h, float(g(h))) for h in roots]
    slopes = [float(gp(p.l2) * gp(p.h2)) for p in pairs]
    tags = ["translation-invariant" if abs(p.h2 - p.l2) < tol else "periodic" for p in pairs]
    pattern = BranchPattern(0, k, k, 0)
    ti = [p.h2 for p, tag in zip(pairs, tags) if tag == "translation-invariant"]
    info = {}
    if ti:
        h_star = ti[len(ti) // 2]
        info["h_star"] = h_star
        info["g_prime_at_h_star"] = float(gp(h_star))
        info["g_prime_below_minus_one"] = bool(gp(h_star) < -1.0)
    return SolutionReport(
        roots=pairs,
        residuals=[system_residual(p, pattern, params) for p in pairs],
        stability=_tags(slopes, [tg for _, tg in found]),
        derivatives=slopes,
        tags=tags,
        regime_note=f"{tags.count('periodic')} periodic, {tags.count('translation-invariant')} translation-invariant",
        info=info,
    )


def solve_b_nonzero(pattern: BranchPattern, params: ModelParams, cfg: RootFindConfig | None = None) -> SolutionReport:
    """All solutions of the reduced system for b != 0 via the scalar map psi."""
    _prepare(pattern, params)
    _require_b(pattern)
    cfg = (cfg or RootFindConfig()).covering(_field_bound(params))
    found = scan_roots(lambda h: h - psi_of(h, pattern, params), cfg)
    if not found:
        raise ScanWindowError("psi is bounded and continuous so it has a fixed point; widen the scan window")
    roots = [h for h, _ in found]
    pairs = [ReducedField(h, float(phi_of(h, pattern, params))) for h in roots]
    slopes = [float(psi_derivative(h, pattern, params)) for h in roots]
    stability = _tags(slopes, [tg for _, tg in found])
    note = f"{len(pairs)} solution(s)"
    if "unstable" in stability and len(pairs) < 3:
        note += "; WARNING: unstable fixed point but fewer than three roots (scan window?)"
    return SolutionReport(
        roots=pairs,
        residuals=[system_residual(p, pattern, params) for p in pairs],
        stability=stability,
        derivatives=slopes,
        regime_note=note,
    )


def _count_transformed(params: ModelParams, c: float, d: int, h_star: float, cfg: RootFindConfig) -> int:
    """Root count of η x = g(x) over the x-image of the scan window."""
    t, k = params.theta, params.k
    zeta = (1.0 + t * t) / (2.0 * t * t)
    log_eta = math.log(2.0) + (d + 1) * math.log(t) - c * h_star / k
    # scan in l = ln(2θx) to keep the grid uniform in the original variable
    l2t = math.log(2.0 * t)

    def resid(l):
        # log form of η x - g(x); both sides can be far below tol_residual
        x = np.exp(np.asarray(l, dtype=float) - l2t)
        return log_eta + np.log(x) - d * (np.log1p(x) - np.log(zeta + x))

    return len(bracketed_roots(resid, cfg))


def solve_b_zero(
    params: ModelParams,
    c: int,
    cfg: RootFindConfig | None = None,
    h_star_index: int | None = None,
) -> SolutionReport:
    """Solutions ``(h*, l2)`` with ``h* = k f(h*)`` and ``l2 = d f(l2) + c h*/k``."""
    _prepare(None, params)
    k, t = params.k, params.theta
    if not 0 <= c <= k:
        raise ContractError(f"c must lie in [0, k] = [0, {k}], got {c}")
    d = k - c
    cfg = (cfg or RootFindConfig()).covering(_field_bound(params))
    hs = ti_roots(params, cfg)
    h_star = choose_h_star(hs, h_star_index)
    shift = c * h_star / k
    found = scan_roots(lambda l: l - d * kernel_f(l, t) - shift, cfg.covering(_field_bound(params) + abs(shift)))
    if not found:
        raise ScanWindowError("l2 = d f(l2) + c h*/k always has a root; widen the scan window")
    roots = [l for l, _ in found]
    pattern = BranchPattern(k, 0, c, d)
    pairs = [ReducedField(h_star, l) for l in roots]
    slopes = [float(d * kernel_f_derivative(l, t)) for l in roots]
    info = {"h_star": h_star, "h_star_candidates": hs, "d": d}
    note = f"{len(pairs)} solution(s) for l2"
    if t != 1.0:
        n_x = _count_transformed(params, c, d, h_star, cfg.covering(_field_bound(params) + abs(shift)))
        info["transformed_count"] = n_x
        if n_x != len(roots):
            note += f"; WARNING: transformed equation eta x = g(x) has {n_x} root(s)"
    info["n_positive_l2"] = sum(1 for l in roots if l > 0)
    return SolutionReport(
        roots=pairs,
        residuals=[system_residual(p, pattern, params) for p in pairs],
        stability=_tags(slopes, [tg for _, tg in found]),
        derivatives=slopes,
        regime_note=note,
        info=info,
    )


def _b_zero_all(pattern: BranchPattern, params: ModelParams, cfg: RootFindConfig) -> SolutionReport:
    """Every solution of the reduced system when b = 0, over all roots h*."""
    t, c, d = params.theta, pattern.c, pattern.d
    pairs, slopes, tangent = [], [], []
    k = params.k
    for h_star, h_tan in scan_roots(lambda h: h - k * kernel_f(h, t), cfg):
        shift = c * kernel_f(h_star, t)
        window = cfg.covering(_field_bound(params) + abs(shift))
        for l, l_tan in scan_roots(lambda l: l - d * kernel_f(l, t) - shift, window):
            pairs.append(ReducedField(h_star, l))
            tangent.append(h_tan or l_tan)
            # block-triangular Jacobian: eigenvalues k f'(h*) and d f'(l2)
            s1 = params.k * kernel_f_derivative(h_star, t)
            s2 = d * kernel_f_derivative(l, t)
            slopes.append(float(max(s1, s2, key=abs)))
    return SolutionReport(
        roots=pairs,
        residuals=[system_residual(p, pattern, params) for p in pairs],
        stability=_tags(slopes, tangent),
        derivatives=slopes,
        regime_note=f"{len(pairs)} solution(s) over all h* roots",
    )


def solve_reduced_system(pattern: BranchPattern, params: ModelParams, cfg: RootFindConfig | None = None) -> SolutionReport:
    """All solutions of ``(h2, l2) = (a f(h2) + b f(l2), c f(h2) + d f(l2))``."""
    _prepare(pattern, params)
    cfg = (cfg or RootFindConfig()).covering(_field_bound(params))
    if pattern.b != 0:
        return solve_b_nonzero(pattern, params, cfg)
    return _b_zero_all(pattern, params, cfg)


def solve_nonTI_23(
    pattern: BranchPattern, params: ModelParams, cfg: RootFindConfig | None = None, tol: float = 1e-9
) -> SolutionReport:
    """Patterns with a = c + 2, d = b + 2; flags solutions outside the
    sub-case h2 = 2 f(h2), l2 = 2 f(l2)."""
    if pattern.a != pattern.c + 2 or pattern.d != pattern.b + 2:
        raise ContractError(f"pattern {pattern.as_tuple()} must satisfy a = c + 2 and d = b + 2")
    report = solve_reduced_system(pattern, params, cfg)
    t = params.theta
    tags = []
    for r in report.roots:
        sub = abs(r.h2 - 2 * kernel_f(r.h2, t)) < tol and abs(r.l2 - 2 * kernel_f(r.l2, t)) < tol
        tags.append("known-subcase" if sub else "new")
    report.tags = tags
    report.regime_note += f"; {tags.count('new')} outside the h2 = 2f(h2), l2 = 2f(l2) sub-case"
    return report
