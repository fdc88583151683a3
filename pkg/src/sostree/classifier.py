"""Regime classification: how many solutions (hence splitting Gibbs measures)
a parameter point is guaranteed to have, and which known family each
solution belongs to."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .criticals import (
    DEFAULT_BOUNDARY_TOL,
    CriticalSet,
    PrefactorConvention,
    c_star_bounds,
    critical_set,
    theta_critical,
)
from .errors import ContractError, DegenerateError, RegimeError
from .model import BranchPattern, ModelParams
from .solvers import (
    STABILITY_BAND,
    RootFindConfig,
    SolutionReport,
    psi_derivative,
    psi_of,
    solve_b_nonzero,
    solve_b_zero,
)

__all__ = [
    "Regime",
    "Family",
    "RegimeReport",
    "count_N",
    "check_th1_condition",
    "family_tag",
    "classify_point",
]


class Regime(enum.Enum):
    UNIQUE = 1
    BOUNDARY_PAIR = 2
    TRIPLE = 3

    @classmethod
    def from_count(cls, n: int) -> "Regime":
        return {1: cls.UNIQUE, 2: cls.BOUNDARY_PAIR}.get(n, cls.TRIPLE)


class Family(enum.Enum):
    TRANSLATION_INVARIANT = "translation-invariant"
    PERIODIC = "periodic"
    NONPERIODIC_NEW = "nonperiodic-new"


@dataclass
class RegimeReport:
    regime: Regime
    n_solutions_predicted: int
    n_solutions_found: int
    theorem_applied: str
    solutions: SolutionReport
    family_tags: list[Family] = field(default_factory=list)
    criticals: CriticalSet | None = None
    condition_value: float | None = None

    def as_dict(self) -> dict:
        crit = None
        if self.criticals is not None:
            crit = {
                k: (v.name if isinstance(v, enum.Enum) else v)
                for k, v in self.criticals.__dict__.items()
            }
        return {
            "regime": self.regime.name,
            "n_solutions_predicted": self.n_solutions_predicted,
            "n_solutions_found": self.n_solutions_found,
            "theorem_applied": self.theorem_applied,
            "condition_value": self.condition_value,
            "family_tags": [t.name for t in self.family_tags],
            "criticals": crit,
            "solutions": self.solutions.as_dict(),
        }


def count_N(
    theta: float,
    c: float,
    d: int,
    h_star: float,
    convention: PrefactorConvention = PrefactorConvention.K_OVER_HSTAR,
    tol: float = DEFAULT_BOUNDARY_TOL,
) -> int:
    """Predicted number of solutions of ``l2 = d f(l2) + c h*/k`` with ``k = c + d``.

    ``c`` may be real.  Points within ``tol * max(1, |c*|)`` of a critical
    value are classified as the two-solution boundary case.
    """
    if h_star == 0:
        raise DegenerateError("h* = 0: critical field parameters are undefined")
    if theta >= 1:
        raise RegimeError("count_N needs theta < 1 (zeta > 1)")
    if theta >= theta_critical(d) - tol:
        return 1
    c1, c2 = c_star_bounds(theta, c + d, d, h_star, convention, tol)
    if abs(c - c1) < tol * max(1.0, abs(c1)) or abs(c - c2) < tol * max(1.0, abs(c2)):
        return 2
    if c1 < c < c2:
        return 3
    return 1


def check_th1_condition(
    pattern: BranchPattern, params: ModelParams, h2_star: float, tol_residual: float = 1e-9
) -> tuple[bool, float]:
    """``(|psi'(h2*)| > 1, |psi'(h2*)|)`` at a fixed point of psi."""
    res = abs(h2_star - psi_of(h2_star, pattern, params))
    if res > tol_residual:
        raise ContractError(f"h2* = {h2_star!r} is not a fixed point of psi (residual {res:.3g})")
    value = abs(float(psi_derivative(h2_star, pattern, params)))
    return (value > 1.0 + STABILITY_BAND, value)


def family_tag(h2: float, l2: float, pattern: BranchPattern, tol: float = 1e-9) -> Family:
    if abs(h2 - l2) < tol:
        return Family.TRANSLATION_INVARIANT
    if pattern.a == 0 and pattern.d == 0:
        return Family.PERIODIC
    return Family.NONPERIODIC_NEW


def classify_point(
    pattern: BranchPattern,
    params: ModelParams,
    cfg: RootFindConfig | None = None,
    convention: PrefactorConvention = PrefactorConvention.K_OVER_HSTAR,
    h_star_index: int | None = None,
    tol: float = DEFAULT_BOUNDARY_TOL,
) -> RegimeReport:
    """Predicted versus found solution counts at one parameter point.

    ``b != 0``: three solutions are predicted when some fixed point of psi has
    ``|psi'| > 1``, two when one is marginal (a tangency).  ``b = 0``: the
    count comes from the c* trichotomy.
    """
    params.require_three_state()
    pattern.check(params)
    cfg = cfg or RootFindConfig()
    if pattern.b != 0:
        sols = solve_b_nonzero(pattern, params, cfg)
        top = max(abs(s) for s in sols.derivatives)
        if "unstable" in sols.stability:
            predicted = 3
        elif "marginal" in sols.stability:
            predicted = 2
        else:
            predicted = 1
        crit = None
        theorem = "b!=0: |psi'(h2*)| > 1 implies at least three solutions"
        value = top
    else:
        sols = solve_b_zero(params, pattern.c, cfg, h_star_index)
        h_star = sols.info["h_star"]
        d = pattern.d
        crit = None
        value = None
        if params.theta < 1.0 and d >= 2 and h_star != 0:
            predicted = count_N(params.theta, pattern.c, d, h_star, convention, tol)
            crit = critical_set(params.theta, d, params.k, h_star, convention, tol)
            theorem = "b=0: N(theta, c) trichotomy in theta_c, c*1, c*2"
        else:
            predicted = 1
            theorem = "b=0: unique solution (theta >= 1 or d < 2)"
    tags = [family_tag(r.h2, r.l2, pattern) for r in sols.roots]
    return RegimeReport(
        regime=Regime.from_count(predicted),
        n_solutions_predicted=predicted,
        n_solutions_found=len(sols.roots),
        theorem_applied=theorem,
        solutions=sols,
        family_tags=tags,
        criticals=crit,
        condition_value=value,
    )
