"""Exact finite-volume distributions on a ball of the Cayley tree.

The ball ``V_n`` is enumerated completely: the unnormalised log-weight of a
configuration is ``ln θ · Σ_edges |σ(x) - σ(y)| + Σ_{x ∈ W_n} h_{σ(x), x}``,
held as a dense tensor with one axis of length 3 per vertex.  Vertices are
numbered breadth-first, so the ball ``V_{n-1}`` is a prefix of ``V_n`` and
marginalising onto it is a reshape and a sum.
"""
from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BudgetError, ContractError, DomainError
from .model import BranchPattern

__all__ = [
    "DEFAULT_BUDGET",
    "Label",
    "FiniteTree",
    "FieldAssignment",
    "ExactDistribution",
    "build_tree",
    "hamiltonian",
    "assign_fields",
    "exact_mu_n",
    "check_compatibility",
    "root_marginal",
    "write_distribution_csv",
]

DEFAULT_BUDGET = 14
N_SPINS = 3


class Label(enum.Enum):
    H_BAR = "H"
    L_BAR = "L"

    @classmethod
    def parse(cls, text: str) -> "Label":
        t = text.strip().upper()
        for member in cls:
            if t in (member.value, member.name):
                return member
        raise DomainError(f"unknown label {text!r} (use H or L)")


@dataclass(frozen=True)
class FiniteTree:
    n: int
    k: int
    parent: tuple[int, ...]
    depth: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p >= 0]

    def sphere(self, j: int) -> list[int]:
        return [v for v, dep in enumerate(self.depth) if dep == j]

    def children(self, v: int) -> list[int]:
        return [u for u, p in enumerate(self.parent) if p == v]

    def truncate(self, n: int) -> "FiniteTree":
        """The sub-ball ``V_n``; a prefix of the vertex numbering."""
        if not 0 <= n <= self.n:
            raise DomainError(f"cannot truncate a radius-{self.n} ball to radius {n}")
        m = sum(1 for dep in self.depth if dep <= n)
        return FiniteTree(n, self.k, self.parent[:m], self.depth[:m])


def ball_size(k: int, n: int) -> int:
    return 1 + sum((k + 1) * k ** (j - 1) for j in range(1, n + 1))


def build_tree(k: int, n: int, budget: int = DEFAULT_BUDGET) -> FiniteTree:
    """Breadth-first ball of radius ``n``; the root has ``k + 1`` children,
    every other vertex ``k``."""
    if k < 1 or n < 0:
        raise DomainError(f"need k >= 1 and n >= 0, got k={k}, n={n}")
    size = ball_size(k, n)
    if size > budget:
        raise BudgetError(
            f"|V_{n}| = {size} vertices for k = {k} exceeds the enumeration budget of {budget} "
            f"(3^{size} configurations)"
        )
    parent, depth = [-1], [0]
    frontier = [0]
    for j in range(1, n + 1):
        nxt = []
        for v in frontier:
            for _ in range(k + 1 if v == 0 else k):
                parent.append(v)
                depth.append(j)
                nxt.append(len(parent) - 1)
        frontier = nxt
    return FiniteTree(n, k, tuple(parent), tuple(depth))


def hamiltonian(config, tree: FiniteTree, J: float) -> float:
    """``-J Σ |σ(x) - σ(y)|`` over the edges of the ball."""
    config = list(config)
    if len(config) != tree.size:
        raise ContractError(f"configuration has {len(config)} spins, the ball has {tree.size} vertices")
    return -J * sum(abs(config[p] - config[v]) for p, v in tree.edges)


@dataclass(frozen=True)
class FieldAssignment:
    """Per-vertex labels and full log-weight vectors ``(h_0, h_1, h_2)``.

    A reduced value ``t`` is embedded as ``(0, t, 0)``: its gauge-reduced form
    ``(h_0 - h_2, h_1 - h_2)`` is ``(0, t)``, a point of the invariant set.
    """

    tree: FiniteTree
    labels: tuple[Label, ...]
    fields: np.ndarray  # shape (size, 3)

    def perturbed(self, delta_h, delta_l) -> "FieldAssignment":
        """Shift the H- and L-vertex field vectors by fixed 3-vectors."""
        dh, dl = np.asarray(delta_h, float), np.asarray(delta_l, float)
        shift = np.array([dh if lab is Label.H_BAR else dl for lab in self.labels])
        return FieldAssignment(self.tree, self.labels, self.fields + shift)

    def restrict(self, tree: FiniteTree) -> "FieldAssignment":
        return FieldAssignment(tree, self.labels[: tree.size], self.fields[: tree.size])


def assign_fields(
    tree: FiniteTree,
    pattern: BranchPattern,
    h2: float,
    l2: float,
    root_label: Label = Label.H_BAR,
    root_split: tuple[int, int] | None = None,
) -> FieldAssignment:
    """Label the ball top-down by the branching rule and lift labels to fields.

    ``root_split = (#H, #L)`` among the root's ``k + 1`` children; by default
    the pattern row of the root's label is used and the extra child copies the
    root's own label.  Within each vertex, H-children come first.
    """
    if pattern.k != tree.k:
        raise ContractError(f"pattern {pattern.as_tuple()} does not match tree order k = {tree.k}")
    if root_split is None:
        if root_label is Label.H_BAR:
            root_split = (pattern.a + 1, pattern.b)
        else:
            root_split = (pattern.c, pattern.d + 1)
    if len(root_split) != 2 or min(root_split) < 0 or sum(root_split) != tree.k + 1:
        raise ContractError(f"root_split {tuple(root_split)} must be two nonnegative counts summing to k + 1 = {tree.k + 1}")
    labels: list[Label] = [root_label]
    for v in range(1, tree.size):
        labels.append(None)  # type: ignore[arg-type]
    for v in range(tree.size):
        kids = tree.children(v)
        if not kids:
            continue
        if v == 0:
            nh = root_split[0]
        elif labels[v] is Label.H_BAR:
            nh = pattern.a
        else:
            nh = pattern.c
        for i, u in enumerate(kids):
            labels[u] = Label.H_BAR if i < nh else Label.L_BAR
    vec = {Label.H_BAR: (0.0, h2, 0.0), Label.L_BAR: (0.0, l2, 0.0)}
    fields = np.array([vec[lab] for lab in labels], dtype=float)
    return FieldAssignment(tree, tuple(labels), fields)


@dataclass(frozen=True)
class ExactDistribution:
    volume: FiniteTree
    probabilities: np.ndarray  # one axis of length 3 per vertex
    log_partition: float
    log_weights: np.ndarray

    @property
    def partition_value(self) -> float:
        return math.exp(self.log_partition)

    def probability(self, config) -> float:
        return float(self.probabilities[tuple(config)])

    def items(self):
        """``(config, probability)`` pairs in lexicographic configuration order."""
        flat = self.probabilities.reshape(-1)
        for idx, cfg in enumerate(itertools.product(range(N_SPINS), repeat=self.volume.size)):
            yield cfg, float(flat[idx])


def _log_weights(tree: FiniteTree, fields: np.ndarray, theta: float) -> np.ndarray:
    size = tree.size
    spins = np.arange(N_SPINS)
    gap = np.abs(spins[:, None] - spins[None, :]).astype(float)
    lt = math.log(theta)
    logw = np.zeros((N_SPINS,) * size)
    for p, v in tree.edges:
        shape = [1] * size
        shape[p], shape[v] = N_SPINS, N_SPINS
        logw = logw + (lt * gap).reshape(shape)
    for v in tree.sphere(tree.n):
        shape = [1] * size
        shape[v] = N_SPINS
        logw = logw + fields[v].reshape(shape)
    return logw


def exact_mu_n(
    tree: FiniteTree, fields: FieldAssignment, theta: float, budget: int = DEFAULT_BUDGET
) -> ExactDistribution:
    """Full table of ``μ^(n)``; boundary fields enter on the outer sphere only."""
    if not (math.isfinite(theta) and theta > 0):
        raise DomainError(f"theta must be positive, got {theta!r}")
    if tree.size > budget:
        raise BudgetError(f"|V_n| = {tree.size} exceeds the enumeration budget of {budget}")
    if fields.fields.shape != (tree.size, N_SPINS):
        raise ContractError("field assignment does not match the tree")
    logw = _log_weights(tree, fields.fields, theta)
    top = float(logw.max())
    w = np.exp(logw - top)
    z = float(w.sum())
    return ExactDistribution(tree, w / z, top + math.log(z), logw)


def check_compatibility(
    tree_n: FiniteTree, fields: FieldAssignment, theta: float, budget: int = DEFAULT_BUDGET
) -> float:
    """Max |marginal of μ^(n) on V_{n-1} − μ^(n-1)| over configurations of V_{n-1}.

    ``μ^(n-1)`` uses the same assignment, i.e. the fields sitting on ``W_{n-1}``.
    """
    if tree_n.n < 1:
        raise DomainError("compatibility needs n >= 1")
    inner = tree_n.truncate(tree_n.n - 1)
    mu_n = exact_mu_n(tree_n, fields, theta, budget)
    mu_prev = exact_mu_n(inner, fields.restrict(inner), theta, budget)
    marg = mu_n.probabilities.reshape(N_SPINS ** inner.size, -1).sum(axis=1)
    return float(np.max(np.abs(marg - mu_prev.probabilities.reshape(-1))))


def root_marginal(dist: ExactDistribution) -> np.ndarray:
    p = dist.probabilities
    return p.reshape(N_SPINS, -1).sum(axis=1)


def write_distribution_csv(dist: ExactDistribution, path: str | Path) -> None:
    """Audit dump: one row per configuration (config string, weight, probability)."""
    flat_lw = dist.log_weights.reshape(-1)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["config", "weight", "probability"])
        for idx, (cfg, prob) in enumerate(dist.items()):
            out.writerow(["".join(map(str, cfg)), f"{math.exp(flat_lw[idx]):.17g}", f"{prob:.17g}"])
