"""Seeded random formulas and signals for property tests."""

from __future__ import annotations

import numpy as np

from stlwalk.channels import N_CHANNELS
from stlwalk.formula import (
    AffineExpr,
    Always,
    And,
    Eventually,
    IndexWindow,
    Not,
    Or,
    Predicate,
    Until,
)

OPERATORS = ("pred", "not", "and", "or", "eventually", "always", "until")


def random_signal(rng: np.random.Generator, length: int, scale: float = 1.5) -> np.ndarray:
    return scale * rng.standard_normal((length, N_CHANNELS))


def random_predicate(rng: np.random.Generator, nonneg: bool = False) -> Predicate:
    coeffs = np.zeros(N_CHANNELS)
    for idx in rng.choice(N_CHANNELS, size=rng.integers(1, 4), replace=False):
        c = rng.uniform(0.2, 2.0)
        coeffs[idx] = c if nonneg else c * rng.choice([-1.0, 1.0])
    return Predicate(AffineExpr(coeffs, float(rng.uniform(-1, 1))), float(rng.uniform(-1, 1)))


def random_formula(
    rng: np.random.Generator,
    depth: int,
    budget: int,
    allow_not: bool = True,
    nonneg: bool = False,
):
    """A random formula whose shifted windows stay within ``budget`` indices."""
    ops = list(OPERATORS)
    if depth <= 0:
        ops = ["pred"]
    if not allow_not and "not" in ops:
        ops.remove("not")
    if budget <= 0:
        for name in ("eventually", "always", "until"):
            ops.remove(name)
    op = ops[rng.integers(len(ops))]
    if op == "pred":
        return random_predicate(rng, nonneg)
    if op == "not":
        return Not(random_formula(rng, depth - 1, budget, allow_not, nonneg))
    if op in ("and", "or"):
        n = int(rng.integers(2, 4))
        children = [random_formula(rng, depth - 1, budget, allow_not, nonneg) for _ in range(n)]
        return (And if op == "and" else Or)(children)
    lo = int(rng.integers(0, budget))
    hi = int(rng.integers(lo, budget))
    window = IndexWindow(lo, hi)
    if op == "until":
        left = random_formula(rng, depth - 1, budget - hi, allow_not, nonneg)
        right = random_formula(rng, depth - 1, budget - hi, allow_not, nonneg)
        return Until(window, left, right)
    child = random_formula(rng, depth - 1, budget - hi, allow_not, nonneg)
    return (Eventually if op == "eventually" else Always)(window, child)


def enumerate_shapes(horizon: int):
    """Small closed corpus covering every operator shape up to depth 3."""
    p1 = Predicate(AffineExpr(np.eye(N_CHANNELS)[0], 0.0), 0.3)
    p2 = Predicate(AffineExpr(-2.0 * np.eye(N_CHANNELS)[7], 0.1), -0.2)
    p3 = Predicate(AffineExpr(np.eye(N_CHANNELS)[3] + np.eye(N_CHANNELS)[4], -0.5), 0.0)
    w1 = IndexWindow(0, horizon - 1)
    w2 = IndexWindow(1, max(1, horizon - 2))
    shapes = [
        p1,
        Not(p1),
        And([p1, p2]),
        Or([p1, p2, p3]),
        Eventually(w1, p1),
        Always(w1, p2),
        Until(w2, p1, p2),
        Not(And([p1, Or([p2, p3])])),
        Always(IndexWindow(0, 1), Eventually(IndexWindow(0, horizon - 2), p3)),
        Eventually(IndexWindow(0, 1), And([p1, Not(p2)])),
        Until(IndexWindow(0, 1), Or([p1, p3]), And([p2, p3])),
        And([Always(IndexWindow(0, 1), p1), Eventually(IndexWindow(0, 1), Not(p3))]),
    ]
    return shapes
