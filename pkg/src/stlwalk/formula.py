"""Formula AST over sampled 12-channel signals.

Temporal windows are bound to knot indices rather than wall-clock times:
step durations are decision variables in the planner, so the signal is a
fixed-length sequence of knots and windows must survive duration changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import CHANNELS, N_CHANNELS, Builtin


@dataclass(frozen=True)
class IndexWindow:
    """Inclusive sample-index window, shifted by the evaluation index."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid window [{self.lo},{self.hi}]: need 0 <= lo <= hi")

    def shifted(self, i: int, horizon: int) -> range:
        lo, hi = i + self.lo, i + self.hi
        if hi >= horizon:
            raise WindowError(
                f"window [{self.lo},{self.hi}] at index {i} exceeds horizon {horizon}"
            )
        return range(lo, hi + 1)


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class AffineExpr:
    """Affine channel combination a^T y + b."""

    coeffs: np.ndarray
    const: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.coeffs.shape != (N_CHANNELS,):
            raise ValueError(f"coeffs must have shape ({N_CHANNELS},)")

    def negated(self) -> "AffineExpr":
        return AffineExpr(-self.coeffs, -self.const)

    def __str__(self) -> str:
        parts = []
        for c, name in zip(self.coeffs, CHANNELS):
            if c == 0.0:
                continue
            if c == 1.0:
                parts.append(("+ " if parts else "") + name)
            elif c == -1.0:
                parts.append(("- " if parts else "-") + name)
            else:
                mag = float(abs(c))
                sign = "- " if c < 0 else ("+ " if parts else "")
                parts.append(f"{sign}{mag!r}*{name}")
        if self.const != 0.0 or not parts:
            mag = float(abs(self.const))
            sign = "- " if self.const < 0 else ("+ " if parts else "")
            parts.append(f"{sign}{mag!r}")
        return " ".join(parts)


class Formula:
    """Base class; subclasses form the abstract syntax tree."""

    def __and__(self, other: "Formula") -> "Formula":
        return And([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return Or([self, other])

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Predicate(Formula):
    """mu(y) - c >= 0 where mu is affine or a registered builtin."""

    expr: AffineExpr | Builtin
    offset: float = 0.0


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __init__(self, children) -> None:
        object.__setattr__(self, "children", tuple(children))
        if len(self.children) < 2:
            raise ValueError("And requires at least 2 children")


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __init__(self, children) -> None:
        object.__setattr__(self, "children", tuple(children))
        if len(self.children) < 2:
            raise ValueError("Or requires at least 2 children")


@dataclass(frozen=True)
class Eventually(Formula):
    window: IndexWindow | None  # None = rest of horizon
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    window: IndexWindow | None  # None = rest of horizon
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    window: IndexWindow
    left: Formula
    right: Formula


def print_formula(f: Formula) -> str:
    """Concrete syntax accepted back by the parser (same schema)."""
    if isinstance(f, Predicate):
        if isinstance(f.expr, Builtin):
            name = f.expr.name
            args = f.expr.args
            rendered = name if not args else f"{name}({', '.join(repr(float(a)) for a in args)})"
            if f.offset != 0.0:
                # builtins carry their own threshold; a nonzero offset is folded
                # into an explicit comparison form on printing
                raise ValueError("builtin predicates must use offset 0")
            return rendered
        return f"{f.expr} >= {float(f.offset)!r}"
    if isinstance(f, Not):
        return f"not ({print_formula(f.child)})"
    if isinstance(f, And):
        return " and ".join(f"({print_formula(c)})" for c in f.children)
    if isinstance(f, Or):
        return " or ".join(f"({print_formula(c)})" for c in f.children)
    if isinstance(f, Eventually):
        w = f" [{f.window.lo},{f.window.hi}]" if f.window is not None else ""
        return f"eventually{w} ({print_formula(f.child)})"
    if isinstance(f, Always):
        w = f" [{f.window.lo},{f.window.hi}]" if f.window is not None else ""
        return f"always{w} ({print_formula(f.child)})"
    if isinstance(f, Until):
        return (
            f"({print_formula(f.left)}) until [{f.window.lo},{f.window.hi}] "
            f"({print_formula(f.right)})"
        )
    raise TypeError(f"not a formula: {f!r}")


def iter_predicates(f: Formula):
    if isinstance(f, Predicate):
        yield f
    elif isinstance(f, Not):
        yield from iter_predicates(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from iter_predicates(c)
    elif isinstance(f, (Eventually, Always)):
        yield from iter_predicates(f.child)
    elif isinstance(f, Until):
        yield from iter_predicates(f.left)
        yield from iter_predicates(f.right)
