"""Boolean, quantitative, and smooth formula semantics over sampled signals.

The quantitative semantics is the usual min/max recursion; the smooth
variant replaces min/max with log-sum-exp counterparts so the result is
differentiable in every sample entry.  Gradients are computed by reverse
accumulation through the formula tree.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .channels import Builtin, MissingGradientError, N_CHANNELS
from .formula import (
    AffineExpr,
    Always,
    And,
    Eventually,
    Formula,
    Not,
    Or,
    Predicate,
    Until,
    WindowError,
)
from .trajectory import Trajectory

SignalLike = Union[Trajectory, np.ndarray]


def _samples_of(signal: SignalLike) -> np.ndarray:
    if isinstance(signal, Trajectory):
        return signal.samples
    samples = np.asarray(signal, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != N_CHANNELS:
        raise ValueError(f"signal must be (M, {N_CHANNELS})")
    return samples


def _window_range(window, i: int, horizon: int) -> range:
    if window is None:
        return range(i, horizon)
    return window.shifted(i, horizon)


def smooth_max(values: np.ndarray, k: float) -> float:
    """(1/k) ln sum exp(k a_i), computed with the max subtracted first."""
    values = np.asarray(values, dtype=float)
    m = float(np.max(values))
    return m + math.log(float(np.sum(np.exp(k * (values - m))))) / k


def smooth_min(values: np.ndarray, k: float) -> float:
    return -smooth_max(-np.asarray(values, dtype=float), k)


def smooth_max_weights(values: np.ndarray, k: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    e = np.exp(k * (values - np.max(values)))
    return e / np.sum(e)

def smooth_min_weights(values: np.ndarray, k: float) -> np.ndarray:
    return smooth_max_weights(-np.asarray(values, dtype=float), k)


# --- boolean semantics -----------------------------------------------------


def eval_boolean(f: Formula, signal: SignalLike, i: int = 0) -> bool:
    """Discrete-sample validity: quantifiers range over shifted knot indices."""
    samples = _samples_of(signal)
    horizon = len(samples)
    return _eval_bool(f, samples, i, horizon)


def _eval_bool(f: Formula, samples: np.ndarray, i: int, horizon: int) -> bool:
    if i < 0 or i >= horizon:
        raise WindowError(f"evaluation index {i} outside horizon {horizon}")
    if isinstance(f, Predicate):
        return _predicate_value(f, samples, i, smooth=False) >= 0.0
    if isinstance(f, Not):
        return not _eval_bool(f.child, samples, i, horizon)
    if isinstance(f, And):
        return all(_eval_bool(c, samples, i, horizon) for c in f.children)
    if isinstance(f, Or):
        return any(_eval_bool(c, samples, i, horizon) for c in f.children)
    if isinstance(f, Eventually):
        return any(
            _eval_bool(f.child, samples, j, horizon)
            for j in _window_range(f.window, i, horizon)
        )
    if isinstance(f, Always):
        return all(
            _eval_bool(f.child, samples, j, horizon)
            for j in _window_range(f.window, i, horizon)
        )
    if isinstance(f, Until):
        window = _window_range(f.window, i, horizon)
        start = window.start
        for t1 in window:
            if _eval_bool(f.right, samples, t1, horizon) and all(
                _eval_bool(f.left, samples, t2, horizon) for t2 in range(start, t1 + 1)
            ):
                return True
        return False
    raise TypeError(f"not a formula: {f!r}")


# --- exact robustness -------------------------------------------------------


def robustness(f: Formula, signal: SignalLike, i: int = 0) -> float:
    samples = _samples_of(signal)
    return _rho(f, samples, i, len(samples))


def _predicate_value(f: Predicate, samples: np.ndarray, i: int, smooth: bool) -> float:
    if isinstance(f.expr, Builtin):
        return f.expr.value_at(samples, i, smooth) - f.offset
    return float(np.dot(f.expr.coeffs, samples[i]) + f.expr.const - f.offset)


def _rho(f: Formula, samples: np.ndarray, i: int, horizon: int) -> float:
    if i < 0 or i >= horizon:
        raise WindowError(f"evaluation index {i} outside horizon {horizon}")
    if isinstance(f, Predicate):
        return _predicate_value(f, samples, i, smooth=False)
    if isinstance(f, Not):
        return -_rho(f.child, samples, i, horizon)
    if isinstance(f, And):
        return min(_rho(c, samples, i, horizon) for c in f.children)
    if isinstance(f, Or):
        return max(_rho(c, samples, i, horizon) for c in f.children)
    if isinstance(f, Eventually):
        return max(
            _rho(f.child, samples, j, horizon) for j in _window_range(f.window, i, horizon)
        )
    if isinstance(f, Always):
        return min(
            _rho(f.child, samples, j, horizon) for j in _window_range(f.window, i, horizon)
        )
    if isinstance(f, Until):
        window = _window_range(f.window, i, horizon)
        start = window.start
        best = -math.inf
        running_left = math.inf
        for t1 in window:
            running_left = min(running_left, _rho(f.left, samples, t1, horizon))
            best = max(best, min(_rho(f.right, samples, t1, horizon), running_left))
        return best
    raise TypeError(f"not a formula: {f!r}")


# --- smooth robustness ------------------------------------------------------


class _SmoothEval:
    """One smooth evaluation pass with cached node values for the backward sweep."""

    def __init__(self, samples: np.ndarray, k: float) -> None:
        if k <= 0:
            raise ValueError("smoothing temperature k must be positive")
        self.samples = samples
        self.horizon = len(samples)
        self.k = k
        self.cache: dict[tuple[int, int], float] = {}

    def value(self, f: Formula, i: int) -> float:
        key = (id(f), i)
        got = self.cache.get(key)
        if got is not None:
            return got
        val = self._compute(f, i)
        self.cache[key] = val
        return val

    def _compute(self, f: Formula, i: int) -> float:
        if i < 0 or i >= self.horizon:
            raise WindowError(f"evaluation index {i} outside horizon {self.horizon}")
        k = self.k
        if isinstance(f, Predicate):
            return _predicate_value(f, self.samples, i, smooth=True)
        if isinstance(f, Not):
            return -self.value(f.child, i)
        if isinstance(f, And):
            return smooth_min(np.array([self.value(c, i) for c in f.children]), k)
        if isinstance(f, Or):
            return smooth_max(np.array([self.value(c, i) for c in f.children]), k)
        if isinstance(f, Eventually):
            js = _window_range(f.window, i, self.horizon)
            return smooth_max(np.array([self.value(f.child, j) for j in js]), k)
        if isinstance(f, Always):
            js = _window_range(f.window, i, self.horizon)
            return smooth_min(np.array([self.value(f.child, j) for j in js]), k)
        if isinstance(f, Until):
            window = _window_range(f.window, i, self.horizon)
            start = window.start
            outer = []
            for t1 in window:
                inner = [self.value(f.right, t1)]
                inner += [self.value(f.left, t2) for t2 in range(start, t1 + 1)]
                outer.append(smooth_min(np.array(inner), k))
            return smooth_max(np.array(outer), k)
        raise TypeError(f"not a formula: {f!r}")

    def backward(self, f: Formula, i: int, weight: float, grad: np.ndarray) -> None:
        k = self.k
        if isinstance(f, Predicate):
            if isinstance(f.expr, Builtin):
                for idx, row in f.expr.grad_at(self.samples, i, smooth=True).items():
                    grad[idx] += weight * row
            else:
                grad[i] += weight * f.expr.coeffs
            return
        if isinstance(f, Not):
            self.backward(f.child, i, -weight, grad)
            return
        if isinstance(f, And):
            vals = np.array([self.value(c, i) for c in f.children])
            for w, c in zip(smooth_min_weights(vals, k), f.children):
                self.backward(c, i, weight * w, grad)
            return
        if isinstance(f, Or):
            vals = np.array([self.value(c, i) for c in f.children])
            for w, c in zip(smooth_max_weights(vals, k), f.children):
                self.backward(c, i, weight * w, grad)
            return
        if isinstance(f, Eventually):
            js = list(_window_range(f.window, i, self.horizon))
            vals = np.array([self.value(f.child, j) for j in js])
            for w, j in zip(smooth_max_weights(vals, k), js):
                self.backward(f.child, j, weight * w, grad)
            return
        if isinstance(f, Always):
            js = list(_window_range(f.window, i, self.horizon))
            vals = np.array([self.value(f.child, j) for j in js])
            for w, j in zip(smooth_min_weights(vals, k), js):
                self.backward(f.child, j, weight * w, grad)
            return
        if isinstance(f, Until):
            window = list(_window_range(f.window, i, self.horizon))
            start = window[0]
            inner_vals = []
            for t1 in window:
                inner = [self.value(f.right, t1)]
                inner += [self.value(f.left, t2) for t2 in range(start, t1 + 1)]
                inner_vals.append(np.array(inner))
            outer = np.array([smooth_min(v, k) for v in inner_vals])
            outer_w = smooth_max_weights(outer, k)
            for ow, t1, inner in zip(outer_w, window, inner_vals):
                iw = smooth_min_weights(inner, k)
                self.backward(f.right, t1, weight * ow * iw[0], grad)
                for w2, t2 in zip(iw[1:], range(start, t1 + 1)):
                    self.backward(f.left, t2, weight * ow * w2, grad)
            return
        raise TypeError(f"not a formula: {f!r}")


def smooth_robustness(f: Formula, signal: SignalLike, i: int = 0, k: float = 50.0) -> float:
    samples = _samples_of(signal)
    return _SmoothEval(samples, k).value(f, i)


def smooth_robustness_gradient(
    f: Formula, signal: SignalLike, i: int = 0, k: float = 50.0
) -> np.ndarray:
    """d smooth_robustness / d samples, shape (M, 12)."""
    samples = _samples_of(signal)
    ev = _SmoothEval(samples, k)
    ev.value(f, i)
    grad = np.zeros_like(samples)
    ev.backward(f, i, 1.0, grad)
    return grad


def smooth_robustness_and_gradient(
    f: Formula, signal: SignalLike, i: int = 0, k: float = 50.0
) -> tuple[float, np.ndarray]:
    """Value and gradient in one evaluation pass (planner hot path)."""
    samples = _samples_of(signal)
    ev = _SmoothEval(samples, k)
    val = ev.value(f, i)
    grad = np.zeros_like(samples)
    ev.backward(f, i, 1.0, grad)
    return val, grad


def smoothing_error_bound(f: Formula, horizon: int, i: int = 0, k: float = 50.0) -> float:
    """Accumulated one-sided log-sum-exp bound along the deepest operator path.

    Each smooth min/max over n terms deviates from the exact operator by at
    most ln(n)/k, so |smooth - exact| is bounded by the sum of ln(n)/k over
    the worst path through the tree.
    """
    if isinstance(f, Predicate):
        return 0.0
    if isinstance(f, Not):
        return smoothing_error_bound(f.child, horizon, i, k)
    if isinstance(f, (And, Or)):
        child = max(smoothing_error_bound(c, horizon, i, k) for c in f.children)
        return child + math.log(len(f.children)) / k
    if isinstance(f, (Eventually, Always)):
        js = _window_range(f.window, i, horizon)
        child = max(smoothing_error_bound(f.child, horizon, j, k) for j in js)
        return child + math.log(len(js)) / k
    if isinstance(f, Until):
        window = _window_range(f.window, i, horizon)
        start = window.start
        worst_inner = 0.0
        for t1 in window:
            n_inner = 2 + (t1 - start)
            inner = math.log(n_inner) / k + max(
                smoothing_error_bound(f.right, horizon, t1, k),
                max(smoothing_error_bound(f.left, horizon, t2, k) for t2 in range(start, t1 + 1)),
            )
            worst_inner = max(worst_inner, inner)
        return worst_inner + math.log(len(window)) / k
    raise TypeError(f"not a formula: {f!r}")
