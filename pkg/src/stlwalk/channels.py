"""Signal schema: the 12 output channels and registered builtin predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Output signal y = [p_com; v_com; p_swing; u], one row per knot/sample.
CHANNELS = (
    "p_com_x", "p_com_y", "p_com_z",
    "v_com_x", "v_com_y", "v_com_z",
    "p_swing_x", "p_swing_y", "p_swing_z",
    "u_x", "u_y", "u_z",
)
N_CHANNELS = len(CHANNELS)
CHANNEL_INDEX = {name: i for i, name in enumerate(CHANNELS)}


@dataclass(frozen=True)
class Builtin:
    """A registered differentiable predicate over the sampled signal.

    ``value(samples, i)`` returns the predicate margin at sample ``i``;
    ``grad(samples, i)`` returns {sample_index: d value / d y[sample_index]}
    so a builtin may (rarely) depend on samples other than ``i``.

    ``smooth_value``/``smooth_grad`` are the variants used inside the
    optimizer; they default to the exact pair.  They exist so that
    non-smooth margins (absolute values, fractional powers) can be
    regularized without changing the exact semantics.
    """

    name: str
    value: Callable[[np.ndarray, int], float]
    grad: Callable[[np.ndarray, int], dict[int, np.ndarray]]
    args: tuple[float, ...] = ()
    smooth_value: Callable[[np.ndarray, int], float] | None = None
    smooth_grad: Callable[[np.ndarray, int], dict[int, np.ndarray]] | None = None

    def value_at(self, samples: np.ndarray, i: int, smooth: bool) -> float:
        if smooth and self.smooth_value is not None:
            return self.smooth_value(samples, i)
        return self.value(samples, i)

    def grad_at(self, samples: np.ndarray, i: int, smooth: bool) -> dict[int, np.ndarray]:
        if smooth and self.smooth_grad is not None:
            return self.smooth_grad(samples, i)
        if self.grad is None:
            raise MissingGradientError(f"builtin '{self.name}' has no gradient")
        return self.grad(samples, i)


class MissingGradientError(RuntimeError):
    pass


class UnknownChannelError(KeyError):
    pass


class SignalSchema:
    """Channel names plus a registry of builtin predicates."""

    def __init__(self) -> None:
        self._builtins: dict[str, Builtin] = {}

    def register(self, builtin: Builtin) -> Builtin:
        if builtin.name in CHANNEL_INDEX:
            raise ValueError(f"builtin '{builtin.name}' shadows a channel name")
        self._builtins[builtin.name] = builtin
        return builtin

    def builtin(self, name: str) -> Builtin:
        try:
            return self._builtins[name]
        except KeyError:
            raise UnknownChannelError(name) from None

    def has_builtin(self, name: str) -> bool:
        return name in self._builtins

    def channel_index(self, name: str) -> int:
        try:
            return CHANNEL_INDEX[name]
        except KeyError:
            raise UnknownChannelError(name) from None


def check_builtin_gradient(
    b: Builtin,
    samples: np.ndarray,
    i: int,
    smooth: bool = False,
    step: float = 1e-6,
    rtol: float = 1e-4,
) -> float:
    """Central-difference consistency check; returns the worst relative error."""
    grad = b.grad_at(samples, i, smooth)
    worst = 0.0
    for idx, row in grad.items():
        for c in range(N_CHANNELS):
            pert = samples.copy()
            pert[idx, c] += step
            hi = b.value_at(pert, i, smooth)
            pert[idx, c] -= 2 * step
            lo = b.value_at(pert, i, smooth)
            fd = (hi - lo) / (2 * step)
            scale = max(1.0, abs(fd), abs(row[c]))
            err = abs(fd - row[c]) / scale
            worst = max(worst, err)
            if err > rtol:
                raise MissingGradientError(
                    f"builtin '{b.name}' gradient mismatch at sample {idx} "
                    f"channel {CHANNELS[c]}: analytic {row[c]:.6g} vs fd {fd:.6g}"
                )
    return worst


def affine_row(coeffs: dict[str, float]) -> np.ndarray:
    """Dense coefficient row over the 12 channels from a name->coeff mapping."""
    row = np.zeros(N_CHANNELS)
    for name, c in coeffs.items():
        row[CHANNEL_INDEX[name]] = c
    return row


def sample_vector(values: dict[str, float] | Sequence[float]) -> np.ndarray:
    """A single 12-channel sample from a mapping or a full sequence."""
    if isinstance(values, dict):
        y = np.zeros(N_CHANNELS)
        for name, v in values.items():
            y[CHANNEL_INDEX[name]] = v
        return y
    y = np.asarray(values, dtype=float)
    if y.shape != (N_CHANNELS,):
        raise ValueError(f"expected {N_CHANNELS} channel values, got {y.shape}")
    return y
