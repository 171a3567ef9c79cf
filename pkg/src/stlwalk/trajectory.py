"""Sampled output trajectories of the walking model."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .channels import CHANNELS, N_CHANNELS


@dataclass
class Trajectory:
    """Time-stamped 12-channel output samples with walking-step segmentation.

    ``step_boundaries`` holds the sample indices at which a contact switch
    occurs; sample ``b`` is the first sample of the new step, sample ``b - 1``
    the (pre-reset) contact sample of the old one.
    """

    times: np.ndarray
    samples: np.ndarray
    step_boundaries: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != N_CHANNELS:
            raise ValueError(f"samples must be (M, {N_CHANNELS}), got {self.samples.shape}")
        if len(self.times) != len(self.samples):
            raise ValueError("times and samples must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        bset = list(self.step_boundaries)
        if bset != sorted(bset) or len(set(bset)) != len(bset):
            raise ValueError("step_boundaries must be strictly increasing")
        if bset and (bset[0] < 0 or bset[-1] > len(self.times)):
            raise ValueError("step_boundaries out of range")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_steps(self) -> int:
        return len(self.step_boundaries) + 1

    def step_slice(self, step_index: int) -> slice:
        """Sample range of one walking step (contact sample included at end)."""
        bounds = [0, *self.step_boundaries, len(self.times)]
        if not 0 <= step_index < len(bounds) - 1:
            raise IndexError(f"step {step_index} out of range")
        return slice(bounds[step_index], bounds[step_index + 1])

    def channel(self, name: str) -> np.ndarray:
        return self.samples[:, CHANNELS.index(name)]

    def step_index_of(self, i: int) -> int:
        return int(np.searchsorted(np.asarray(self.step_boundaries), i, side="right"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t," + ",".join(CHANNELS) + ",step_index,event\n")
        contact_rows = {b - 1 for b in self.step_boundaries if b >= 1}
        for i in range(len(self.times)):
            event = "contact" if i in contact_rows else "none"
            cells = [format_float(self.times[i])]
            cells += [format_float(v) for v in self.samples[i]]
            cells += [str(self.step_index_of(i)), event]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def format_float(v: float) -> str:
    """Deterministic, compact float formatting for CSV output."""
    return f"{float(v):.9g}"


def from_csv(text: str) -> Trajectory:
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    expected = ["t", *CHANNELS, "step_index", "event"]
    if header != expected:
        raise ValueError("unexpected trajectory CSV header")
    times, samples, boundaries = [], [], []
    prev_step = 0
    for i, ln in enumerate(lines[1:]):
        cells = ln.split(",")
        times.append(float(cells[0]))
        samples.append([float(c) for c in cells[1 : 1 + N_CHANNELS]])
        step = int(cells[1 + N_CHANNELS])
        if step != prev_step:
            boundaries.append(i)
            prev_step = step
    return Trajectory(np.array(times), np.array(samples), boundaries)
