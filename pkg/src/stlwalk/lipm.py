"""Hybrid reduced-order walking plant.

Point-mass dynamics at constant CoM height in the stance-foot frame,
augmented with the swing-foot position; swing-foot velocity is the control.
Contact triggers a frame-shift reset and swaps the legs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .trajectory import Trajectory

GUARD_TOLERANCE = 1e-6
FALL_RADIUS = 10.0  # |p_com| beyond this aborts a simulation as a fall


@dataclass(frozen=True)
class LipmParams:
    gravity: float = 9.81
    com_height: float = 0.981  # so that omega^2 = 10

    def __post_init__(self) -> None:
        if self.gravity <= 0 or self.com_height <= 0:
            raise ValueError("gravity and com_height must be positive")

    @property
    def omega(self) -> float:
        return math.sqrt(self.gravity / self.com_height)


@dataclass(frozen=True)
class AugmentedState:
    """[p_com; v_com; p_swing] in the stance-foot frame."""

    p_com: np.ndarray
    v_com: np.ndarray
    p_swing: np.ndarray

    def __post_init__(self) -> None:
        for name in ("p_com", "v_com", "p_swing"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
            if getattr(self, name).shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p_com, self.v_com, self.p_swing])

    @staticmethod
    def from_vector(x: np.ndarray) -> "AugmentedState":
        x = np.asarray(x, dtype=float)
        return AugmentedState(x[0:3], x[3:6], x[6:9])


@dataclass(frozen=True)
class Control:
    """Swing-foot velocity command."""

    u: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        if u.shape != (3,):
            raise ValueError("u must be a 3-vector")
        if not np.all(np.isfinite(u)):
            raise ValueError("u must be finite")


def lipm_flow_analytic(
    x0: AugmentedState, u: Control, t: float, params: LipmParams
) -> AugmentedState:
    """Closed-form flow of the linear pendulum; swing integrates u exactly."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    w = params.omega
    ch, sh = math.cosh(w * t), math.sinh(w * t)
    p = x0.p_com.copy()
    v = x0.v_com.copy()
    for axis in (0, 1):
        p0, v0 = x0.p_com[axis], x0.v_com[axis]
        p[axis] = p0 * ch + (v0 / w) * sh
        v[axis] = p0 * w * sh + v0 * ch
    p[2] = x0.p_com[2] + x0.v_com[2] * t
    return AugmentedState(p, v, x0.p_swing + u.u * t)


def discrete_step_taylor(
    x: AugmentedState, u: Control, dt: float, params: LipmParams
) -> AugmentedState:
    """Second-order Taylor step of the pendulum flow (horizontal axes only)."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    w2 = params.omega**2
    p, v = x.p_com, x.v_com
    p_new = p.copy()
    v_new = v.copy()
    for axis in (0, 1):
        p_new[axis] = p[axis] + v[axis] * dt + 0.5 * w2 * p[axis] * dt**2
        v_new[axis] = v[axis] + w2 * p[axis] * dt + 0.5 * w2 * v[axis] * dt**2
    p_new[2] = p[2] + v[2] * dt
    return AugmentedState(p_new, v_new, x.p_swing + u.u * dt)


def reset_map(
    x: AugmentedState, h_terrain: float = 0.0, guard_tolerance: float = GUARD_TOLERANCE
) -> AugmentedState:
    """Re-express the state in the frame of the just-landed foot."""
    if abs(x.p_swing[2] - h_terrain) > guard_tolerance:
        raise ValueError(
            f"reset requires the swing foot at terrain height: "
            f"|{x.p_swing[2]:.3g} - {h_terrain:.3g}| > {guard_tolerance:.1g}"
        )
    return AugmentedState(x.p_com - x.p_swing, x.v_com.copy(), -x.p_swing)


def guard_value(x: AugmentedState, h_terrain: float = 0.0) -> float:
    return float(x.p_swing[2] - h_terrain)


@dataclass
class SimResult:
    trajectory: Trajectory
    outcome: str  # completed | fell | timeout
    contact_times: list[float] = field(default_factory=list)
    # world position of the stance foot at the start of each step
    stance_world: list[np.ndarray] = field(default_factory=list)
    final_state: "AugmentedState | None" = None


# Policies receive (state, time since step start, step index) and return a Control.
Policy = Callable[[AugmentedState, float, int], Control]


def simulate_hybrid(
    x0: AugmentedState,
    policy: Policy,
    n_steps: int,
    params: LipmParams,
    h_terrain: float | Sequence[float] = 0.0,
    sim_dt: float = 1e-3,
    accel: Callable[[float], np.ndarray] | None = None,
    max_time: float | None = None,
) -> SimResult:
    """Integrate flow + reset until ``n_steps`` contacts (or fall/timeout).

    Contact is a descending zero crossing of the guard, armed only once the
    swing foot has lifted; the crossing is located by linear interpolation.
    The interpolated pre-reset contact state is the last sample of each step.
    ``accel(t)`` optionally adds a horizontal CoM acceleration (perturbations).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    terrain = list(h_terrain) if isinstance(h_terrain, (list, tuple, np.ndarray)) else None
    h_of = (lambda j: terrain[min(j, len(terrain) - 1)]) if terrain else (lambda j: float(h_terrain))
    if max_time is None:
        max_time = 1.5 * max(1, n_steps)

    times: list[float] = []
    rows: list[np.ndarray] = []
    boundaries: list[int] = []
    contact_times: list[float] = []
    stance_world: list[np.ndarray] = [np.zeros(3)]

    state = x0
    t = 0.0
    t_step = 0.0
    step = 0
    armed = guard_value(state, h_of(0)) > GUARD_TOLERANCE
    outcome = "completed" if n_steps == 0 else "timeout"

    def record(u: np.ndarray) -> None:
        times.append(t)
        rows.append(np.concatenate([state.as_vector(), u]))

    def advance(u: np.ndarray) -> AugmentedState:
        nxt = discrete_step_taylor(state, Control(u), sim_dt, params)
        if accel is not None:
            a = np.asarray(accel(t), dtype=float)
            nxt = AugmentedState(
                nxt.p_com + 0.5 * a * sim_dt**2, nxt.v_com + a * sim_dt, nxt.p_swing
            )
        return nxt

    done = False
    while not done and t < max_time:
        u = policy(state, t_step, step).u
        record(u)
        nxt = advance(u)
        g_prev = guard_value(state, h_of(step))
        g_next = guard_value(nxt, h_of(step))
        if not armed and g_next > GUARD_TOLERANCE:
            armed = True
        elif armed and g_prev > 0.0 and g_next <= 0.0:
            # contact inside this tick: interpolate the crossing and reset
            frac = g_prev / (g_prev - g_next) if g_prev != g_next else 1.0
            frac = min(max(frac, 1e-9), 1.0)
            xv = state.as_vector()
            contact = AugmentedState.from_vector(xv + frac * (nxt.as_vector() - xv))
            t = t + frac * sim_dt
            state = contact
            record(u)
            boundaries.append(len(times))
            contact_times.append(t)
            stance_world.append(stance_world[-1] + contact.p_swing)
            state = reset_map(contact, h_terrain=h_of(step), guard_tolerance=1e-7)
            step += 1
            t_step = 0.0
            armed = False
            if step >= n_steps:
                outcome = "completed"
                done = True
                continue
            # advance one tick off the contact instant so times stay increasing
            u = policy(state, t_step, step).u
            state = advance(u)
            t += sim_dt
            t_step += sim_dt
            continue
        state = nxt
        t += sim_dt
        t_step += sim_dt
        if np.linalg.norm(state.p_com[:2]) > FALL_RADIUS:
            outcome = "fell"
            record(u)
            done = True
    if not done and times and t > times[-1]:
        record(policy(state, t_step, step).u)

    traj = Trajectory(np.array(times), np.array(rows), boundaries)
    return SimResult(traj, outcome, contact_times, stance_world, final_state=state)
