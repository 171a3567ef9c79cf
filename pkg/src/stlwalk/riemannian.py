"""Manifold coordinates, keyframes, and robust keyframe regions.

The CoM phase space per horizontal direction is reparameterized by a
tangent/cotangent pair: sigma is conserved along the pendulum flow and zeta
is Euclidean-orthogonal to it.  A keyframe (the CoM state at sagittal apex)
is robust when both directions' (sigma, zeta) values lie inside a box around
the nominal gait's keyframe; the margin to the 8 box faces quantifies it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .lipm import (
    AugmentedState,
    Control,
    LipmParams,
    Policy,
    simulate_hybrid,
)
from .trajectory import Trajectory


def sigma(p: float, v: float, omega: float) -> float:
    """Tangent-manifold value v^2 - w^2 p^2; conserved along the flow."""
    return v * v - omega * omega * p * p


def sigma_grad(p: float, v: float, omega: float) -> tuple[float, float]:
    return (-2.0 * omega * omega * p, 2.0 * v)


def zeta(p: float, v: float, omega: float) -> float:
    """Cotangent-manifold value v sign(p) |p|^(1/w^2); zero at p = 0."""
    if p == 0.0:
        return 0.0
    alpha = 1.0 / (omega * omega)
    return v * math.copysign(abs(p) ** alpha, p)


def zeta_grad(p: float, v: float, omega: float) -> tuple[float, float]:
    """Exact gradient; singular at p = 0 (use zeta_reg inside optimizers)."""
    if p == 0.0:
        raise ZeroDivisionError("zeta gradient is singular at p = 0")
    alpha = 1.0 / (omega * omega)
    return (v * alpha * abs(p) ** (alpha - 1.0), math.copysign(abs(p) ** alpha, p))


def zeta_reg(p: float, v: float, omega: float, delta: float = 1e-3) -> float:
    """Regularized zeta with bounded gradient near p = 0."""
    alpha = 1.0 / (omega * omega)
    return v * p * (p * p + delta * delta) ** ((alpha - 1.0) / 2.0)


def zeta_reg_grad(
    p: float, v: float, omega: float, delta: float = 1e-3
) -> tuple[float, float]:
    alpha = 1.0 / (omega * omega)
    s2 = p * p + delta * delta
    dp = v * s2 ** ((alpha - 3.0) / 2.0) * (alpha * p * p + delta * delta)
    dv = p * s2 ** ((alpha - 1.0) / 2.0)
    return (dp, dv)


@dataclass(frozen=True)
class Keyframe:
    """CoM state at the sagittal apex of one walking step."""

    p_com: np.ndarray
    v_com: np.ndarray
    time: float
    step_index: int


def keyframe_extract(tr: Trajectory, step_index: int) -> Keyframe | None:
    """Locate the sagittal apex (p_com_x = 0) within one step by interpolation.

    Returns None when the step holds no sign change of the sagittal CoM
    position (a failed step in the recovery sense).
    """
    sl = tr.step_slice(step_index)
    px = tr.samples[sl, 0]
    times = tr.times[sl]
    samples = tr.samples[sl]
    for i in range(len(px) - 1):
        a, b = px[i], px[i + 1]
        if a == 0.0:
            return Keyframe(samples[i, 0:3].copy(), samples[i, 3:6].copy(),
                            float(times[i]), step_index)
        if a * b < 0.0:
            frac = a / (a - b)
            row = samples[i] + frac * (samples[i + 1] - samples[i])
            t = times[i] + frac * (times[i + 1] - times[i])
            return Keyframe(row[0:3].copy(), row[3:6].copy(), float(t), step_index)
    if len(px) and px[-1] == 0.0:
        return Keyframe(samples[-1, 0:3].copy(), samples[-1, 3:6].copy(),
                        float(times[-1]), step_index)
    return None


@dataclass(frozen=True)
class DirectionBounds:
    sigma_nom: float
    zeta_nom: float
    d_sigma: float
    d_zeta: float

    def __post_init__(self) -> None:
        if self.d_sigma <= 0 or self.d_zeta <= 0:
            raise ValueError("robustness margins must be positive")


@dataclass(frozen=True)
class RiemannianRegion:
    """Nominal keyframe manifold box; one lateral side active at a time."""

    x: DirectionBounds
    y: DirectionBounds
    side: str = "left"  # stance side this region belongs to

    def __post_init__(self) -> None:
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    def mirrored(self) -> "RiemannianRegion":
        """The opposite-stance region (lateral cotangent nominal flips sign)."""
        return RiemannianRegion(
            self.x,
            replace(self.y, zeta_nom=-self.y.zeta_nom),
            "right" if self.side == "left" else "left",
        )


def riemannian_distances(
    keyframe: Keyframe | tuple[np.ndarray, np.ndarray],
    region: RiemannianRegion,
    omega: float,
) -> np.ndarray:
    """Signed distances (manifold-value units) to the 8 region bounds."""
    if isinstance(keyframe, Keyframe):
        p, v = keyframe.p_com, keyframe.v_com
    else:
        p, v = keyframe
    out = np.empty(8)
    for d, bounds in ((0, region.x), (1, region.y)):
        s = sigma(float(p[d]), float(v[d]), omega)
        z = zeta(float(p[d]), float(v[d]), omega)
        base = 4 * d
        out[base + 0] = s - (bounds.sigma_nom - bounds.d_sigma)
        out[base + 1] = (bounds.sigma_nom + bounds.d_sigma) - s
        out[base + 2] = z - (bounds.zeta_nom - bounds.d_zeta)
        out[base + 3] = (bounds.zeta_nom + bounds.d_zeta) - z
    return out


def riemannian_robustness(
    keyframe: Keyframe | tuple[np.ndarray, np.ndarray],
    region: RiemannianRegion,
    omega: float,
) -> float:
    return float(np.min(riemannian_distances(keyframe, region, omega)))


# --- nominal periodic gait ---------------------------------------------------


@dataclass(frozen=True)
class NominalGait:
    """Mirror-symmetric periodic gait on the hybrid plant."""

    params: LipmParams
    duration: float
    v_apex: float
    step_width: float
    step_length: float
    start_y: float  # lateral CoM offset at step start (left stance)
    start_vy: float
    lift_height: float = 0.05
    # half a simulator tick: cancels the Euler-integration bias of the lift
    # profile so the planned touchdown lands on the nominal step duration
    phase_lead: float = 5e-4

    def landing_offset(self, side: str) -> np.ndarray:
        sy = -self.step_width if side == "left" else self.step_width
        return np.array([self.step_length, sy, 0.0])

    def start_state(self, side: str = "left") -> AugmentedState:
        """Post-reset state at the start of a step with the given stance side."""
        w = self.params.omega
        px0 = -(self.v_apex / w) * math.sinh(w * self.duration / 2.0)
        vx0 = self.v_apex * math.cosh(w * self.duration / 2.0)
        sgn = 1.0 if side == "left" else -1.0
        prev = self.landing_offset("right" if side == "left" else "left")
        return AugmentedState(
            np.array([px0, sgn * self.start_y, self.params.com_height]),
            np.array([vx0, sgn * self.start_vy, 0.0]),
            -prev,
        )

    def policy(self, initial_side: str = "left") -> Policy:
        """Time-based swing profile reaching the nominal landing at duration T."""
        gait = self

        def act(state: AugmentedState, t_step: float, step_index: int) -> Control:
            side = initial_side if step_index % 2 == 0 else (
                "right" if initial_side == "left" else "left"
            )
            target = gait.landing_offset(side)
            # exact time-to-go law: lands on target at T, clamped near touchdown
            remaining = max(gait.duration - t_step, 1e-4)
            uxy = np.clip((target[:2] - state.p_swing[:2]) / remaining, -3.0, 3.0)
            uz = gait.lift_height * (math.pi / gait.duration) * math.cos(
                math.pi * (t_step + gait.phase_lead) / gait.duration
            )
            return Control(np.array([uxy[0], uxy[1], uz]))

        return act

    def keyframe_lateral(self) -> tuple[float, float]:
        """Lateral (p, v) at the nominal keyframe (left stance)."""
        w = self.params.omega
        half = self.duration / 2.0
        p = self.start_y * math.cosh(w * half) + (self.start_vy / w) * math.sinh(w * half)
        v = self.start_y * w * math.sinh(w * half) + self.start_vy * math.cosh(w * half)
        return (p, v)


def build_nominal_gait(
    params: LipmParams,
    v_apex: float = 0.4,
    duration: float = 0.4,
    step_width: float = 0.2,
    lift_height: float = 0.05,
    refine: bool = True,
    sim_dt: float = 1e-3,
) -> NominalGait:
    """Closed-form symmetric gait, with the lateral start velocity refined by
    bisection so the simulated step returns its mirror image at contact."""
    w = params.omega
    half = duration / 2.0
    y0 = -step_width / 2.0
    vy0 = -y0 * w * math.tanh(w * half)
    px0 = -(v_apex / w) * math.sinh(w * half)
    step_length = 2.0 * abs(px0)
    gait = NominalGait(params, duration, v_apex, step_width, step_length,
                       y0, vy0, lift_height)
    if not refine:
        return gait

    def residual(v0: float) -> float:
        cand = replace(gait, start_vy=v0)
        res = simulate_hybrid(
            cand.start_state("left"), cand.policy("left"), 1, params, sim_dt=sim_dt
        )
        if not res.contact_times:
            raise RuntimeError("nominal gait produced no contact")
        v_contact = res.trajectory.samples[res.trajectory.step_boundaries[0] - 1, 4]
        return v_contact + v0

    lo, hi = vy0 - 0.05, vy0 + 0.05
    rlo, rhi = residual(lo), residual(hi)
    if rlo * rhi > 0:
        return gait  # closed form already as good as the bracket allows
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        rmid = residual(mid)
        if rlo * rmid <= 0:
            hi, rhi = mid, rmid
        else:
            lo, rlo = mid, rmid
        if hi - lo < 1e-10:
            break
    return replace(gait, start_vy=0.5 * (lo + hi))


def default_region(
    gait: NominalGait,
    side: str = "left",
    sigma_margin_frac: float = 0.5,
    d_zeta_x: float = 1.0,
    d_zeta_y: float = 0.08,
) -> RiemannianRegion:
    """Region centered on the nominal keyframe.

    The sagittal apex pins p_x = 0, making the sagittal cotangent value
    identically zero; its bound is left wide so sagittal robustness is
    governed by the tangent (apex-velocity) band alone.
    """
    w = gait.params.omega
    s_x = gait.v_apex**2
    py, vy = gait.keyframe_lateral()
    s_y = sigma(py, vy, w)
    z_y = zeta(py, vy, w)
    x = DirectionBounds(s_x, 0.0, sigma_margin_frac * s_x, d_zeta_x)
    y = DirectionBounds(s_y, z_y if side == "left" else -z_y,
                        sigma_margin_frac * abs(s_y), d_zeta_y)
    return RiemannianRegion(x, y, side)
