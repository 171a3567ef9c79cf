"""Locomotion task formulas bound to a planning horizon's knot layout.

The horizon is N walking-step segments of K knots each; the last knot of
each segment is its contact switch.  Temporal windows address knot indices,
so the formulas stay well-defined while step durations vary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import CHANNEL_INDEX, Builtin, SignalSchema, affine_row
from .formula import (
    AffineExpr,
    Always,
    And,
    Eventually,
    Formula,
    IndexWindow,
    Or,
    Predicate,
)
from .riemannian import (
    RiemannianRegion,
    sigma,
    sigma_grad,
    zeta,
    zeta_grad,
    zeta_reg,
    zeta_reg_grad,
)

PX, PY = CHANNEL_INDEX["p_com_x"], CHANNEL_INDEX["p_com_y"]
VX, VY = CHANNEL_INDEX["v_com_x"], CHANNEL_INDEX["v_com_y"]
SWX, SWY = CHANNEL_INDEX["p_swing_x"], CHANNEL_INDEX["p_swing_y"]

ABS_SMOOTHING = 1e-6  # smooth |x| = sqrt(x^2 + delta^2) inside the optimizer
ZETA_SMOOTHING = 1e-3


@dataclass(frozen=True)
class SteppingStone:
    """Convex quadrilateral foothold: inward unit normals n with n.x - b >= 0 inside."""

    center: tuple[float, float]
    yaw: float
    width: float
    depth: float
    normals: np.ndarray = field(init=False)  # (4, 2)
    offsets: np.ndarray = field(init=False)  # (4,)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.depth <= 0:
            raise ValueError("stone extents must be positive")
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        e1 = np.array([c, s])
        e2 = np.array([-s, c])
        center = np.asarray(self.center, dtype=float)
        normals = np.array([-e1, e1, -e2, e2])
        half = np.array([self.width / 2, self.width / 2, self.depth / 2, self.depth / 2])
        offsets = normals @ center - half
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        if not np.all(self.edge_margins(center) > 0):
            raise ValueError("stone region is empty")

    def edge_margins(self, point) -> np.ndarray:
        """Signed distance from a ground point to each edge (positive inside)."""
        return self.normals @ np.asarray(point, dtype=float) - self.offsets

    def contains(self, point) -> bool:
        return bool(np.all(self.edge_margins(point) >= 0.0))


@dataclass
class SpecContext:
    """Knot-index layout plus the task parameters the formulas close over."""

    knots_per_step: int
    n_steps: int
    omega: float
    regions: list[RiemannianRegion]
    e_left: float = 0.5
    e_right: float = -0.5
    eps_kf: float = 1e-3
    world_origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    schema: SignalSchema = field(default_factory=SignalSchema)

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError("horizon needs at least one walking step")
        if self.knots_per_step < 2:
            raise ValueError("each step needs at least two knots")
        if len(self.regions) != self.n_steps:
            raise ValueError("one Riemannian region per step required")
        self.world_origin = np.asarray(self.world_origin, dtype=float)

    @property
    def horizon(self) -> int:
        return self.knots_per_step * self.n_steps

    @property
    def switch_knots(self) -> list[int]:
        k = self.knots_per_step
        return [(j + 1) * k - 1 for j in range(self.n_steps)]

    def step_window(self, step: int) -> IndexWindow:
        k = self.knots_per_step
        return IndexWindow(step * k, (step + 1) * k - 1)

    def stance_side(self, step: int) -> str:
        return self.regions[step].side


def build_keyframe_spec(ctx: SpecContext) -> Formula:
    """Within-band sagittal apex: eps_kf - |p_com_x| >= 0."""
    eps = ctx.eps_kf
    delta = ABS_SMOOTHING

    def value(samples, i):
        return eps - abs(float(samples[i, PX]))

    def grad(samples, i):
        row = np.zeros(12)
        row[PX] = -math.copysign(1.0, samples[i, PX]) if samples[i, PX] != 0 else 0.0
        return {i: row}

    def smooth_value(samples, i):
        p = float(samples[i, PX])
        return eps - math.sqrt(p * p + delta * delta)

    def smooth_grad(samples, i):
        p = float(samples[i, PX])
        row = np.zeros(12)
        row[PX] = -p / math.sqrt(p * p + delta * delta)
        return {i: row}

    name = "keyframe"
    if not ctx.schema.has_builtin(name):
        ctx.schema.register(Builtin(name, value, grad, (), smooth_value, smooth_grad))
    return Predicate(ctx.schema.builtin(name), 0.0)


def _riem_builtin(
    ctx: SpecContext, name: str, p_chan: int, v_chan: int,
    kind: str, bound: float, sign: float,
) -> Builtin:
    """One signed distance r_l = sign * (manifold_value - bound)."""
    w = ctx.omega
    delta = ZETA_SMOOTHING

    if kind == "sigma":
        def value(samples, i):
            return sign * (sigma(float(samples[i, p_chan]), float(samples[i, v_chan]), w) - bound)

        def grad(samples, i):
            dp, dv = sigma_grad(float(samples[i, p_chan]), float(samples[i, v_chan]), w)
            row = np.zeros(12)
            row[p_chan], row[v_chan] = sign * dp, sign * dv
            return {i: row}

        smooth_value, smooth_grad = value, grad
    else:
        def value(samples, i):
            return sign * (zeta(float(samples[i, p_chan]), float(samples[i, v_chan]), w) - bound)

        def grad(samples, i):
            p, v = float(samples[i, p_chan]), float(samples[i, v_chan])
            if p == 0.0:
                dp, dv = zeta_reg_grad(p, v, w, delta)
            else:
                dp, dv = zeta_grad(p, v, w)
            row = np.zeros(12)
            row[p_chan], row[v_chan] = sign * dp, sign * dv
            return {i: row}

        def smooth_value(samples, i):
            return sign * (
                zeta_reg(float(samples[i, p_chan]), float(samples[i, v_chan]), w, delta) - bound
            )

        def smooth_grad(samples, i):
            dp, dv = zeta_reg_grad(
                float(samples[i, p_chan]), float(samples[i, v_chan]), w, delta
            )
            row = np.zeros(12)
            row[p_chan], row[v_chan] = sign * dp, sign * dv
            return {i: row}

    return ctx.schema.register(Builtin(name, value, grad, (), smooth_value, smooth_grad))


def build_riem_spec(ctx: SpecContext, step: int) -> Formula:
    """Conjunction of the 8 signed distances to the step's region bounds."""
    if not 0 <= step < len(ctx.regions):
        raise ValueError(f"no Riemannian region for step {step}")
    region = ctx.regions[step]
    preds = []
    l = 1
    for axis, bounds in (("x", region.x), ("y", region.y)):
        p_chan, v_chan = (PX, VX) if axis == "x" else (PY, VY)
        spec = [
            ("sigma", bounds.sigma_nom - bounds.d_sigma, 1.0),
            ("sigma", bounds.sigma_nom + bounds.d_sigma, -1.0),
            ("zeta", bounds.zeta_nom - bounds.d_zeta, 1.0),
            ("zeta", bounds.zeta_nom + bounds.d_zeta, -1.0),
        ]
        for kind, bound, sign in spec:
            name = f"riem{l}_s{step}"
            if not ctx.schema.has_builtin(name):
                _riem_builtin(ctx, name, p_chan, v_chan, kind, bound, sign)
            preds.append(Predicate(ctx.schema.builtin(name), 0.0))
            l += 1
    return And(preds)


def build_stable_spec(ctx: SpecContext) -> Formula:
    """Eventually within the last step: a keyframe inside its region."""
    last = ctx.n_steps - 1
    inner = And([build_keyframe_spec(ctx), build_riem_spec(ctx, last)])
    return Eventually(ctx.step_window(last), inner)


def build_foot_spec(ctx: SpecContext) -> Formula:
    """Swing foot kept between the treadmill edges over the whole horizon."""
    if ctx.e_right >= ctx.e_left:
        raise ValueError("treadmill edges must satisfy e_right < e_left")
    left = Predicate(AffineExpr(affine_row({"p_swing_y": -1.0}), ctx.e_left), 0.0)
    right = Predicate(AffineExpr(affine_row({"p_swing_y": 1.0}), -ctx.e_right), 0.0)
    return Always(None, And([left, right]))


def _landing_builtin(ctx: SpecContext, name: str, normal: np.ndarray, offset: float) -> Builtin:
    """Signed distance from the world-frame landing position to a stone edge.

    The landing position at a contact knot accumulates the swing-foot
    offsets of every contact switch up to and including that knot.
    """
    switch_knots = ctx.switch_knots
    origin = ctx.world_origin
    nx, ny = float(normal[0]), float(normal[1])

    def landing_world(samples, i):
        pos = origin.copy()
        for m in switch_knots:
            if m > i:
                break
            pos = pos + samples[m, [SWX, SWY]]
        return pos

    def value(samples, i):
        pos = landing_world(samples, i)
        return nx * pos[0] + ny * pos[1] - offset

    def grad(samples, i):
        out = {}
        row = np.zeros(12)
        row[SWX], row[SWY] = nx, ny
        for m in switch_knots:
            if m > i:
                break
            out[m] = row.copy()
        return out

    return ctx.schema.register(Builtin(name, value, grad))


def build_stones_spec(ctx: SpecContext, stones: list[SteppingStone]) -> Formula:
    """Each landing inside some stone, checked at its contact-switch knot."""
    if not stones:
        raise ValueError("stone set must be nonempty")
    step_terms = []
    for j, knot in enumerate(ctx.switch_knots):
        per_stone = []
        for s, stone in enumerate(stones):
            edges = []
            for e in range(4):
                name = f"stone{s}_edge{e}_step{j}"
                if not ctx.schema.has_builtin(name):
                    _landing_builtin(ctx, name, stone.normals[e], float(stone.offsets[e]))
                edges.append(Predicate(ctx.schema.builtin(name), 0.0))
            per_stone.append(And(edges))
        body = Or(per_stone) if len(per_stone) > 1 else per_stone[0]
        step_terms.append(Always(IndexWindow(knot, knot), body))
    return And(step_terms) if len(step_terms) > 1 else step_terms[0]


def build_loco_spec(
    ctx: SpecContext,
    stable: bool = True,
    foot: bool = True,
    stones: list[SteppingStone] | None = None,
) -> Formula:
    """Compose the enabled task parts; disabled parts are omitted entirely."""
    parts: list[Formula] = []
    if stable:
        parts.append(build_stable_spec(ctx))
    if foot:
        parts.append(build_foot_spec(ctx))
    if stones is not None:
        parts.append(build_stones_spec(ctx, stones))
    if not parts:
        raise ValueError("no specification parts enabled")
    return parts[0] if len(parts) == 1 else And(parts)
