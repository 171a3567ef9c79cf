"""Differentiable surrogate for leg self-collision distances.

A two-segment-per-leg geometry stands in for the real robot's linkage: each
leg runs hip -> knee -> foot with the knee placed by planar two-link inverse
kinematics (knee-forward branch).  Ground truth is the minimum distance
between thigh/shin segment pairs of opposite legs; a small feedforward
network per pair learns the map from [p_com; p_swing] to that distance so the
planner gets fast, smooth constraint values and gradients.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

PAIR_NAMES = ("LT-RT", "LT-RS", "LS-RT", "LS-RS")
# mirroring across the sagittal plane swaps thigh/shin pairings between legs
MIRROR_PAIR_PERMUTATION = (0, 2, 1, 3)
EPS_D_DEFAULT = 0.03


class UnreachableError(ValueError):
    """A foot lies outside the leg's kinematic reach."""


@dataclass(frozen=True)
class LegGeometry:
    # thigh/shin sized so crossed-leg landings (swing ~0.45 m lateral of a
    # hip, foot on the ground) stay inside the kinematic reach
    hip_width: float = 0.18
    thigh_length: float = 0.55
    shin_length: float = 0.55
    pelvis_height: float = 0.981

    def __post_init__(self) -> None:
        if min(self.hip_width, self.thigh_length, self.shin_length) < 0:
            raise ValueError("geometry lengths must be nonnegative")
        if self.thigh_length + self.shin_length < self.pelvis_height:
            raise ValueError("legs cannot reach the ground at the configured pelvis height")

    @property
    def reach(self) -> float:
        return self.thigh_length + self.shin_length


def _knee_position(hip: np.ndarray, foot: np.ndarray, l1: float, l2: float) -> np.ndarray:
    delta = foot - hip
    d = float(np.linalg.norm(delta))
    if d > l1 + l2 + 1e-12 or d < 1e-9:
        raise UnreachableError(f"hip-foot distance {d:.4f} outside [{1e-9}, {l1 + l2:.4f}]")
    a = (l1 * l1 - l2 * l2 + d * d) / (2.0 * d)
    h2 = l1 * l1 - a * a
    h = math.sqrt(h2) if h2 > 0.0 else 0.0
    u = delta / d
    forward = np.array([1.0, 0.0, 0.0])
    w = forward - np.dot(forward, u) * u
    wn = float(np.linalg.norm(w))
    if wn < 1e-8:
        w = np.array([0.0, 0.0, 1.0]) - u[2] * u
        wn = float(np.linalg.norm(w))
    return hip + a * u + (h / wn) * w


def leg_segments(
    p_com: np.ndarray, p_swing: np.ndarray, geom: LegGeometry, stance: str = "left"
) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """(hip, knee, foot) for the left and right legs.

    The stance foot sits at the frame origin; the other foot is at p_swing.
    """
    p_com = np.asarray(p_com, dtype=float)
    p_swing = np.asarray(p_swing, dtype=float)
    half = geom.hip_width / 2.0
    hip_l = p_com + np.array([0.0, half, 0.0])
    hip_r = p_com + np.array([0.0, -half, 0.0])
    origin = np.zeros(3)
    if stance == "left":
        foot_l, foot_r = origin, p_swing
    elif stance == "right":
        foot_l, foot_r = p_swing, origin
    else:
        raise ValueError("stance must be 'left' or 'right'")
    knee_l = _knee_position(hip_l, foot_l, geom.thigh_length, geom.shin_length)
    knee_r = _knee_position(hip_r, foot_r, geom.thigh_length, geom.shin_length)
    return (hip_l, knee_l, foot_l), (hip_r, knee_r, foot_r)


def segment_distance(p1, q1, p2, q2) -> float:
    """Minimum distance between segments [p1,q1] and [p2,q2] (closed form)."""
    p1, q1, p2, q2 = (np.asarray(v, dtype=float) for v in (p1, q1, p2, q2))
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a < 1e-14 and e < 1e-14:
        return float(np.linalg.norm(r))
    if a < 1e-14:
        s, t = 0.0, min(max(f / e, 0.0), 1.0)
    else:
        c = float(d1 @ r)
        if e < 1e-14:
            t, s = 0.0, min(max(-c / a, 0.0), 1.0)
        else:
            b = float(d1 @ d2)
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > 1e-14 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t, s = 1.0, min(max((b - c) / a, 0.0), 1.0)
    return float(np.linalg.norm((p1 + s * d1) - (p2 + t * d2)))


def oracle_distances(
    p_com, p_swing, geom: LegGeometry = LegGeometry(), stance: str = "left"
) -> np.ndarray:
    """Thigh/shin pair distances (LT-RT, LT-RS, LS-RT, LS-RS) in meters."""
    (hip_l, knee_l, foot_l), (hip_r, knee_r, foot_r) = leg_segments(
        p_com, p_swing, geom, stance
    )
    lt, ls = (hip_l, knee_l), (knee_l, foot_l)
    rt, rs = (hip_r, knee_r), (knee_r, foot_r)
    return np.array(
        [
            segment_distance(*lt, *rt),
            segment_distance(*lt, *rs),
            segment_distance(*ls, *rt),
            segment_distance(*ls, *rs),
        ]
    )


def is_reachable(
    p_com, p_swing, geom: LegGeometry = LegGeometry(), stance: str = "left"
) -> bool:
    p_com = np.asarray(p_com, dtype=float)
    p_swing = np.asarray(p_swing, dtype=float)
    half = geom.hip_width / 2.0
    hip_l = p_com + np.array([0.0, half, 0.0])
    hip_r = p_com + np.array([0.0, -half, 0.0])
    stance_hip, swing_hip = (hip_l, hip_r) if stance == "left" else (hip_r, hip_l)
    d_st = float(np.linalg.norm(stance_hip))
    d_sw = float(np.linalg.norm(p_swing - swing_hip))
    return 1e-9 < d_st <= geom.reach and 1e-9 < d_sw <= geom.reach


# --- vectorized oracle (dataset generation) ---------------------------------


def _knee_batch(hips: np.ndarray, feet: np.ndarray, l1: float, l2: float) -> np.ndarray:
    delta = feet - hips
    d = np.linalg.norm(delta, axis=1)
    a = (l1 * l1 - l2 * l2 + d * d) / (2.0 * d)
    h = np.sqrt(np.maximum(l1 * l1 - a * a, 0.0))
    u = delta / d[:, None]
    w = -u[:, 0:1] * u
    w[:, 0] += 1.0
    wn = np.linalg.norm(w, axis=1)
    bad = wn < 1e-8
    if np.any(bad):
        wz = -u[bad, 2:3] * u[bad]
        wz[:, 2] += 1.0
        w[bad] = wz
        wn[bad] = np.linalg.norm(w[bad], axis=1)
    return hips + a[:, None] * u + (h / wn)[:, None] * w


def _segment_distance_batch(p1, q1, p2, q2) -> np.ndarray:
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    denom = a * e - b * b
    s = np.where(denom > 1e-14, np.clip((b * f - c * e) / np.where(denom > 1e-14, denom, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / e
    s = np.where(t < 0.0, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(t > 1.0, np.clip((b - c) / a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    closest = (p1 + s[:, None] * d1) - (p2 + t[:, None] * d2)
    return np.linalg.norm(closest, axis=1)


def oracle_distances_batch(coms: np.ndarray, swings: np.ndarray, geom: LegGeometry) -> np.ndarray:
    """Vectorized oracle over (N,3) arrays; caller guarantees reachability."""
    half = geom.hip_width / 2.0
    off = np.array([0.0, half, 0.0])
    hip_l = coms + off
    hip_r = coms - off
    foot_l = np.zeros_like(coms)
    knee_l = _knee_batch(hip_l, foot_l, geom.thigh_length, geom.shin_length)
    knee_r = _knee_batch(hip_r, swings, geom.thigh_length, geom.shin_length)
    out = np.empty((len(coms), 4))
    out[:, 0] = _segment_distance_batch(hip_l, knee_l, hip_r, knee_r)
    out[:, 1] = _segment_distance_batch(hip_l, knee_l, knee_r, swings)
    out[:, 2] = _segment_distance_batch(knee_l, foot_l, hip_r, knee_r)
    out[:, 3] = _segment_distance_batch(knee_l, foot_l, knee_r, swings)
    return out


# --- dataset -----------------------------------------------------------------


@dataclass(frozen=True)
class SamplingRanges:
    com_x: tuple[float, float] = (-0.3, 0.3)
    com_y: tuple[float, float] = (-0.2, 0.2)
    swing_x: tuple[float, float] = (-0.5, 0.5)
    swing_y: tuple[float, float] = (-0.5, 0.5)
    swing_z: tuple[float, float] = (0.0, 0.15)


@dataclass
class Dataset:
    """Rows of ([p_com; p_swing], distances per pair)."""

    inputs: np.ndarray  # (n, 6)
    targets: np.ndarray  # (n, 4)

    def __post_init__(self) -> None:
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets must have equal length")

    def __len__(self) -> int:
        return len(self.inputs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["p_com_x", "p_com_y", "p_com_z", "p_swing_x", "p_swing_y", "p_swing_z"]
        cols += [f"d_{name}" for name in PAIR_NAMES]
        buf.write(",".join(cols) + "\n")
        for x, t in zip(self.inputs, self.targets):
            buf.write(",".join(f"{v:.9g}" for v in (*x, *t)) + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "Dataset":
        lines = text.strip().splitlines()
        rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
        return Dataset(rows[:, :6], rows[:, 6:])


def generate_dataset(
    n: int,
    ranges: SamplingRanges = SamplingRanges(),
    geom: LegGeometry = LegGeometry(),
    seed: int = 0,
    max_reject_rate: float = 0.9,
) -> Dataset:
    """Seeded uniform sampling over the configured ranges; unreachable
    configurations are rejected and resampled."""
    if n <= 0:
        raise ValueError("dataset size must be positive")
    rng = np.random.default_rng(seed)
    inputs = np.empty((0, 6))
    drawn = 0
    while len(inputs) < n:
        batch = max(4096, n)
        com = np.column_stack(
            [
                rng.uniform(*ranges.com_x, size=batch),
                rng.uniform(*ranges.com_y, size=batch),
                np.full(batch, geom.pelvis_height),
            ]
        )
        swing = np.column_stack(
            [
                rng.uniform(*ranges.swing_x, size=batch),
                rng.uniform(*ranges.swing_y, size=batch),
                rng.uniform(*ranges.swing_z, size=batch),
            ]
        )
        drawn += batch
        half = geom.hip_width / 2.0
        hip_l = com + np.array([0.0, half, 0.0])
        hip_r = com - np.array([0.0, half, 0.0])
        ok = (np.linalg.norm(hip_l, axis=1) <= geom.reach) & (
            np.linalg.norm(swing - hip_r, axis=1) <= geom.reach
        )
        inputs = np.vstack([inputs, np.hstack([com[ok], swing[ok]])])
        if drawn >= 8192 and 1.0 - len(inputs) / drawn > max_reject_rate:
            raise ValueError(
                f"rejection rate {1.0 - len(inputs) / drawn:.1%} exceeds "
                f"{max_reject_rate:.0%}; sampling ranges misconfigured"
            )
    inputs = inputs[:n]
    targets = oracle_distances_batch(inputs[:, :3], inputs[:, 3:], geom)
    return Dataset(inputs, targets)


# --- feedforward distance nets -----------------------------------------------


@dataclass
class MlpNet:
    """6 -> 24 -> 24 -> 1 network with tanh activations and affine output."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: float
    x_mean: np.ndarray
    x_std: np.ndarray
    t_mean: float
    t_std: float

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2, self.w3]

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        xn = (x - self.x_mean) / self.x_std
        h1 = np.tanh(xn @ self.w1.T + self.b1)
        h2 = np.tanh(h1 @ self.w2.T + self.b2)
        out = h2 @ self.w3 + self.b3
        return out * self.t_std + self.t_mean

    def gradient_batch(self, x: np.ndarray) -> np.ndarray:
        xn = (x - self.x_mean) / self.x_std
        h1 = np.tanh(xn @ self.w1.T + self.b1)
        h2 = np.tanh(h1 @ self.w2.T + self.b2)
        g2 = (1.0 - h2 * h2) * self.w3
        g1 = (1.0 - h1 * h1) * (g2 @ self.w2)
        return (g1 @ self.w1) * (self.t_std / self.x_std)


def net_forward(net: MlpNet, x) -> float:
    return float(net.forward_batch(np.asarray(x, dtype=float)[None, :])[0])


def net_gradient(net: MlpNet, x) -> np.ndarray:
    return net.gradient_batch(np.asarray(x, dtype=float)[None, :])[0]


@dataclass(frozen=True)
class TrainConfig:
    # lr is cosine-annealed to 0 over the epochs; a constant small step
    # plateaus well short of the required validation accuracy
    batch_size: int = 256
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 30
    cosine_decay: bool = True
    val_fraction: float = 0.1
    seed: int = 0
    hidden: int = 24
    # sample weight 1 + near_weight * exp(-(d/near_scale)^2): the net backs a
    # clearance constraint, so accuracy near contact matters most
    near_weight: float = 4.0
    near_scale: float = 0.08


@dataclass
class CollisionModel:
    """One trained net per geometry pair (left-stance frame)."""

    geom: LegGeometry
    nets: list[MlpNet]
    pair_names: tuple[str, ...] = PAIR_NAMES
    val_mae: np.ndarray | None = None

    def forward_all(self, inputs: np.ndarray, side: str = "left") -> np.ndarray:
        x = mirror_inputs(inputs) if side == "right" else np.asarray(inputs, dtype=float)
        return np.column_stack([net.forward_batch(x) for net in self.nets])

    def gradient_all(self, inputs: np.ndarray, side: str = "left") -> np.ndarray:
        """(N, pairs, 6) input gradients, mirrored back for right stance."""
        x = mirror_inputs(inputs) if side == "right" else np.asarray(inputs, dtype=float)
        grads = np.stack([net.gradient_batch(x) for net in self.nets], axis=1)
        if side == "right":
            grads[:, :, 1] *= -1.0
            grads[:, :, 4] *= -1.0
        return grads

    def min_distance(self, inputs: np.ndarray, side: str = "left") -> np.ndarray:
        return self.forward_all(inputs, side).min(axis=1)


def mirror_inputs(inputs: np.ndarray) -> np.ndarray:
    """Reflect a [p_com; p_swing] batch across the sagittal plane."""
    x = np.array(inputs, dtype=float, copy=True)
    if x.ndim == 1:
        x = x[None, :]
    x[:, 1] *= -1.0
    x[:, 4] *= -1.0
    return x


def train(
    ds: Dataset,
    geom: LegGeometry = LegGeometry(),
    cfg: TrainConfig = TrainConfig(),
) -> CollisionModel:
    """Fit one net per pair by mini-batch gradient descent with momentum."""
    rng = np.random.default_rng(cfg.seed)
    n = len(ds)
    n_val = max(1, int(round(cfg.val_fraction * n)))
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_tr, x_val = ds.inputs[train_idx], ds.inputs[val_idx]
    x_mean = x_tr.mean(axis=0)
    x_std = x_tr.std(axis=0)
    x_std[x_std < 1e-9] = 1.0
    xn_tr = (x_tr - x_mean) / x_std

    nets: list[MlpNet] = []
    maes = []
    for pair in range(ds.targets.shape[1]):
        t_tr = ds.targets[train_idx, pair]
        t_val = ds.targets[val_idx, pair]
        t_mean = float(t_tr.mean())
        t_std = float(t_tr.std()) or 1.0
        tn_tr = (t_tr - t_mean) / t_std
        weights = 1.0 + cfg.near_weight * np.exp(-((t_tr / cfg.near_scale) ** 2))
        weights /= weights.mean()

        h = cfg.hidden
        w1 = rng.normal(0.0, 1.0 / math.sqrt(6), size=(h, 6))
        b1 = np.zeros(h)
        w2 = rng.normal(0.0, 1.0 / math.sqrt(h), size=(h, h))
        b2 = np.zeros(h)
        w3 = rng.normal(0.0, 1.0 / math.sqrt(h), size=h)
        b3 = 0.0
        vel = [np.zeros_like(w1), np.zeros_like(b1), np.zeros_like(w2),
               np.zeros_like(b2), np.zeros_like(w3), 0.0]

        n_tr = len(xn_tr)
        for epoch in range(cfg.epochs):
            lr = cfg.learning_rate
            if cfg.cosine_decay:
                lr *= 0.5 * (1.0 + math.cos(math.pi * epoch / cfg.epochs))
            order = rng.permutation(n_tr)
            for start in range(0, n_tr, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                xb, tb, wb = xn_tr[idx], tn_tr[idx], weights[idx]
                z1 = xb @ w1.T + b1
                h1 = np.tanh(z1)
                z2 = h1 @ w2.T + b2
                h2 = np.tanh(z2)
                out = h2 @ w3 + b3
                err = out - tb
                m = len(idx)
                if not np.isfinite(err).all():
                    raise RuntimeError(
                        f"non-finite loss while training pair {PAIR_NAMES[pair]}"
                    )
                g_out = 2.0 * wb * err / m
                g_w3 = g_out @ h2
                g_b3 = float(g_out.sum())
                g_h2 = np.outer(g_out, w3) * (1.0 - h2 * h2)
                g_w2 = g_h2.T @ h1
                g_b2 = g_h2.sum(axis=0)
                g_h1 = (g_h2 @ w2) * (1.0 - h1 * h1)
                g_w1 = g_h1.T @ xb
                g_b1 = g_h1.sum(axis=0)
                grads = [g_w1, g_b1, g_w2, g_b2, g_w3, g_b3]
                params = [w1, b1, w2, b2, w3]
                for j in range(5):
                    vel[j] = cfg.momentum * vel[j] - lr * grads[j]
                    params[j] += vel[j]
                vel[5] = cfg.momentum * vel[5] - lr * grads[5]
                b3 += vel[5]

        net = MlpNet(w1, b1, w2, b2, w3, b3, x_mean.copy(), x_std.copy(), t_mean, t_std)
        pred = net.forward_batch(x_val)
        maes.append(float(np.abs(pred - t_val).mean()))
        nets.append(net)
    return CollisionModel(geom, nets, PAIR_NAMES, np.array(maes))


# --- landscape ----------------------------------------------------------------


@dataclass
class Landscape:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # (len(ys), len(xs)) min-over-pairs distance, clamped >= 0
    reachable: np.ndarray  # cells where the surrogate kinematics are defined
    contour: list[np.ndarray]  # polylines at the eps_d level (loops when closed)
    eps_d: float


def _marching_squares(xs, ys, values, level) -> list[np.ndarray]:
    """Level-set polylines via edge interpolation, chained into loops."""
    segs = []

    def interp(xa, ya, va, xb, yb, vb):
        t = (level - va) / (vb - va)
        return (xa + t * (xb - xa), ya + t * (yb - ya))

    for r in range(len(ys) - 1):
        for c in range(len(xs) - 1):
            corners = [
                (xs[c], ys[r], values[r, c]),
                (xs[c + 1], ys[r], values[r, c + 1]),
                (xs[c + 1], ys[r + 1], values[r + 1, c + 1]),
                (xs[c], ys[r + 1], values[r + 1, c]),
            ]
            pts = []
            for k in range(4):
                xa, ya, va = corners[k]
                xb, yb, vb = corners[(k + 1) % 4]
                if (va < level) != (vb < level):
                    pts.append(interp(xa, ya, va, xb, yb, vb))
            if len(pts) == 2:
                segs.append((pts[0], pts[1]))
            elif len(pts) == 4:
                # saddle cell: pair crossings using the center value
                center = sum(c[2] for c in corners) / 4.0
                if (center < level) == (corners[0][2] < level):
                    segs.append((pts[3], pts[0]))
                    segs.append((pts[1], pts[2]))
                else:
                    segs.append((pts[0], pts[1]))
                    segs.append((pts[2], pts[3]))

    def key(pt):
        return (round(pt[0], 9), round(pt[1], 9))

    remaining = {idx: s for idx, s in enumerate(segs)}
    endpoints: dict[tuple, list[int]] = {}
    for idx, s in enumerate(segs):
        for pt in s:
            endpoints.setdefault(key(pt), []).append(idx)

    def walk(path: list, seg_idx_used: set) -> None:
        # extend path from its last point until a dead end or closure
        while True:
            candidates = [
                j for j in endpoints.get(key(tuple(path[-1])), []) if j in remaining
            ]
            if not candidates:
                return
            j = candidates[0]
            a, b = remaining.pop(j)
            path.append(np.array(b if key(a) == key(tuple(path[-1])) else a))
            if key(tuple(path[-1])) == key(tuple(path[0])):
                return

    loops = []
    while remaining:
        first = next(iter(remaining))
        a, b = remaining.pop(first)
        path = [np.array(a), np.array(b)]
        walk(path, remaining)
        if key(tuple(path[0])) != key(tuple(path[-1])):
            # open end: extend from the other side too
            path.reverse()
            walk(path, remaining)
        loops.append(np.array(path))
    return loops


def point_in_polygon(pt, polygon: np.ndarray) -> bool:
    x, y = pt
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x_cross > x:
                inside = not inside
    return inside


def min_distance_landscape(
    model: CollisionModel,
    xs: np.ndarray,
    ys: np.ndarray,
    com: np.ndarray | None = None,
    swing_z: float = 0.0,
    eps_d: float = EPS_D_DEFAULT,
) -> Landscape:
    """Min-over-pairs predicted distance over a swing-foot (x, y) grid.

    Grid cells outside the surrogate's kinematic reach carry no physical
    configuration; they are treated as safely clear when extracting the
    eps_d contour, which closes the level set at the reach boundary.
    """
    geom = model.geom
    if com is None:
        com = np.array([0.0, 0.0, geom.pelvis_height])
    gx, gy = np.meshgrid(xs, ys)
    swing = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, swing_z)])
    inputs = np.hstack([np.tile(com, (len(swing), 1)), swing])
    values = model.min_distance(inputs).reshape(gy.shape)
    values = np.maximum(values, 0.0)  # display rule: clamp negatives
    swing_hip = np.asarray(com) + np.array([0.0, -geom.hip_width / 2.0, 0.0])
    reach_ok = np.linalg.norm(swing - swing_hip, axis=1) <= geom.reach
    stance_ok = np.linalg.norm(com + np.array([0.0, geom.hip_width / 2.0, 0.0])) <= geom.reach
    reachable = (reach_ok & stance_ok).reshape(gy.shape)
    masked = np.where(reachable, values, max(1.0, 2.0 * eps_d))
    contour = _marching_squares(np.asarray(xs), np.asarray(ys), masked, eps_d)
    return Landscape(np.asarray(xs), np.asarray(ys), values, reachable, contour, eps_d)


# --- model file I/O -----------------------------------------------------------


def _write_array(buf, name, arr):
    flat = np.asarray(arr, dtype=float).ravel()
    buf.write(f"{name} " + " ".join(repr(float(v)) for v in flat) + "\n")


def save_model(model: CollisionModel, path: str) -> None:
    """Versioned flat-text format: header, normalization, row-major weights."""
    with open(path, "w") as fh:
        fh.write("stlwalk-collision-model v1\n")
        g = model.geom
        fh.write(
            f"geometry {float(g.hip_width)!r} {float(g.thigh_length)!r} {float(g.shin_length)!r} {float(g.pelvis_height)!r}\n"
        )
        fh.write(f"pairs {' '.join(model.pair_names)}\n")
        for name, net in zip(model.pair_names, model.nets):
            fh.write(f"net {name}\n")
            fh.write(f"arch 6 {len(net.b1)} {len(net.b2)} 1 tanh\n")
            _write_array(fh, "x_mean", net.x_mean)
            _write_array(fh, "x_std", net.x_std)
            fh.write(f"t_norm {float(net.t_mean)!r} {float(net.t_std)!r}\n")
            _write_array(fh, "w1", net.w1)
            _write_array(fh, "b1", net.b1)
            _write_array(fh, "w2", net.w2)
            _write_array(fh, "b2", net.b2)
            _write_array(fh, "w3", net.w3)
            fh.write(f"b3 {float(net.b3)!r}\n")


def load_model(path: str) -> CollisionModel:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "stlwalk-collision-model v1":
        raise ValueError("unrecognized collision model file")
    gvals = [float(v) for v in lines[1].split()[1:]]
    geom = LegGeometry(*gvals)
    pair_names = tuple(lines[2].split()[1:])
    nets = []
    i = 3
    while i < len(lines):
        assert lines[i].startswith("net ")
        dims = lines[i + 1].split()
        h1, h2 = int(dims[2]), int(dims[3])
        vals = {}
        i += 2
        while i < len(lines) and not lines[i].startswith("net "):
            parts = lines[i].split()
            vals[parts[0]] = np.array([float(v) for v in parts[1:]])
            i += 1
        nets.append(
            MlpNet(
                vals["w1"].reshape(h1, 6),
                vals["b1"],
                vals["w2"].reshape(h2, h1),
                vals["b2"],
                vals["w3"],
                float(vals["b3"][0]),
                vals["x_mean"],
                vals["x_std"],
                float(vals["t_norm"][0]),
                float(vals["t_norm"][1]),
            )
        )
    return CollisionModel(geom, nets, pair_names)
