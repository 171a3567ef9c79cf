import math

import numpy as np
import pytest

from stlwalk import (
    AugmentedState,
    Control,
    DirectionBounds,
    Keyframe,
    LipmParams,
    RiemannianRegion,
    build_nominal_gait,
    default_region,
    keyframe_extract,
    lipm_flow_analytic,
    riemannian_distances,
    riemannian_robustness,
    sigma,
    simulate_hybrid,
    zeta,
)
from stlwalk.riemannian import zeta_grad, zeta_reg, zeta_reg_grad
from stlwalk.trajectory import Trajectory

PARAMS = LipmParams()
W = PARAMS.omega


def test_sigma_direct():
    assert sigma(0.1, 0.5, W) == pytest.approx(0.15, abs=1e-12)


def test_zeta_direct():
    assert zeta(0.1, 0.5, W) == pytest.approx(0.5 * 0.1 ** (1.0 / W**2), abs=1e-12)
    assert zeta(0.1, 0.5, W) == pytest.approx(0.3972, abs=5e-5)
    assert zeta(0.0, 0.7, W) == 0.0
    assert zeta(-0.1, 0.5, W) == -zeta(0.1, 0.5, W)


def test_sigma_conserved_along_flow():
    rng = np.random.default_rng(31)
    for _ in range(100):
        p0, v0 = rng.uniform(-0.5, 0.5, size=2)
        x = AugmentedState([p0, 0.0, PARAMS.com_height], [v0, 0.0, 0.0], [0, 0, 0])
        s0 = sigma(p0, v0, W)
        for t in np.linspace(0.0, 1.0, 11):
            xt = lipm_flow_analytic(x, Control([0, 0, 0]), float(t), PARAMS)
            assert abs(sigma(xt.p_com[0], xt.v_com[0], W) - s0) < 1e-8


def test_sigma_conserved_negative_branch():
    p0 = math.sqrt((0.1 + 0.04) / W**2)  # sigma(p0, 0.2) = -0.1
    x = AugmentedState([p0, 0.0, PARAMS.com_height], [0.2, 0.0, 0.0], [0, 0, 0])
    s0 = sigma(p0, 0.2, W)
    assert s0 == pytest.approx(-0.1, abs=1e-12)
    xt = lipm_flow_analytic(x, Control([0, 0, 0]), 1.0, PARAMS)
    assert sigma(xt.p_com[0], xt.v_com[0], W) == pytest.approx(s0, abs=1e-8)


def fd4(fun, x, h):
    return (-fun(x + 2 * h) + 8 * fun(x + h) - 8 * fun(x - h) + fun(x - 2 * h)) / (12 * h)


def test_gradient_orthogonality():
    # Euclidean inner product of finite-difference gradients in the (p, v) plane
    rng = np.random.default_rng(77)
    h = 1e-4
    for _ in range(100):
        p = rng.uniform(0.05, 0.6) * rng.choice([-1.0, 1.0])
        v = rng.uniform(0.05, 1.0) * rng.choice([-1.0, 1.0])
        gs = np.array([fd4(lambda q: sigma(q, v, W), p, h), fd4(lambda q: sigma(p, q, W), v, h)])
        gz = np.array([fd4(lambda q: zeta(q, v, W), p, h), fd4(lambda q: zeta(p, q, W), v, h)])
        assert abs(float(gs @ gz)) < 1e-9


def test_zeta_grad_matches_fd():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = rng.uniform(0.05, 0.5) * rng.choice([-1.0, 1.0])
        v = rng.uniform(-1.0, 1.0)
        dp, dv = zeta_grad(p, v, W)
        assert dp == pytest.approx(fd4(lambda q: zeta(q, v, W), p, 1e-5), rel=1e-6, abs=1e-9)
        assert dv == pytest.approx(fd4(lambda q: zeta(p, q, W), v, 1e-5), rel=1e-6, abs=1e-9)
        rp, rv = zeta_reg_grad(p, v, W)
        assert rp == pytest.approx(fd4(lambda q: zeta_reg(q, v, W), p, 1e-5), rel=1e-5, abs=1e-9)
        assert rv == pytest.approx(fd4(lambda q: zeta_reg(p, q, W), v, 1e-5), rel=1e-5, abs=1e-9)


def test_zeta_reg_bounded_at_origin():
    assert zeta_reg(0.0, 0.5, W) == 0.0
    dp, dv = zeta_reg_grad(0.0, 0.5, W)
    assert np.isfinite(dp) and dv == 0.0


def make_traj(px_values, vx=0.3):
    n = len(px_values)
    samples = np.zeros((n, 12))
    samples[:, 0] = px_values
    samples[:, 2] = PARAMS.com_height
    samples[:, 3] = vx
    return Trajectory(np.arange(n) * 0.01, samples)


def test_keyframe_midpoint_interpolation():
    tr = make_traj([-0.01, 0.01])
    tr.samples[0, 3] = 0.3
    tr.samples[1, 3] = 0.4
    kf = keyframe_extract(tr, 0)
    assert kf.p_com[0] == pytest.approx(0.0, abs=1e-15)
    assert kf.v_com[0] == pytest.approx(0.35, abs=1e-12)
    assert kf.time == pytest.approx(0.005, abs=1e-12)


def test_keyframe_missing():
    assert keyframe_extract(make_traj([0.01, 0.02, 0.05]), 0) is None


def test_keyframe_matches_hyperbolic_apex():
    p0, v0 = -0.05, 0.3
    t_apex = math.atanh(W * abs(p0) / v0) / W
    v_apex = math.sqrt(v0**2 - W**2 * p0**2)
    x = AugmentedState([p0, 0.0, PARAMS.com_height], [v0, 0.0, 0.0], [0, 0, 0.01])
    times = np.arange(0.0, 0.4, 1e-3)
    rows = []
    for t in times:
        xt = lipm_flow_analytic(x, Control([0, 0, 0]), float(t), PARAMS)
        rows.append(np.concatenate([xt.as_vector(), np.zeros(3)]))
    tr = Trajectory(times, np.array(rows))
    kf = keyframe_extract(tr, 0)
    assert kf.time == pytest.approx(t_apex, abs=1e-6)
    assert kf.v_com[0] == pytest.approx(v_apex, abs=1e-6)


REGION = RiemannianRegion(
    DirectionBounds(0.16, 0.0, 0.08, 1.0),
    DirectionBounds(-0.0686, 0.0, 0.0343, 0.08),
    "left",
)


def kf_of(px, vx, py, vy):
    return Keyframe(np.array([px, py, PARAMS.com_height]), np.array([vx, vy, 0.0]), 0.0, 0)


def test_riemannian_distances_centered():
    # keyframe exactly at the nominal manifold point in both directions
    py = -math.sqrt(0.0686 / W**2)
    kf = kf_of(0.0, 0.4, py, 0.0)
    r = riemannian_distances(kf, REGION, W)
    assert r[0] == pytest.approx(0.08, abs=1e-9)
    assert r[1] == pytest.approx(0.08, abs=1e-9)
    assert r[2] == pytest.approx(1.0, abs=1e-9)
    assert r[3] == pytest.approx(1.0, abs=1e-9)
    assert r[4] == pytest.approx(0.0343, abs=1e-9)
    assert r[5] == pytest.approx(0.0343, abs=1e-9)
    assert riemannian_robustness(kf, REGION, W) == pytest.approx(min(r), abs=1e-15)


def test_riemannian_boundary_zero():
    vx = math.sqrt(0.16 + 0.08)  # sigma_x at the upper bound
    py = -math.sqrt(0.0686 / W**2)
    kf = kf_of(0.0, vx, py, 0.0)
    r = riemannian_distances(kf, REGION, W)
    assert r[1] == pytest.approx(0.0, abs=1e-12)
    assert riemannian_robustness(kf, REGION, W) == pytest.approx(0.0, abs=1e-12)


def test_riemannian_membership_equivalence():
    rng = np.random.default_rng(55)
    for _ in range(300):
        kf = kf_of(
            rng.uniform(-0.1, 0.1), rng.uniform(-0.8, 0.8),
            rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5),
        )
        rob = riemannian_robustness(kf, REGION, W)
        # brute-force interval membership per direction
        inside = True
        for d, b in ((0, REGION.x), (1, REGION.y)):
            s = sigma(kf.p_com[d], kf.v_com[d], W)
            z = zeta(kf.p_com[d], kf.v_com[d], W)
            inside &= b.sigma_nom - b.d_sigma <= s <= b.sigma_nom + b.d_sigma
            inside &= b.zeta_nom - b.d_zeta <= z <= b.zeta_nom + b.d_zeta
        if abs(rob) > 1e-12:
            assert (rob > 0) == inside


def test_margins_must_be_positive():
    with pytest.raises(ValueError):
        DirectionBounds(0.1, 0.0, 0.0, 0.1)


def test_nominal_gait_two_step_periodicity():
    gait = build_nominal_gait(PARAMS)
    res = simulate_hybrid(gait.start_state("left"), gait.policy("left"), 2, PARAMS, max_time=2.0)
    assert res.outcome == "completed"
    kf0 = keyframe_extract(res.trajectory, 0)
    kf1 = keyframe_extract(res.trajectory, 1)
    # two resets return to the initial lateral keyframe
    assert abs(kf1.p_com[1] + kf0.p_com[1]) < 1e-3  # mirrored sides
    assert abs(kf1.v_com[1] + kf0.v_com[1]) < 1e-3
    region = default_region(gait, "left")
    assert riemannian_robustness(kf0, region, W) > 0
    assert riemannian_robustness(kf1, region.mirrored(), W) > 0


def test_default_region_mirroring():
    gait = build_nominal_gait(PARAMS, refine=False)
    left = default_region(gait, "left")
    right = left.mirrored()
    assert right.side == "right"
    assert right.y.zeta_nom == -left.y.zeta_nom
    assert right.x == left.x
