import math

import numpy as np
import pytest

from stlwalk import (
    AugmentedState,
    Control,
    LipmParams,
    discrete_step_taylor,
    guard_value,
    lipm_flow_analytic,
    reset_map,
    simulate_hybrid,
)

PARAMS = LipmParams()
ZERO_U = Control([0.0, 0.0, 0.0])


def state(px=0.0, py=0.0, vx=0.0, vy=0.0, sx=0.0, sy=0.0, sz=0.0):
    return AugmentedState(
        [px, py, PARAMS.com_height], [vx, vy, 0.0], [sx, sy, sz]
    )


def test_params_default_omega():
    assert PARAMS.omega**2 == pytest.approx(10.0, abs=1e-12)


def test_flow_equilibrium():
    x = state()
    for t in (0.0, 0.1, 0.7):
        xt = lipm_flow_analytic(x, ZERO_U, t, PARAMS)
        assert np.allclose(xt.p_com[:2], 0.0)
        assert np.allclose(xt.v_com, 0.0)


def test_flow_closed_form_values():
    x = state(px=0.1)
    xt = lipm_flow_analytic(x, ZERO_U, 0.2, PARAMS)
    w = PARAMS.omega
    assert xt.p_com[0] == 0.1 * math.cosh(w * 0.2)
    assert xt.v_com[0] == 0.1 * w * math.sinh(w * 0.2)
    assert xt.p_com[0] == pytest.approx(0.12068, abs=5e-6)
    assert xt.v_com[0] == pytest.approx(0.21360, abs=5e-6)


def test_flow_time_reversal():
    x = state(px=0.07, py=-0.04, vx=0.3, vy=0.12)
    t = 0.33
    mid = lipm_flow_analytic(x, ZERO_U, t, PARAMS)
    back = lipm_flow_analytic(
        AugmentedState(mid.p_com, -mid.v_com, mid.p_swing), ZERO_U, t, PARAMS
    )
    assert np.allclose(back.p_com, x.p_com, atol=1e-12)
    assert np.allclose(back.v_com, -x.v_com, atol=1e-12)


def test_flow_integrates_swing_exactly():
    x = state(sx=0.1, sy=-0.2, sz=0.0)
    u = Control([0.5, -0.25, 1.0])
    xt = lipm_flow_analytic(x, u, 0.4, PARAMS)
    assert np.allclose(xt.p_swing, [0.3, -0.3, 0.4], atol=1e-15)


def test_taylor_zero_step():
    x = state(px=0.1, vx=0.2, sy=-0.1)
    x2 = discrete_step_taylor(x, ZERO_U, 0.0, PARAMS)
    assert np.allclose(x2.as_vector(), x.as_vector())


def test_taylor_direct_substitution():
    # p' = p + v dt + 0.5 w^2 p dt^2 = 0.1 + 0.5 * 10 * 0.1 * 0.0025
    x = state(px=0.1)
    x2 = discrete_step_taylor(x, ZERO_U, 0.05, PARAMS)
    assert x2.p_com[0] == pytest.approx(0.10125, abs=1e-12)
    assert x2.v_com[0] == pytest.approx(0.05, abs=1e-12)


def test_taylor_local_third_order():
    x = state(px=0.1, py=-0.05, vx=0.3, vy=0.1)
    errs = []
    for dt in (0.05, 0.025):
        approx = discrete_step_taylor(x, ZERO_U, dt, PARAMS)
        exact = lipm_flow_analytic(x, ZERO_U, dt, PARAMS)
        errs.append(np.abs(approx.as_vector() - exact.as_vector()).max())
    assert errs[0] / errs[1] > 6.0  # halving dt shrinks one-step error ~8x


def test_taylor_global_second_order():
    x = state(px=0.08, py=-0.06, vx=0.35, vy=0.15)
    horizon = 0.4
    errors = []
    for dt in (0.02, 0.01, 0.005):
        steps = int(round(horizon / dt))
        cur = x
        for _ in range(steps):
            cur = discrete_step_taylor(cur, ZERO_U, dt, PARAMS)
        exact = lipm_flow_analytic(x, ZERO_U, horizon, PARAMS)
        errors.append(np.abs(cur.as_vector() - exact.as_vector()).max())
    assert errors[0] / errors[1] >= 3.5
    assert errors[1] / errors[2] >= 3.5


def test_reset_map_substitution():
    x = AugmentedState([0.1, 0.0, 0.981], [0.5, 0.1, 0.0], [0.3, 0.2, 0.0])
    xp = reset_map(x)
    assert np.allclose(xp.p_com, [-0.2, -0.2, 0.981], atol=1e-15)
    assert np.array_equal(xp.v_com, x.v_com)
    assert np.allclose(xp.p_swing, [-0.3, -0.2, 0.0], atol=1e-15)


def test_reset_map_involution_of_frame_shift():
    x = AugmentedState([0.1, -0.05, 0.981], [0.4, 0.2, 0.0], [0.25, -0.15, 0.0])
    twice = reset_map(reset_map(x))
    assert np.allclose(twice.p_com, x.p_com, atol=1e-15)
    assert np.allclose(twice.p_swing, x.p_swing, atol=1e-15)


def test_reset_map_zero_step_length():
    x = AugmentedState([0.1, 0.02, 0.981], [0.3, 0.0, 0.0], [0.0, 0.0, 0.0])
    xp = reset_map(x)
    assert np.array_equal(xp.p_com, x.p_com)


def test_reset_map_guard_violated():
    x = AugmentedState([0.1, 0.0, 0.981], [0.3, 0.0, 0.0], [0.2, 0.1, 0.05])
    with pytest.raises(ValueError, match="terrain height"):
        reset_map(x)


def test_reset_preserves_world_com():
    # local shift equals minus the new frame origin
    x = AugmentedState([0.12, -0.03, 0.981], [0.3, 0.1, 0.0], [0.22, -0.18, 0.0])
    xp = reset_map(x)
    world_before = x.p_com
    world_after = xp.p_com + x.p_swing  # new frame origin is the old swing foot
    assert np.allclose(world_before, world_after, atol=1e-15)


def test_guard_value_examples():
    assert guard_value(state(sz=0.05), 0.0) == pytest.approx(0.05)
    assert guard_value(state(sz=0.0), 0.0) == 0.0
    assert guard_value(state(sz=0.02), 0.05) == pytest.approx(-0.03)


def test_simulate_equilibrium_constant():
    x = state(sz=0.02)
    res = simulate_hybrid(x, lambda s, t, j: ZERO_U, 1, PARAMS, max_time=0.5)
    assert res.outcome == "timeout"
    assert not res.trajectory.step_boundaries
    assert np.allclose(res.trajectory.samples[:, :9], x.as_vector(), atol=1e-12)


def test_simulate_mirrored_lateral_symmetry():
    def policy(s, t, j):
        return Control([0.0, 0.4, 0.5 - 2.0 * t])

    def mirrored(s, t, j):
        return Control([0.0, -0.4, 0.5 - 2.0 * t])

    x = state(py=-0.05, vy=0.15, sy=-0.2)
    xm = state(py=0.05, vy=-0.15, sy=0.2)
    r1 = simulate_hybrid(x, policy, 1, PARAMS, max_time=1.0)
    r2 = simulate_hybrid(xm, mirrored, 1, PARAMS, max_time=1.0)
    flip = np.ones(12)
    flip[[1, 4, 7, 10]] = -1.0
    assert len(r1.trajectory) == len(r2.trajectory)
    assert np.allclose(r1.trajectory.samples, r2.trajectory.samples * flip, atol=1e-12)


def test_simulate_divergence_fell():
    x = state(px=0.5, vx=3.0, sz=0.05)
    res = simulate_hybrid(x, lambda s, t, j: ZERO_U, 1, PARAMS, max_time=5.0)
    assert res.outcome == "fell"


def test_event_time_converges_linearly():
    # scripted quadratic descent: z = 0.05 - 0.15 t^2, contact at sqrt(1/3)
    t_exact = math.sqrt(0.05 / 0.15)

    def policy(s, t, j):
        return Control([0.0, 0.0, -0.3 * t])

    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        res = simulate_hybrid(state(sz=0.05), policy, 1, PARAMS, sim_dt=dt, max_time=1.0)
        assert res.contact_times
        errs.append(abs(res.contact_times[0] - t_exact))
    assert errs[0] / errs[2] > 2.5  # roughly linear in sim dt
    assert errs[2] < 2e-3
