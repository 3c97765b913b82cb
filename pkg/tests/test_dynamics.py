import math

import numpy as np
import pytest

from shapephase import dynamics, rigid_algebra, scenario, triangle_core
from shapephase.dynamics import integrator_config
from shapephase.errors import (
    BinaryCollision,
    PersistentlyCollinear,
    PreconditionViolated,
    TripleCollisionApproach,
)
from shapephase.triangle_core import potential_spec, state

e3 = np.array([0.0, 0.0, 1.0])
harmonic = potential_spec("power_law", exponent=-2)
free = potential_spec("power_law", exponent=0)


def test_integrator_config():
    cfg = integrator_config()
    assert cfg.method == "dop853"
    assert cfg.customized_copy(rtol=1e-6).rtol == 1e-6
    with pytest.raises(PreconditionViolated):
        integrator_config(method="euler")
    with pytest.raises(PreconditionViolated):
        integrator_config(sample_spacing=0)


def test_lagrange_accelerations():
    d = 1.5
    s = scenario.lagrange_state(np.ones(3), distance=d)
    a = dynamics.accelerations(s.q, np.ones(3))
    assert np.linalg.norm(a, axis=1) == pytest.approx([math.sqrt(3) / d**2] * 3)
    # towards the centre
    assert np.sum(a * s.q, axis=1) == pytest.approx(-np.linalg.norm(a, axis=1) * np.linalg.norm(s.q, axis=1))


def test_accelerations():
    rng = np.random.default_rng(1)
    m = np.array([1.0, 2.0, 3.0])
    q = triangle_core.center(rng.normal(size=(3, 3)), m)
    assert m @ dynamics.accelerations(q, m) == pytest.approx(np.zeros(3), abs=1e-12)
    assert dynamics.accelerations(q, m, harmonic) == pytest.approx(-2 * np.sum(m) * q)
    assert not np.any(dynamics.accelerations(q, m, free))


def test_lagrange_rigid_rotation():
    m = np.array([1.0, 2.0, 3.0])
    d = 1.0
    s = scenario.lagrange_state(m, distance=d)
    rate = math.sqrt(np.sum(m) / d**3)
    tr = dynamics.integrate(s, 1.0, m)
    for k in (50, 100, len(tr) - 1):
        R = rigid_algebra.exp_rotation(rate * tr.t[k] * e3)
        assert tr.q[k] == pytest.approx(rigid_algebra.rotate(s.q, R), abs=1e-7)
    energy, momentum = tr.drift()
    assert energy < 1e-8
    assert momentum < 1e-8
    assert tr.within_budget(integrator_config())


def test_conservation_homographic():
    m = np.array([1.0, 1.5, 0.7])
    s = scenario.lagrange_state(m, distance=1.0, dilation=0.8)
    tr = dynamics.integrate(s, 2.0, m)
    assert tr.within_budget(integrator_config())
    assert tr.energy[0] == pytest.approx(triangle_core.total_energy(s, m))
    assert tr.momentum[0] == pytest.approx(triangle_core.angular_momentum(s, m))


def test_budget_breach():
    m = np.ones(3)
    s = scenario.lagrange_state(m, distance=1.0, dilation=0.8)
    cfg = integrator_config(rtol=1e-3, atol=1e-3, energy_budget=1e-14)
    tr = dynamics.integrate(s, 2.0, m, cfg=cfg)
    assert not tr.within_budget(cfg)


def test_harmonic_half_period():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.harmonic_state(m, tilt=0.4, deform=0.2)
    period = scenario.harmonic_period(m)
    tr = dynamics.integrate(s, 0.5 * period, m, harmonic)
    assert tr.t[-1] == pytest.approx(0.5 * period)
    assert tr.q[-1] == pytest.approx(-s.q, abs=1e-8)
    assert tr.v[-1] == pytest.approx(-s.v, abs=1e-8)


def test_verlet():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.harmonic_state(m, deform=0.2)
    period = scenario.harmonic_period(m)
    cfg = integrator_config(method="verlet")
    tr = dynamics.integrate(s, 0.5 * period, m, harmonic, cfg)
    assert tr.q[-1] == pytest.approx(-s.q, abs=1e-4)
    assert tr.drift()[1] < 1e-10


def test_zero_duration():
    m = np.ones(3)
    s = scenario.lagrange_state(m)
    tr = dynamics.integrate(s, 0.0, m)
    assert len(tr) == 1
    assert tr.duration == 0
    assert tr.drift() == (0.0, 0.0)
    with pytest.raises(PreconditionViolated):
        dynamics.integrate(s, -1.0, m)


def test_triple_collision_approach():
    m = np.ones(3)
    s = scenario.lagrange_state(m, dilation=0.0)
    cfg = integrator_config(triple_collision_floor=1e-2)
    with pytest.raises(TripleCollisionApproach) as e:
        dynamics.integrate(s, 2.0, m, cfg=cfg)
    assert 0 < e.value.time < 0.7


def test_dense_output_and_reversal():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.lagrange_state(m, dilation=0.9)
    tr = dynamics.integrate(s, 1.0, m)
    q, v = tr.evaluate(tr.t[37])
    assert q == pytest.approx(tr.q[37], abs=1e-12)
    back = tr.reversed()
    assert back.t[0] == 0
    assert back.q[-1] == pytest.approx(s.q)
    assert back.v[-1] == pytest.approx(-s.v)
    q, v = back.evaluate(back.t[-1])
    assert q == pytest.approx(s.q, abs=1e-12)


def crossing_motion():
    """Free motion in which body 2 crosses the segment of bodies 1 and 3 at t = 0.5."""
    m = np.ones(3)
    q = triangle_core.center([[-1.0, 0, 0], [0, -0.5, 0], [1, 0, 0]], m)
    v = triangle_core.center([[0.0, 0, 0], [0, 1, 0], [0, 0, 0]], m)
    return dynamics.integrate(state(q, v), 1.0, m, free), m


def test_orientation_lift_through_collinear():
    tr, m = crossing_motion()
    otr = dynamics.orientation_lift(tr, e3)
    assert otr.n == pytest.approx(np.tile(e3, (len(tr), 1)), abs=1e-12)
    z1 = 2 * otr.shapes()[:, 2]
    assert z1[0] > 0.1
    assert z1[-1] < -0.1


def test_orientation_lift_sign_and_preconditions():
    m = np.array([1.0, 2.0, 3.0])
    tr = dynamics.integrate(scenario.lagrange_state(m, dilation=0.9), 0.5, m)
    otr = dynamics.orientation_lift(tr, -e3)
    assert otr.n[-1] == pytest.approx(-e3, abs=1e-12)
    with pytest.raises(PreconditionViolated):
        dynamics.orientation_lift(tr, [1.0, 0, 0])


def test_euler_is_persistently_collinear():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.euler_state(m)
    tr = dynamics.integrate(s, 0.5, m)
    # the collinear configuration rotates rigidly
    assert triangle_core.collinearity(tr.q[-1], m) < 1e-10
    with pytest.raises(PersistentlyCollinear):
        dynamics.orientation_lift(tr, e3)


def test_shape_return_constant_shape():
    m = np.array([1.0, 2.0, 3.0])
    tr = dynamics.integrate(scenario.lagrange_state(m, dilation=0.8), 0.5, m)
    otr = dynamics.orientation_lift(tr, e3)
    returns = dynamics.detect_shape_return(otr, 1e-6)
    assert returns == pytest.approx(list(tr.t[1:]))
    assert dynamics.detect_shape_return(otr, 1e-6, skip_time=0.25) == pytest.approx(
        list(tr.t[tr.t > 0.25])
    )


def test_shape_return_harmonic():
    m = np.array([1.0, 2.0, 3.0])
    period = scenario.harmonic_period(m)
    s = scenario.harmonic_state(m, deform=0.2)
    tr = dynamics.integrate(s, 0.6 * period, m, harmonic)
    otr = dynamics.orientation_lift(tr, triangle_core.principal_normal(s.q, m))
    returns = dynamics.detect_shape_return(otr, 1e-6, skip_time=0.1 * period)
    assert any(abs(t - 0.5 * period) < 1e-6 for t in returns)
    assert dynamics.detect_shape_return(otr, 1e-6, skip_time=0.55 * period) == []


def test_truncated():
    m = np.array([1.0, 2.0, 3.0])
    tr = dynamics.integrate(scenario.lagrange_state(m, dilation=0.9), 1.0, m)
    otr = dynamics.orientation_lift(tr, e3)
    short = otr.truncated(0.4321)
    assert short.t[-1] == 0.4321
    assert short.q[-1] == pytest.approx(tr.evaluate(0.4321)[0])
    assert len(short.n) == len(short)


def test_shape_return_at_final_sample():
    m = np.array([1.0, 2.0, 3.0])
    period = scenario.harmonic_period(m)
    s = scenario.harmonic_state(m, deform=0.2)
    tr = dynamics.integrate(s, 0.5 * period, m, harmonic)
    otr = dynamics.orientation_lift(tr, triangle_core.principal_normal(s.q, m))
    returns = dynamics.detect_shape_return(otr, 1e-6, skip_time=0.1 * period)
    assert len(returns) == 1
    assert returns[0] == pytest.approx(0.5 * period, abs=1e-6)


@pytest.mark.parametrize("spec", [triangle_core.newtonian, harmonic], ids=["newtonian", "harmonic"])
def test_scaling_law(spec):
    # q -> c q, v -> c^(-k/2) v, t -> c^((k+2)/2) t maps solutions onto solutions
    m = np.array([1.0, 1.5, 0.7])
    s = scenario.lagrange_state(m, dilation=0.85, tilt=0.3)
    k = spec.exponent
    c = 1.7
    duration = 0.8
    tr = dynamics.integrate(s, duration, m, spec)
    scaled = dynamics.integrate(
        state(c * s.q, c ** (-k / 2) * s.v), c ** ((k + 2) / 2) * duration, m, spec
    )
    assert scaled.q[-1] == pytest.approx(c * tr.q[-1], abs=1e-8)
    assert scaled.v[-1] == pytest.approx(c ** (-k / 2) * tr.v[-1], abs=1e-8)


def test_forward_then_backward():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.lagrange_state(m, dilation=0.8, tilt=0.2)
    forward = dynamics.integrate(s, 1.5, m)
    end = forward.final_state()
    backward = dynamics.integrate(state(end.q, -end.v), 1.5, m)
    assert backward.q[-1] == pytest.approx(s.q, abs=1e-8)
    assert backward.v[-1] == pytest.approx(-s.v, abs=1e-8)


def test_binary_collision_inside_a_run():
    # raised by the accelerations, not by an event
    m = np.ones(3)
    q = triangle_core.center([[-1.0, 0, 0], [0, 1, 0], [1, 0, 0]], m)
    v = triangle_core.center([[1.0, 0, 0], [0, 0, 0], [-1, 0, 0]], m)
    spec = potential_spec("power_law", exponent=0, collision_floor=0.1)
    with pytest.raises(BinaryCollision):
        dynamics.integrate(state(q, v), 2.0, m, spec, integrator_config(max_step=0.01))
