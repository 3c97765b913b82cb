import math

import numpy as np
import pytest

from shapephase import dynamics, scenario, triangle_core
from shapephase.errors import ScenarioError

triangle = "initial.positions=(1, 0, 0) (0, 1, 0) (0, 0, 0)"


def test_defaults():
    sc = scenario.load(args=[triangle])
    assert sc.masses.tolist() == [1.0, 1.0, 1.0]
    assert sc.potential.kind == "newtonian"
    assert sc.integrator.method == "dop853"
    assert sc.integrator.max_step == math.inf
    assert sc.duration == 1
    assert sc.params.phase.closure == "north"
    assert sc.initial.v.tolist() == np.zeros((3, 3)).tolist()
    assert np.ones(3) @ sc.initial.q == pytest.approx(np.zeros(3), abs=1e-15)


def test_file_and_overrides(tmp_path):
    file_name = tmp_path / "scenario.phil"
    file_name.write_text(
        """
masses = 1 2 3
initial {
  positions = (1, 0, 0) (0, 1, 0) (0, 0, 0)
  velocities = (0, 0.5, 0) (-0.5, 0, 0) (0, 0, 0.1)
}
run.duration = 2.5
"""
    )
    sc = scenario.load(file_name=str(file_name), args=["run.duration=4", "integrator.method=rk45"])
    assert sc.masses.tolist() == [1.0, 2.0, 3.0]
    assert sc.duration == 4
    assert sc.integrator.method == "rk45"
    m = sc.masses
    assert m @ sc.initial.q == pytest.approx(np.zeros(3), abs=1e-15)
    assert m @ sc.initial.v == pytest.approx(np.zeros(3), abs=1e-15)


def test_text_source():
    sc = scenario.load(text="masses = 2 2 2\ninitial.preset = lagrange")
    assert sc.masses.tolist() == [2.0, 2.0, 2.0]
    assert triangle_core.collinearity(sc.initial.q, sc.masses) > 0.1


def test_phil_round_trip():
    sc = scenario.load(args=[triangle, "masses=0.1 0.7 1.3", "run.duration=%r" % (1 / 3)])
    again = scenario.load(text=sc.as_phil())
    assert again.masses.tolist() == sc.masses.tolist()
    assert again.duration == 1 / 3
    assert again.initial.q.tolist() == sc.initial.q.tolist()
    assert again.config_hash() == sc.config_hash()


def test_config_hash():
    a = scenario.load(args=[triangle])
    b = scenario.load(args=[triangle])
    c = scenario.load(args=[triangle, "run.duration=2"])
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 64


def test_lagrange_preset():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.lagrange_state(m, distance=2.0)
    assert triangle_core.pair_distances(s.q) == pytest.approx([2.0, 2.0, 2.0])
    assert m @ s.q == pytest.approx(np.zeros(3), abs=1e-15)
    rate = math.sqrt(6 / 8)
    J = triangle_core.angular_momentum(s, m)
    assert J == pytest.approx([0, 0, rate * triangle_core.polar_moment(s.q, m)])
    tilted = scenario.lagrange_state(m, tilt=0.5)
    normal = triangle_core.principal_normal(tilted.q, m)
    assert abs(normal[2]) == pytest.approx(math.cos(0.5))


def test_euler_preset():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.euler_state(m, distance=1.5)
    assert triangle_core.collinearity(s.q, m) == pytest.approx(0, abs=1e-15)
    a = dynamics.accelerations(s.q, m)
    # a rigidly rotating line: every acceleration is -rate^2 q
    ratios = np.sum(a * s.q, axis=1) / np.sum(s.q * s.q, axis=1)
    assert ratios == pytest.approx(np.full(3, ratios[0]), rel=1e-10)
    rate = np.linalg.norm(s.v[0]) / np.linalg.norm(s.q[0])
    assert -ratios[0] == pytest.approx(rate**2, rel=1e-10)


def test_harmonic_preset():
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.harmonic_state(m, tilt=0.3, deform=0.2)
    assert m @ s.q == pytest.approx(np.zeros(3), abs=1e-14)
    assert m @ s.v == pytest.approx(np.zeros(3), abs=1e-14)
    assert scenario.harmonic_period(m) == pytest.approx(2 * math.pi / math.sqrt(12))


def test_presets_through_load():
    for preset in ("lagrange", "homographic", "euler"):
        sc = scenario.load(args=["initial.preset=%s" % preset])
        assert sc.initial is not None
    sc = scenario.load(
        args=["initial.preset=harmonic", "potential.kind=power_law", "potential.exponent=-2"]
    )
    assert sc.potential.exponent == -2
    with pytest.raises(ScenarioError, match="initial.preset"):
        scenario.load(args=["initial.preset=harmonic"])


def test_errors_name_the_parameter():
    with pytest.raises(ScenarioError, match="initial.positions"):
        scenario.load(args=["run.duration=1"])
    with pytest.raises(ScenarioError, match="run.duration"):
        scenario.load(args=[triangle, "run.duration=-1"])
    with pytest.raises(ScenarioError, match="initial.positions"):
        scenario.load(args=["initial.positions=(1, 0, 0) (1, 0, 0) (0, 0, 0)"])
    with pytest.raises(ScenarioError, match="initial.positions"):
        scenario.load(args=["initial.positions=(0, 0, 0) (0, 0, 0) (0, 0, 0)"])
    with pytest.raises(ScenarioError, match="masses"):
        scenario.load(args=[triangle, "masses=1 0 1"])
    with pytest.raises(ScenarioError, match="masses"):
        scenario.load(args=[triangle, "masses=1 2"])
    with pytest.raises(ScenarioError):
        scenario.load(args=[triangle, "integrator.method=leapfrog"])
    with pytest.raises(ScenarioError):
        scenario.load(args=[triangle, "no_such.parameter=1"])


def test_missing_or_malformed_file(tmp_path):
    with pytest.raises(ScenarioError):
        scenario.load(file_name=str(tmp_path / "missing.phil"))
    bad = tmp_path / "bad.phil"
    bad.write_text("masses = 1 1 1\ninitial {\n")
    with pytest.raises(ScenarioError):
        scenario.load(file_name=str(bad))


def test_without_initial_state():
    sc = scenario.load(args=["run.duration=1"], check_initial=False)
    assert sc.initial is None


def test_defaults_listing():
    text = scenario.master_phil.as_str(attributes_level=1)
    assert "shape_return" in text
    assert "debug_flip_beta" not in scenario.master_phil.as_str(expert_level=0)
