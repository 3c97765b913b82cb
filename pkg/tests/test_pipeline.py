import math

import numpy as np
import pytest

from shapephase import archive, loops, pipeline, scenario
from shapephase.errors import NoReturn

masses = (1.0, 2.0, 3.0)


def harmonic_scenario(*extra, tilt=0.0, deform=0.2, span=0.55, check_initial=True):
    period = scenario.harmonic_period(masses)
    args = [
        "masses=%r %r %r" % masses,
        "initial.preset=harmonic",
        "preset_options.tilt=%r" % tilt,
        "preset_options.deform=%r" % deform,
        "potential.kind=power_law",
        "potential.exponent=-2",
        "run.duration=%r" % (span * period),
        "shape_return.skip_time=%r" % (0.1 * period),
    ]
    return scenario.load(args=args + list(extra), check_initial=check_initial)


def test_planar_reconstruction():
    sc = harmonic_scenario()
    report = pipeline.run(sc)
    phase = report.phase
    assert phase.t_star == pytest.approx(0.5 * scenario.harmonic_period(masses), abs=1e-6)
    assert abs(phase.residual) <= 1e-5
    assert phase.geometric.fibre_term == pytest.approx(0, abs=1e-9)
    assert report.budget_ok
    assert report.exit_code == 0
    result = report.as_dict()
    assert result["status"] == "PASS"
    assert result["provenance"]["scenario_sha256"] == sc.config_hash()
    assert result["provenance"]["source"] == "scenario"
    assert "integration" in result["timing"]
    assert "PASS" in report.summary()


def test_spatial_reconstruction():
    report = pipeline.run(harmonic_scenario(tilt=0.5))
    phase = report.phase
    assert abs(phase.residual) <= 1e-4
    assert abs(phase.dynamic) > 1e-3
    assert abs(phase.geometric.shape_term) > 1e-6
    assert abs(phase.geometric.fibre_term) > 1e-6
    assert phase.diagnostics["arc_start"] > 0
    assert report.exit_code == 0


def test_spatial_reconstruction_south_closure():
    report = pipeline.run(harmonic_scenario("phase.closure=south", tilt=0.5))
    assert report.phase.diagnostics["closure"] == "south"
    assert abs(report.phase.residual) <= 1e-4


def test_flipped_primitive_fails():
    report = pipeline.run(harmonic_scenario("phase.debug_flip_beta=True", tilt=0.5))
    assert not report.phase.passed
    assert report.exit_code == 1
    assert report.as_dict()["status"] == "FAIL"


def test_budget_flag():
    sc = harmonic_scenario(
        "integrator.rtol=1e-8", "integrator.atol=1e-10", "integrator.energy_budget=1e-15"
    )
    report = pipeline.run(sc)
    assert not report.budget_ok
    assert report.exit_code == 1
    assert "BUDGET EXCEEDED" in report.summary()


@pytest.mark.slow
def test_tolerance_sweep():
    residuals = []
    for rtol in (1e-7, 1e-8, 1e-10):
        sc = harmonic_scenario(
            "integrator.rtol=%r" % rtol,
            "integrator.atol=%r" % (rtol / 100),
            "shape_return.tolerance=1e-5",
            "phase.similarity_tolerance=1e-4",
            tilt=0.5,
        )
        residuals.append(abs(pipeline.run(sc).phase.residual))
    assert all(r < 1e-2 for r in residuals)
    assert residuals[-1] <= 1e-4


def test_no_return():
    sc = harmonic_scenario(span=0.3)
    with pytest.raises(NoReturn):
        pipeline.run(sc)


def test_deterministic():
    first = pipeline.run(harmonic_scenario(tilt=0.5)).as_dict()
    second = pipeline.run(harmonic_scenario(tilt=0.5)).as_dict()
    assert first["phase"] == second["phase"]
    assert first["shape_returns"] == second["shape_returns"]


def test_archive_round_trip(tmp_path):
    sc = harmonic_scenario(tilt=0.5)
    sim = pipeline.simulate(sc)
    file_name = str(tmp_path / "motion.dat")
    archive.write_archive(file_name, sim.otr, sim.gauge, sc.config_hash())
    direct = pipeline.reconstruct_motion(sim.otr, sc, sim.budget_ok)
    data = archive.read_archive(file_name)
    assert data.config_hash == sc.config_hash()
    reloaded = pipeline.reconstruct_motion(
        data.oriented_trajectory(),
        harmonic_scenario(tilt=0.5, check_initial=False),
        source="archive",
    )
    for key in ("delta_theta", "dynamic_phase", "geometric_phase", "residual"):
        assert abs(reloaded.phase.as_dict()[key] - direct.phase.as_dict()[key]) <= 1e-12
    assert reloaded.provenance["source"] == "archive"


def test_initial_normal():
    q = np.array([[1.0, 0, 0], [0, 1, 0], [-1, -1, 0]])
    m = np.ones(3)
    J0 = np.array([0.0, 0.0, -2.0])
    assert pipeline.initial_normal(q, m, J0) == pytest.approx([0, 0, -1])
    assert pipeline.initial_normal(q, m, J0, "south") == pytest.approx([0, 0, 1])
    line = np.array([[1.0, 0, 0], [0, 0, 0], [-1, 0, 0]])
    assert pipeline.initial_normal(line, m, J0) == pytest.approx([0, 0, -1])
    assert pipeline.initial_normal(line, m, np.zeros(3)) == pytest.approx([0, 0, 1])


def test_zero_angular_momentum_has_no_fibre_coordinates():
    sc = scenario.load(
        args=[
            "initial.positions=(1, 0, 0) (0, 1, 0) (-1, -0.5, 0)",
            "potential.kind=power_law",
            "potential.exponent=-2",
            "run.duration=0.1",
        ]
    )
    sim = pipeline.simulate(sc)
    assert sim.gauge is None


def test_holonomy():
    result = pipeline.holonomy(loops.latitude(0.5), np.array(masses))
    assert result.passed
    assert result.measured == pytest.approx(-math.pi / 2, abs=1e-6)


def test_holonomy_curve():
    assert isinstance(pipeline.holonomy_curve(latitude=0.2, turns=2), loops.latitude)
    curve = pipeline.holonomy_curve(polygon="0,0; 0,1.5; 0.5,0.7;")
    assert isinstance(curve, loops.polygon)
    assert curve.period == 3
    assert isinstance(pipeline.holonomy_curve(point=(0.1, 0.2)), loops.constant)
    with pytest.raises(ValueError):
        pipeline.holonomy_curve()
    with pytest.raises(ValueError):
        pipeline.holonomy_curve(latitude=0.2, point=(0.1, 0.2))
    with pytest.raises(ValueError):
        pipeline.holonomy_curve(polygon="0,0,1;0,1")


def test_plot_data_planar(tmp_path):
    sc = harmonic_scenario()
    sim = pipeline.simulate(sc)
    file_name = str(tmp_path / "motion.dat")
    archive.write_archive(file_name, sim.otr, sim.gauge)
    prefix = str(tmp_path / "plot")
    written = pipeline.plot_data(archive.read_archive(file_name), prefix)
    assert written == [prefix + suffix for suffix in ("_shape.dat", "_fibre.dat", "_arcs.dat", "_phase.dat")]
    fibre = np.loadtxt(prefix + "_fibre.dat")
    assert fibre[:, 1:] == pytest.approx(np.tile([0.0, 0.0, 1.0], (len(fibre), 1)), abs=1e-12)
    shape = np.loadtxt(prefix + "_shape.dat")
    assert np.linalg.norm(shape[:, 1:], axis=1) == pytest.approx(np.ones(len(shape)))
    arcs = np.loadtxt(prefix + "_arcs.dat")
    assert set(arcs[:, 0]) == {0.0, 1.0}
    phase = np.loadtxt(prefix + "_phase.dat")
    assert phase[0, 1:].tolist() == [0.0, 0.0]
    assert np.all(np.diff(phase[:, 1]) > 0)


def test_plot_data_rigid(tmp_path):
    sc = scenario.load(args=["masses=1 2 3", "initial.preset=lagrange", "run.duration=0.5"])
    sim = pipeline.simulate(sc)
    file_name = str(tmp_path / "rigid.dat")
    archive.write_archive(file_name, sim.otr, sim.gauge)
    prefix = str(tmp_path / "rigid")
    pipeline.plot_data(archive.read_archive(file_name), prefix)
    shape = np.loadtxt(prefix + "_shape.dat")
    assert np.ptp(shape[:, 1:], axis=0) == pytest.approx(np.zeros(3), abs=1e-8)


def test_plot_data_without_fibre(tmp_path):
    sc = scenario.load(args=["initial.preset=lagrange", "run.duration=0.2"])
    sim = pipeline.simulate(sc)
    assert sim.gauge is None
    file_name = str(tmp_path / "pole.dat")
    archive.write_archive(file_name, sim.otr)
    written = pipeline.plot_data(archive.read_archive(file_name), str(tmp_path / "pole"))
    assert len(written) == 2
