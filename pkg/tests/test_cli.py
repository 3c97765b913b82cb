import json

import pytest

from shapephase import __version__, scenario
from shapephase.cli import main

period = scenario.harmonic_period([1.0, 2.0, 3.0])

harmonic_phil = """
masses = 1 2 3
initial.preset = harmonic
preset_options {
  tilt = 0.5
  deform = 0.2
}
potential {
  kind = power_law
  exponent = -2
}
run.duration = %r
shape_return.skip_time = %r
""" % (0.55 * period, 0.1 * period)


@pytest.fixture
def harmonic_file(tmp_path):
    file_name = tmp_path / "harmonic.phil"
    file_name.write_text(harmonic_phil)
    return str(file_name)


def test_usage(capsys):
    assert main([]) == 3
    assert "Exit codes" in capsys.readouterr().err
    assert main(["frobnicate"]) == 3
    assert main(["--help"]) == 0
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_defaults(capsys):
    assert main(["defaults"]) == 0
    out = capsys.readouterr().out
    assert "masses = 1 1 1" in out
    assert "shape_return" in out


def test_validate_count_zero(capsys):
    assert main(["validate", "--count", "0"]) == 0
    assert capsys.readouterr().out.startswith("property")


def test_validate_suite(capsys):
    assert main(["validate", "--count", "3", "--suite", "stokes", "--suite", "shape_area"]) == 0
    assert main(["validate", "--count", "3", "--suite", "stokes", "--flip-beta"]) == 1


def test_simulate_reconstruct_plotdata(harmonic_file, tmp_path, capsys):
    archive_file = str(tmp_path / "motion.dat")
    assert main(["simulate", harmonic_file, "--archive", archive_file]) == 0
    assert "Energy drift" in capsys.readouterr().out

    report_file = tmp_path / "report.json"
    assert main(["reconstruct", harmonic_file, "--report", str(report_file)]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASS")
    direct = json.loads(report_file.read_text())
    assert direct["status"] == "PASS"
    assert set(direct) == {"phase", "shape_returns", "conservation", "timing", "provenance", "status"}

    archived_report = tmp_path / "archived.json"
    arguments = ["reconstruct", "--archive", archive_file, harmonic_file]
    assert main(arguments + ["output.report=%s" % archived_report]) == 0
    capsys.readouterr()
    archived = json.loads(archived_report.read_text())
    assert abs(archived["phase"]["residual"] - direct["phase"]["residual"]) <= 1e-12
    assert archived["provenance"]["source"] == "archive %s" % archive_file

    prefix = str(tmp_path / "plot")
    assert main(["plotdata", archive_file, "--prefix", prefix]) == 0
    assert capsys.readouterr().out.split() == [
        prefix + suffix for suffix in ("_shape.dat", "_fibre.dat", "_arcs.dat", "_phase.dat")
    ]


def test_overrides_on_the_command_line(harmonic_file, tmp_path, capsys):
    archive_file = str(tmp_path / "short.dat")
    assert main(["simulate", harmonic_file, "run.duration=0", "output.archive=%s" % archive_file]) == 0
    assert "Samples:         1" in capsys.readouterr().out
    with open(archive_file) as fh:
        assert all(line.startswith("#") for line in fh)


def test_configuration_errors(tmp_path, capsys):
    bad = tmp_path / "bad.phil"
    bad.write_text("masses = 1 1\n")
    assert main(["simulate", str(bad), "--archive", str(tmp_path / "x.dat")]) == 3
    assert "masses" in capsys.readouterr().err
    assert main(["simulate", "initial.preset=lagrange"]) == 3
    assert main(["simulate"]) == 3
    assert main(["reconstruct", "no_such.parameter=3"]) == 3
    assert main(["reconstruct", "--archive", str(tmp_path / "missing.dat")]) == 3
    assert main(["plotdata"]) == 3


def test_equal_mass_lagrange(capsys):
    # J0 along the normal at a shape pole for the whole motion
    assert main(["reconstruct", "initial.preset=lagrange", "run.duration=0.5"]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASS")


def test_physics_errors(tmp_path, capsys):
    assert main(["reconstruct", "initial.preset=euler", "run.duration=0.5"]) == 2
    assert "PersistentlyCollinear" in capsys.readouterr().err
    no_return = [
        "reconstruct",
        "masses=1 2 3",
        "initial.preset=harmonic",
        "preset_options.deform=0.2",
        "potential.kind=power_law",
        "potential.exponent=-2",
        "run.duration=%r" % (0.3 * period),
        "shape_return.skip_time=%r" % (0.1 * period),
    ]
    assert main(no_return) == 2
    assert "NoReturn" in capsys.readouterr().err


def test_budget_failure_exit_code(harmonic_file, tmp_path):
    assert (
        main(
            [
                "simulate",
                harmonic_file,
                "integrator.energy_budget=1e-300",
                "--archive",
                str(tmp_path / "m.dat"),
            ]
        )
        == 1
    )


def test_holonomy(capsys):
    assert main(["holonomy", "--latitude", "0.5", "--masses", "1 2 3"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert main(["holonomy", "--point", "0.3,1.0"]) == 0
    assert main(["holonomy"]) == 3
    assert main(["holonomy", "--latitude", "0.5", "--masses", "1 2"]) == 3
    assert main(["holonomy", "--latitude", "1.5"]) == 2
