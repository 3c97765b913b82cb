import numpy as np
import pytest

from shapephase import archive, connection_gauge, dynamics, scenario
from shapephase.errors import ArchiveError
from shapephase.triangle_core import potential_spec

e3 = np.array([0.0, 0.0, 1.0])


def motion(duration=0.3):
    m = np.array([1.0, 2.0, 3.0])
    s = scenario.lagrange_state(m, dilation=0.9)
    spec = potential_spec(softening=0.01)
    tr = dynamics.integrate(s, duration, m, spec)
    return dynamics.orientation_lift(tr, e3)


def test_columns():
    assert len(archive.columns) == 31
    assert archive.column("t") == 0
    assert archive.column("q1x") == 1
    assert archive.column("v3z") == 18
    assert archive.columns[-4:] == ["z1", "theta1", "z2", "theta2"]


def test_round_trip(tmp_path):
    otr = motion()
    gauge = connection_gauge.eigenframe_track(otr)
    file_name = str(tmp_path / "motion.dat")
    archive.write_archive(file_name, otr, gauge, config_hash="abc123")
    data = archive.read_archive(file_name)
    assert np.array_equal(data.table, archive.table_of(otr, gauge))
    assert data.masses.tolist() == [1.0, 2.0, 3.0]
    assert data.spec.kind == "newtonian"
    assert data.spec.softening == 0.01
    assert data.config_hash == "abc123"
    assert np.array_equal(data.q, otr.q)
    assert np.array_equal(data.n, otr.n)
    assert np.array_equal(data["z2"], gauge.z2)
    assert len(data) == len(otr)


def test_round_trip_without_gauge(tmp_path):
    otr = motion()
    file_name = str(tmp_path / "motion.dat")
    archive.write_archive(file_name, otr)
    data = archive.read_archive(file_name)
    assert np.all(np.isnan(data["theta2"]))
    assert data.config_hash is None
    assert np.array_equal(data.table, archive.table_of(otr), equal_nan=True)


def test_reloaded_trajectory(tmp_path):
    otr = motion()
    file_name = str(tmp_path / "motion.dat")
    archive.write_archive(file_name, otr)
    reloaded = archive.read_archive(file_name).oriented_trajectory()
    assert np.array_equal(reloaded.t, otr.t)
    assert np.array_equal(reloaded.trajectory.energy, otr.trajectory.energy)
    # Hermite interpolation between samples
    q, _ = reloaded.trajectory.evaluate(0.1234)
    assert q == pytest.approx(otr.trajectory.evaluate(0.1234)[0], abs=1e-9)


def test_zero_duration(tmp_path):
    otr = motion(0.0)
    file_name = tmp_path / "empty.dat"
    archive.write_archive(str(file_name), otr)
    lines = file_name.read_text().splitlines()
    assert lines[0] == "# shapephase-archive 1"
    assert all(line.startswith("#") for line in lines)
    data = archive.read_archive(str(file_name))
    assert data.table.shape == (0, 31)
    with pytest.raises(ArchiveError):
        data.trajectory()


def test_malformed(tmp_path):
    with pytest.raises(ArchiveError):
        archive.read_archive(str(tmp_path / "missing.dat"))
    other = tmp_path / "other.dat"
    other.write_text("1 2 3\n")
    with pytest.raises(ArchiveError, match="not a shapephase archive"):
        archive.read_archive(str(other))
    otr = motion()
    file_name = tmp_path / "motion.dat"
    archive.write_archive(str(file_name), otr)
    text = file_name.read_text()
    short = tmp_path / "short.dat"
    short.write_text(text + "1 2 3\n")
    with pytest.raises(ArchiveError):
        archive.read_archive(str(short))
    bad_masses = tmp_path / "bad_masses.dat"
    bad_masses.write_text(text.replace("# masses = 1.0 2.0 3.0", "# masses = one two three"))
    with pytest.raises(ArchiveError):
        archive.read_archive(str(bad_masses))
    with pytest.raises(ArchiveError):
        archive.write_archive(str(tmp_path / "no_such_dir" / "x.dat"), otr)
