"""
Column archives of simulated motions.

An archive is a whitespace-separated text file. The leading ``#`` lines hold
the format version, the masses, the potential and the hash of the scenario;
the last of them names every column::

  # shapephase-archive 1
  # units = natural, G = 1
  # masses = 1.0 1.0 1.0
  # potential = newtonian 1.0 0.0 1e-12
  # scenario_sha256 = ...
  # columns = t q1x q1y q1z ... theta2

Numbers are written with 17 significant digits, so reading an archive gives
back the same floating point values. Fibre coordinates are ``nan`` where they
are undefined (zero angular momentum or a degenerate eigenframe).
"""

import logging

import numpy as np

from . import dynamics, triangle_core
from .errors import ArchiveError, PreconditionViolated

logger = logging.getLogger(__name__)

format_version = "1"

_bodies = ("1", "2", "3")
_axes = ("x", "y", "z")

columns = (
    ["t"]
    + ["q%s%s" % (a, i) for a in _bodies for i in _axes]
    + ["v%s%s" % (a, i) for a in _bodies for i in _axes]
    + ["I", "E", "Jx", "Jy", "Jz", "nx", "ny", "nz", "z1", "theta1", "z2", "theta2"]
)


def column(name):
    """Index of a named column."""
    return columns.index(name)


class archive_data:
    """
    Contents of an archive

    :ivar t: (N,) times
    :ivar q: (N, 3, 3) positions
    :ivar v: (N, 3, 3) velocities
    :ivar n: (N, 3) oriented normals
    :ivar table: (N, len(columns)) all columns
    :ivar masses: Masses
    :ivar spec: Potential
    :ivar config_hash: SHA-256 of the scenario, or None
    """

    def __init__(self, table, masses, spec, config_hash=None):
        self.table = np.asarray(table, dtype=float).reshape(-1, len(columns))
        self.masses = np.asarray(masses, dtype=float)
        self.spec = spec
        self.config_hash = config_hash
        self.t = self.table[:, 0]
        self.q = self.table[:, 1:10].reshape(-1, 3, 3)
        self.v = self.table[:, 10:19].reshape(-1, 3, 3)
        self.n = self.table[:, column("nx") : column("nz") + 1]

    def __len__(self):
        return len(self.t)

    def __getitem__(self, name):
        return self.table[:, column(name)]

    def trajectory(self):
        """The motion, interpolated by cubic Hermite splines between samples."""
        if len(self) == 0:
            raise ArchiveError("Archive holds no samples")
        return dynamics.trajectory(self.t, self.q, self.v, self.masses, self.spec)

    def oriented_trajectory(self):
        return dynamics.oriented_trajectory(self.trajectory(), self.n)


def table_of(otr, gauge=None):
    """
    Archive columns of an oriented motion

    :param otr: Oriented trajectory
    :param gauge: Gauge trajectory with the fibre coordinates, or None
    :return: (N, len(columns)) array
    """
    tr = otr.trajectory
    N = len(tr)
    w = otr.shapes()
    z1 = np.clip(2 * w[:, 2], -1.0, 1.0)
    theta1 = np.arctan2(w[:, 1], w[:, 0])
    if gauge is None:
        z2 = theta2 = np.full(N, np.nan)
    else:
        z2, theta2 = gauge.z2, gauge.theta2
    return np.column_stack(
        [
            tr.t,
            tr.q.reshape(N, 9),
            tr.v.reshape(N, 9),
            tr.polar,
            tr.energy,
            tr.momentum,
            otr.n,
            z1,
            theta1,
            z2,
            theta2,
        ]
    )


def _header(masses, spec, config_hash):
    return "\n".join(
        [
            "shapephase-archive %s" % format_version,
            "units = natural, G = 1",
            "masses = %s" % " ".join(repr(float(x)) for x in masses),
            "potential = %s %r %r %r"
            % (spec.kind, float(spec.exponent), float(spec.softening), float(spec.collision_floor)),
            "scenario_sha256 = %s" % (config_hash or "none"),
            "columns = %s" % " ".join(columns),
        ]
    )


def write_archive(file_name, otr, gauge=None, config_hash=None):
    """
    Writes a motion to an archive

    A motion of zero duration gives an archive with the header only.

    :param file_name: Output path
    :param otr: Oriented trajectory
    :param gauge: Gauge trajectory, or None
    :param config_hash: Hash of the scenario that produced the motion
    """
    tr = otr.trajectory
    if tr.duration == 0:
        table = np.empty((0, len(columns)))
    else:
        table = table_of(otr, gauge)
    header = _header(tr.masses, tr.spec, config_hash)
    try:
        np.savetxt(file_name, table, fmt="%.17g", header=header, comments="# ")
    except OSError as e:
        raise ArchiveError("Cannot write archive %s: %s" % (file_name, e))
    logger.info("Archive %s: %d samples", file_name, len(table))


def _header_fields(lines, file_name):
    fields = {}
    for line in lines:
        text = line[1:].strip()
        if " = " in text:
            key, value = text.split(" = ", 1)
            fields[key.strip()] = value.strip()
        elif text.startswith("shapephase-archive"):
            fields["version"] = text.split()[-1]
    if fields.get("version") != format_version:
        raise ArchiveError("%s is not a shapephase archive (version 1)" % file_name)
    for key in ("masses", "potential", "columns"):
        if key not in fields:
            raise ArchiveError("%s: header lacks %s" % (file_name, key))
    if fields["columns"].split() != columns:
        raise ArchiveError("%s: unexpected columns" % file_name)
    return fields


def read_archive(file_name):
    """
    Reads an archive

    :rtype: archive_data
    :raise ArchiveError: for unreadable or malformed files
    """
    try:
        with open(file_name) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ArchiveError("Cannot read archive %s: %s" % (file_name, e))
    header = [line for line in lines if line.startswith("#")]
    body = [line for line in lines if line.strip() and not line.startswith("#")]
    fields = _header_fields(header, file_name)
    try:
        masses = [float(x) for x in fields["masses"].split()]
        kind, exponent, softening, floor = fields["potential"].split()
        spec = triangle_core.potential_spec(
            kind, float(exponent), float(softening), float(floor)
        )
        if body:
            table = np.loadtxt(body, ndmin=2)
        else:
            table = np.empty((0, len(columns)))
    except (ValueError, PreconditionViolated) as e:
        raise ArchiveError("%s: %s" % (file_name, e))
    if table.shape[1] != len(columns):
        raise ArchiveError(
            "%s: %d columns per row, expected %d" % (file_name, table.shape[1], len(columns))
        )
    config_hash = fields.get("scenario_sha256")
    if config_hash == "none":
        config_hash = None
    logger.debug("Archive %s: %d samples", file_name, len(table))
    return archive_data(table, masses, spec, config_hash)
