"""
Runs of the full reconstruction: integrate, orient, find the shape return,
measure the rotation and compare it with the dynamic and geometric phases.

The reconstruction always works on the sampled motion interpolated by cubic
Hermite splines, the form in which motions are archived, so a run read back
from an archive gives the same report as the run that wrote it.
"""

import logging
import time

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import __version__, connection_gauge, dynamics, loops, phase_reconstruction, shape_space
from . import triangle_core
from .errors import EXIT_NUMERICAL, EXIT_PASS, EigenframeDegenerate, NoReturn
from .errors import ZeroAngularMomentum

logger = logging.getLogger(__name__)


def initial_normal(q, m, J0, closure="north"):
    """
    Orientation of the initial triangle

    The normal is chosen on the side of the closing pole (+J0 for the north
    closure, -J0 for the south one), so the first closing arc is never a
    half circle.
    """
    n0 = triangle_core.principal_normal(q, m)
    J = np.linalg.norm(J0)
    if n0 is None:
        # collinear start: orientation_lift decides whether this is a crossing
        return J0 / J if J > 0 else np.array([0.0, 0.0, 1.0])
    sign = 1.0 if closure == "north" else -1.0
    if sign * (n0 @ J0) < 0:
        n0 = -n0
    return n0


def orient(tr, closure="north"):
    """Oriented form of a motion, its normal chosen by :func:`initial_normal`."""
    J0 = tr.momentum[0]
    n0 = initial_normal(tr.q[0], tr.masses, J0, closure)
    return dynamics.orientation_lift(tr, n0)


def sampled_form(tr):
    """The motion as it is archived: samples with Hermite interpolation."""
    return dynamics.trajectory(tr.t, tr.q, tr.v, tr.masses, tr.spec)


def fibre_coordinates(otr):
    """Gauge trajectory of a motion, or None where it is undefined."""
    try:
        return connection_gauge.eigenframe_track(otr)
    except ZeroAngularMomentum:
        logger.info("Zero angular momentum: no fibre coordinates")
    except EigenframeDegenerate as e:
        logger.warning("No fibre coordinates: %s", e)
    return None


class simulation:
    """
    An integrated and oriented motion

    :ivar otr: Oriented trajectory in sampled form
    :ivar gauge: Gauge trajectory, or None
    :ivar budget_ok: Whether the conservation drifts stayed in budget
    :ivar elapsed: Wall time of the integration in seconds
    """

    def __init__(self, otr, gauge, budget_ok, elapsed):
        self.otr = otr
        self.gauge = gauge
        self.budget_ok = budget_ok
        self.elapsed = elapsed

    @property
    def trajectory(self):
        return self.otr.trajectory


def simulate(sc):
    """
    Integrates a scenario

    :param sc: :class:`shapephase.scenario.scenario`
    :rtype: simulation
    """
    start = time.perf_counter()
    tr = dynamics.integrate(sc.initial, sc.duration, sc.masses, sc.potential, sc.integrator)
    elapsed = time.perf_counter() - start
    tr = sampled_form(tr)
    otr = orient(tr, sc.params.phase.closure)
    budget_ok = tr.within_budget(sc.integrator)
    logger.info("Integrated %d samples in %.3f s", len(tr), elapsed)
    return simulation(otr, fibre_coordinates(otr), budget_ok, elapsed)


class run_report:
    """
    Reconstruction report with conservation diagnostics and provenance

    :ivar phase: :class:`shapephase.phase_reconstruction.phase_report`
    :ivar returns: All shape-return times found
    :ivar drift: (energy drift, momentum drift) over the whole motion
    :ivar budget_ok: Whether the drifts stayed in budget
    :ivar timing: Wall times in seconds
    :ivar provenance: Scenario hash, tool version and data source
    """

    def __init__(self, phase, returns, drift, budget_ok, timing, provenance):
        self.phase = phase
        self.returns = returns
        self.drift = drift
        self.budget_ok = budget_ok
        self.timing = timing
        self.provenance = provenance

    @property
    def exit_code(self):
        if self.phase.passed and self.budget_ok:
            return EXIT_PASS
        return EXIT_NUMERICAL

    def as_dict(self):
        return {
            "phase": self.phase.as_dict(),
            "shape_returns": list(self.returns),
            "conservation": {
                "energy_drift": self.drift[0],
                "momentum_drift": self.drift[1],
                "within_budget": self.budget_ok,
            },
            "timing": dict(self.timing),
            "provenance": dict(self.provenance),
            "status": "PASS" if self.exit_code == EXIT_PASS else "FAIL",
        }

    def summary(self):
        p = self.phase
        d = p.diagnostics
        lines = [
            "Shape return at t* = %.12g (%d returns found)" % (p.t_star, len(self.returns)),
            "  |J0|               %.12g" % p.J0,
            "  rotation           %.12g" % p.delta_theta,
            "  dynamic phase      %.12g +- %.2g" % (p.dynamic, d["dynamic_error"]),
            "  geometric phase    %.12g +- %.2g" % (p.geometric.total, d["geometric_error"]),
            "    shape term       %.12g" % p.geometric.shape_term,
            "    fibre term       %.12g" % p.geometric.fibre_term,
            "    branch crossings %d" % p.geometric.branch_crossings,
            "  closing arcs       %.6g, %.6g" % (d["arc_start"], d["arc_end"]),
            "  residual           %.3g +- %.2g (tolerance %.3g)"
            % (p.residual, p.error, p.tolerance),
            "  drift              energy %.3g, momentum %.3g%s"
            % (self.drift[0], self.drift[1], "" if self.budget_ok else " (BUDGET EXCEEDED)"),
            "PASS" if self.exit_code == EXIT_PASS else "FAIL",
        ]
        return "\n".join(lines)


def reconstruct_motion(otr, sc, budget_ok=None, source="scenario", timing=None):
    """
    Reconstruction at the first shape return of an oriented motion

    :param otr: Oriented trajectory in sampled form
    :param sc: Scenario supplying the tolerances
    :param budget_ok: Budget flag (recomputed from the motion if None)
    :param source: Provenance label of the motion
    :rtype: run_report
    :raise NoReturn: if the shape never returns
    """
    params = sc.params
    timing = dict(timing or {})
    start = time.perf_counter()
    returns = dynamics.detect_shape_return(
        otr, params.shape_return.tolerance, params.shape_return.skip_time
    )
    if not returns:
        raise NoReturn(
            "Shape does not return within %.6g (tolerance %.3g)"
            % (otr.t[-1], params.shape_return.tolerance)
        )
    phase = phase_reconstruction.reconstruct(
        otr,
        returns[0],
        tolerance=params.phase.tolerance,
        similarity_tolerance=params.phase.similarity_tolerance,
        shape_tolerance=2 * params.shape_return.tolerance,
        closure=params.phase.closure,
        flip_beta=params.phase.debug_flip_beta,
    )
    timing["reconstruction"] = time.perf_counter() - start
    if budget_ok is None:
        budget_ok = otr.trajectory.within_budget(sc.integrator)
    provenance = {
        "scenario_sha256": sc.config_hash(),
        "version": __version__,
        "source": source,
    }
    return run_report(phase, returns, otr.trajectory.drift(), budget_ok, timing, provenance)


def run(sc):
    """Simulation and reconstruction in one go."""
    sim = simulate(sc)
    return reconstruct_motion(
        sim.otr, sc, sim.budget_ok, "scenario", {"integration": sim.elapsed}
    )


def holonomy(curve, m, tolerance=1e-6):
    """
    Holonomy run over a shape curve, lifted from the section at unit I

    :rtype: shapephase.phase_reconstruction.holonomy_result
    """
    z1, _, _ = curve.rates(0.0)
    q_start, _ = shape_space.section_state(z1, curve.theta1_start, 0.0, 0.0, m, 1.0)
    return phase_reconstruction.holonomy_check(curve, q_start, m, tolerance)


def holonomy_curve(latitude=None, turns=1, polygon=None, curve_file=None, point=None):
    """
    Shape curve from command line style options

    :param latitude: Height of a latitude loop
    :param polygon: Vertices as a string ``z1,theta1;z1,theta1;...``
    :param curve_file: File read by :meth:`shapephase.loops.sampled.from_file`
    :param point: (z1, theta1) of a constant loop
    """
    given = [x is not None for x in (latitude, polygon, curve_file, point)]
    if sum(given) != 1:
        raise ValueError("Give exactly one of latitude, polygon, curve file or point")
    if latitude is not None:
        return loops.latitude(latitude, turns)
    if polygon is not None:
        vertices = [
            tuple(float(x) for x in vertex.split(","))
            for vertex in polygon.split(";")
            if vertex.strip()
        ]
        if any(len(vertex) != 2 for vertex in vertices):
            raise ValueError("Polygon vertices are written z1,theta1")
        return loops.polygon(vertices)
    if curve_file is not None:
        return loops.sampled.from_file(curve_file)
    return loops.constant(*point)


def _sphere_points(z, theta):
    rho = np.sqrt(np.clip(1 - z * z, 0.0, None))
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


def _arc(z_end, theta, pole, count=33):
    """Meridian from a pole of the unit sphere to height z_end at azimuth theta."""
    start = np.arccos(pole)
    stop = np.arccos(np.clip(z_end, -1.0, 1.0))
    polar = np.linspace(start, stop, count)
    return np.column_stack(
        [np.sin(polar) * np.cos(theta), np.sin(polar) * np.sin(theta), np.cos(polar)]
    )


def phase_accumulation(otr, gauge, closure="north"):
    """
    Dynamic and geometric phase accumulated from t = 0

    Trapezoidal sums of the phase rates at the samples, for plotting.

    :return: (dynamic, geometric) arrays of the sample count
    """
    J0 = gauge.J0
    pole = 1.0 if closure == "north" else -1.0
    omega = connection_gauge.omega_series(otr.q, otr.masses, J0)
    dynamic = cumulative_trapezoid(omega, otr.t, initial=0.0)
    if len(gauge) < 2:
        return dynamic, np.zeros_like(dynamic)
    _, shape, fibre = connection_gauge.phase_densities(otr, gauge.t, J0, pole)
    beta = shape + fibre
    geometric = cumulative_trapezoid(beta, gauge.t, initial=0.0)
    return dynamic, geometric


def plot_data(data, prefix, closure="north"):
    """
    Writes plot-ready column files for an archive

    ``<prefix>_shape.dat``
        t x y z of the shape on the unit sphere
    ``<prefix>_fibre.dat``
        t x y z of the angular momentum direction in the eigenframe
    ``<prefix>_arcs.dat``
        series s x y z of the closing arcs (series 0 from the pole to the
        start, series 1 from the pole to the end)
    ``<prefix>_phase.dat``
        t dynamic geometric, accumulated from t = 0

    :param data: :class:`shapephase.archive.archive_data`
    :return: List of the files written
    """
    written = []

    def save(suffix, table, header):
        file_name = "%s_%s.dat" % (prefix, suffix)
        np.savetxt(file_name, table, fmt="%.17g", header=header, comments="# ")
        written.append(file_name)

    t = data.t
    save(
        "shape",
        np.column_stack([t, _sphere_points(data["z1"], data["theta1"])]),
        "t x y z",
    )
    save(
        "fibre",
        np.column_stack([t, _sphere_points(data["z2"], data["theta2"])]),
        "t x y z",
    )
    if len(t) and np.all(np.isfinite(data["z2"])):
        pole = 1.0 if closure == "north" else -1.0
        arcs = []
        for series, k in enumerate((0, -1)):
            points = _arc(data["z2"][k], data["theta2"][k], pole)
            s = np.linspace(0.0, 1.0, len(points))
            arcs.append(np.column_stack([np.full(len(points), series), s, points]))
        save("arcs", np.vstack(arcs), "series s x y z")
        otr = data.oriented_trajectory()
        gauge = connection_gauge.eigenframe_track(otr)
        dynamic, geometric = phase_accumulation(otr, gauge, closure)
        save("phase", np.column_stack([t, dynamic, geometric]), "t dynamic geometric")
    else:
        logger.warning("Fibre coordinates undefined: no arcs or phase files")
    logger.info("Plot data written to %s", ", ".join(written))
    return written
