"""
Reconstruction of the total rotation of a three-body motion.

When the initial and final oriented triangles are similar, the rotation about
the angular momentum axis satisfies

    J0 dtheta = integral of omega_J0 dt + integral over a disc of Omega_J0

modulo 2 pi J0. The disc integral is evaluated as the line integral of the
primitive

    beta = J0 (z1 z2 dtheta1 / 2 + (z2 - 1) dtheta2)

around the reduced curve closed by meridian arcs through the north pole of
the fibre sphere, where beta vanishes. Continuing the inertia eigenframe once
around a shape-sphere pole turns it by pi; each such winding adds pi J0.
"""

import logging
import math

import numpy as np

from . import connection_gauge, quadrature, rigid_algebra, shape_space, triangle_core
from .errors import (
    AntipodalInput,
    AntipodalNormal,
    ChartViolation,
    NotSimilar,
    PreconditionViolated,
    ShapeNotClosed,
    ZeroAngularMomentum,
)

logger = logging.getLogger(__name__)

closures = ("north", "south")


def wrap(angle):
    """Reduces an angle to (-pi, pi]."""
    result = math.remainder(angle, 2 * math.pi)
    if result == -math.pi:
        result = math.pi
    return result


def _pole_sign(closure):
    if closure not in closures:
        raise PreconditionViolated("Unknown closure: %r" % (closure,))
    return 1.0 if closure == "north" else -1.0


class closed_reduced_loop:
    """
    Reduced curve of a motion closed through a pole of the fibre sphere

    :ivar gauge: Gauge trajectory of the motion
    :ivar closure: ``north`` (z2 = 1) or ``south`` (z2 = -1)
    :ivar arc_start: Fibre-sphere length of the arc from the pole to the start
    :ivar arc_end: Fibre-sphere length of the arc from the end back to the pole
    :ivar shape_gap: Shape-sphere distance between the curve's ends
    """

    def __init__(self, gauge, closure, shape_gap):
        self.gauge = gauge
        self.closure = closure
        self.shape_gap = shape_gap
        sign = _pole_sign(closure)
        J = gauge.J0_norm
        self.arc_start = J * math.acos(float(np.clip(sign * gauge.z2[0], -1, 1)))
        self.arc_end = J * math.acos(float(np.clip(sign * gauge.z2[-1], -1, 1)))

    @property
    def branch_crossings(self):
        """Windings of the sampled shape azimuth, i.e. passes around a pole."""
        return int(round((self.gauge.theta1[-1] - self.gauge.theta1[0]) / (2 * math.pi)))


def close_reduced_loop(gt, shape_tolerance=1e-6, closure="north"):
    """
    Closes the reduced curve with meridian arcs

    The arcs keep the shape and theta2 fixed, so beta vanishes on them.

    :param gt: Gauge trajectory
    :param shape_tolerance: Largest shape distance between the two ends
    :param closure: ``north`` or ``south``
    :rtype: closed_reduced_loop
    :raise ShapeNotClosed: if the shape curve is not closed
    """
    _pole_sign(closure)
    start = shape_space.shape_point.from_angles(gt.z1[0], gt.theta1[0])
    end = shape_space.shape_point.from_angles(gt.z1[-1], gt.theta1[-1])
    gap = shape_space.shape_distance(start, end)
    if gap > shape_tolerance:
        raise ShapeNotClosed(
            "Shape curve is not closed: end points %.3g apart (tolerance %.3g)"
            % (gap, shape_tolerance)
        )
    return closed_reduced_loop(gt, closure, gap)


class geometric_phase:
    """
    Line integral of the gauge potential around a closed reduced loop

    :ivar shape_term: J0 times the integral of z1 z2 dtheta1 / 2
    :ivar fibre_term: J0 times the integral of (z2 -+ 1) dtheta2
    :ivar branch_crossings: Windings of theta1
    :ivar J0: Magnitude of the angular momentum
    :ivar error: Quadrature error estimate
    :ivar pole_term: -p J0 e / 2 for an azimuth mismatch e of the ends, with p
        the sign of z1 z2 there; together with the winding correction it turns
        the shape term into that of J0 (z1 z2 - p) dtheta1 / 2, which stays
        regular where the ends sit at a shape pole
    """

    def __init__(self, shape_term, fibre_term, branch_crossings, J0, error=0.0, pole_term=0.0):
        self.shape_term = shape_term
        self.fibre_term = fibre_term
        self.branch_crossings = branch_crossings
        self.J0 = J0
        self.error = error
        self.pole_term = pole_term

    @property
    def line(self):
        """The unreduced line integral of beta."""
        return self.shape_term + self.fibre_term

    @property
    def total(self):
        """Line integral with the eigenframe winding correction."""
        return self.line + math.pi * self.J0 * self.branch_crossings + self.pole_term

    def __float__(self):
        return self.total

    def __repr__(self):
        return "geometric_phase(shape_term=%.12g, fibre_term=%.12g, crossings=%d)" % (
            self.shape_term,
            self.fibre_term,
            self.branch_crossings,
        )


def geometric_phase_line(loop, J0=None, tolerance=quadrature.epsabs, flip=False):
    """
    Integral of beta around the closed reduced loop

    beta is integrated along the dense motion the loop was taken from, using
    the rates of :func:`connection_gauge.phase_densities`, so the sample
    spacing only sets the quadrature breakpoints. The closing meridian arcs
    contribute nothing. The windings of the shape azimuth come from the same
    integral.

    :param loop: Closed reduced loop
    :param J0: Magnitude of the angular momentum (taken from the loop by default)
    :param tolerance: Absolute quadrature error goal
    :param flip: Negate beta (a deliberately wrong primitive, for self-tests)
    :rtype: geometric_phase
    :raise QuadratureFailure: if the error goal cannot be met
    """
    gt = loop.gauge
    scale = 1.0 if J0 is None else float(J0) / gt.J0_norm
    J = gt.J0_norm * scale
    sign = _pole_sign(loop.closure)
    if len(gt) < 2:
        return geometric_phase(0.0, 0.0, 0, J)
    if gt.motion is None:
        raise PreconditionViolated("The gauge trajectory carries no motion to integrate along")
    motion = gt.motion

    def densities(t):
        return connection_gauge.phase_densities(motion, t, gt.J0, sign)

    (turns, shape_term, fibre_term), error = quadrature.composite(
        densities, gt.t, epsabs=tolerance
    )
    crossings = int(round(turns / (2 * math.pi)))
    mismatch = turns - 2 * math.pi * crossings
    p = 1.0 if gt.z1[0] * gt.z2[0] >= 0 else -1.0
    factor = -scale if flip else scale
    result = geometric_phase(
        factor * shape_term,
        factor * fibre_term,
        crossings,
        J,
        scale * error,
        -0.5 * p * J * mismatch,
    )
    logger.debug("Geometric phase %r", result)
    return result


class chart_surface:
    """
    Parametrised surface in the (z1, theta1, z2, theta2) chart

    :param coordinates: f(u, v) -> array of shape (4, ...) of chart coordinates
    :param jacobian: f(u, v) -> array of shape (4, 2, ...) of partial derivatives
    :param u_range: Parameter interval of u
    :param v_range: Parameter interval of v
    """

    def __init__(self, coordinates, jacobian, u_range=(0.0, 1.0), v_range=(0.0, 1.0)):
        self.coordinates = coordinates
        self.jacobian = jacobian
        self.u_range = u_range
        self.v_range = v_range

    @classmethod
    def affine(cls, origin, a, b):
        """The parallelogram origin + u a + v b, 0 <= u, v <= 1."""
        origin, a, b = (np.asarray(x, dtype=float) for x in (origin, a, b))

        def coordinates(u, v):
            u, v = np.broadcast_arrays(u, v)
            return origin.reshape((4,) + (1,) * u.ndim) + np.multiply.outer(a, u) + np.multiply.outer(b, v)

        def jacobian(u, v):
            u, v = np.broadcast_arrays(u, v)
            ones = np.ones(u.shape)
            return np.stack([np.multiply.outer(a, ones), np.multiply.outer(b, ones)], axis=1)

        return cls(coordinates, jacobian)

    def boundary(self):
        """Counter-clockwise boundary edges as (start, end) parameter pairs."""
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        return [((u0, v0), (u1, v0)), ((u1, v0), (u1, v1)), ((u1, v1), (u0, v1)), ((u0, v1), (u0, v0))]


def _check_chart(x):
    z1, _, z2, _ = x
    if np.any(np.abs(z1) >= 1) or np.any(np.abs(z2) > 1):
        raise ChartViolation("Surface leaves the eigenframe chart (|z1| < 1, |z2| <= 1)")


def omega_surface_quadrature(surface, J0, order=20):
    """
    Integral of Omega_J0 = J0 (d(z1 z2) ^ dtheta1 / 2 + dz2 ^ dtheta2) over a surface

    :param surface: Chart surface
    :param J0: Magnitude of the angular momentum
    :param order: Gauss-Legendre order in each direction
    :raise ChartViolation: if the surface reaches a shape pole
    """

    def density(u, v):
        x = surface.coordinates(u, v)
        _check_chart(x)
        z1, _, z2, _ = x
        d = surface.jacobian(u, v)
        z1_u, t1_u, z2_u, t2_u = d[:, 0]
        z1_v, t1_v, z2_v, t2_v = d[:, 1]
        shape = 0.5 * (
            z2 * (z1_u * t1_v - z1_v * t1_u) + z1 * (z2_u * t1_v - z2_v * t1_u)
        )
        fibre = z2_u * t2_v - z2_v * t2_u
        return J0 * (shape + fibre)

    return quadrature.tensor_gauss(density, surface.u_range, surface.v_range, order)


def boundary_line_integral(surface, J0, closure="north", tolerance=1e-13, flip=False):
    """
    Integral of beta (or its south-pole version) around the surface boundary

    :param flip: Negate beta, as :func:`geometric_phase_line` does
    """
    sign = _pole_sign(closure)
    if flip:
        J0 = -J0
    total = 0.0
    for (ua, va), (ub, vb) in surface.boundary():
        du, dv = ub - ua, vb - va

        def integrand(s):
            u, v = ua + s * du, va + s * dv
            x = surface.coordinates(u, v)
            _check_chart(x)
            z1, _, z2, _ = x
            d = surface.jacobian(u, v)
            dx = d[:, 0] * du + d[:, 1] * dv
            return J0 * (0.5 * z1 * z2 * dx[1] + (z2 - sign) * dx[3])

        value, _ = quadrature.adaptive(integrand, 0.0, 1.0, epsabs=tolerance)
        total += value
    return total


def rotation_arc(q0, axis, angle):
    """
    Rigid rotation path s -> exp(s angle axis) q0 for s in [0, 1]

    :return: Function of s giving (q, dq/ds)
    """
    q0 = np.asarray(q0, dtype=float)
    axis = np.asarray(axis, dtype=float)

    def path(s):
        s = np.asarray(s, dtype=float)
        rotations = np.array(
            [rigid_algebra.exp_rotation(x * angle * axis) for x in np.atleast_1d(s)]
        )
        q = np.einsum("nij,aj->nai", rotations, q0)
        dq = angle * np.cross(axis, q)
        if s.ndim == 0:
            return q[0], dq[0]
        return q, dq

    return path


def homothety_path(q0, factor):
    """Dilation path s -> (1 + s (factor - 1)) q0 for s in [0, 1]."""
    q0 = np.asarray(q0, dtype=float)

    def path(s):
        s = np.asarray(s, dtype=float)
        scale = 1 + s * (factor - 1)
        q = np.multiply.outer(scale, q0)
        dq = np.broadcast_to((factor - 1) * q0, q.shape)
        return q, dq

    return path


def alpha_line_integral(path, m, J0, interval=(0.0, 1.0), tolerance=1e-12):
    """
    Integral of alpha_J0 along a path in configuration space

    :param path: Function s -> (q, dq/ds) accepting arrays of s
    :param interval: Parameter interval
    :return: (value, error estimate)
    """

    def integrand(s):
        q, dq = path(s)
        return connection_gauge.alpha_series(q, dq, m, J0)

    return quadrature.adaptive(integrand, interval[0], interval[1], epsabs=tolerance)


class total_rotation:
    """
    Factorisation R = R1 R_J0 R0 of the rotation between similar triangles

    :ivar angle: Rotation angle about J0 in (-pi, pi]
    :ivar R: Fitted rotation
    :ivar R0: Rotation taking n0 to the pole direction
    :ivar R1: Rotation taking the pole direction to n1
    :ivar R_J0: Rotation about J0
    :ivar scale: Fitted scale factor
    :ivar residual: Relative fit residual
    """

    def __init__(self, angle, R, R0, R1, R_J0, scale, residual):
        self.angle = angle
        self.R = R
        self.R0 = R0
        self.R1 = R1
        self.R_J0 = R_J0
        self.scale = scale
        self.residual = residual


def measure_total_rotation(oq0, oq1, m, J0, similarity_tolerance=1e-8, closure="north"):
    """
    Rotation about J0 relating two oriented-similar triangles

    :param oq0: Initial oriented configuration
    :param oq1: Final oriented configuration
    :param m: Masses
    :param J0: Angular momentum
    :param similarity_tolerance: Largest relative fit residual
    :param closure: ``north`` factors through J0, ``south`` through -J0
    :rtype: total_rotation
    :raise NotSimilar: if the triangles are not oriented-similar
    :raise AntipodalNormal: if a normal points opposite to the pole direction
    :raise AxisNotFixed: if the factorisation is inconsistent
    """
    m = np.asarray(m, dtype=float)
    J0 = np.asarray(J0, dtype=float)
    J = np.linalg.norm(J0)
    if J == 0:
        raise ZeroAngularMomentum("Rotation about J0 undefined for J0 = 0")
    axis = J0 / J
    pole = _pole_sign(closure) * axis
    scale, R, residual = rigid_algebra.fit_similarity(oq0.q, oq1.q, m)
    relative = math.sqrt(residual / triangle_core.polar_moment(oq1.q, m))
    if relative > similarity_tolerance:
        raise NotSimilar(
            "Triangles are not similar: relative residual %.3g > %.3g"
            % (relative, similarity_tolerance)
        )
    if np.linalg.norm(R @ oq0.n - oq1.n) > 1e-6:
        raise NotSimilar("Triangles are similar only with opposite orientations")
    try:
        R0 = rigid_algebra.rotation_between(oq0.n, pole)
        R1 = rigid_algebra.rotation_between(pole, oq1.n)
    except AntipodalInput as e:
        raise AntipodalNormal("Normal antiparallel to the closing pole: %s" % e)
    R_J0 = R1.T @ R @ R0.T
    angle = rigid_algebra.log_about_axis(R_J0, axis)
    return total_rotation(angle, R, R0, R1, R_J0, scale, relative)


class phase_report:
    """
    Comparison of the measured rotation with dynamic plus geometric phase

    :ivar delta_theta: Measured rotation angle about J0
    :ivar dynamic: Dynamic phase
    :ivar geometric: :class:`geometric_phase`
    :ivar residual: wrap(delta_theta - (dynamic + geometric) / J0)
    :ivar error: Estimated numerical error of the residual
    :ivar tolerance: Acceptance tolerance
    :ivar diagnostics: Dictionary of further numbers
    """

    def __init__(self, delta_theta, dynamic, geometric, J0, t_star, tolerance, error, diagnostics):
        self.delta_theta = delta_theta
        self.dynamic = dynamic
        self.geometric = geometric
        self.J0 = J0
        self.t_star = t_star
        self.tolerance = tolerance
        self.error = error
        self.diagnostics = diagnostics
        self.residual = wrap(delta_theta - (dynamic + geometric.total) / J0)

    @property
    def passed(self):
        return abs(self.residual) <= self.tolerance

    def as_dict(self):
        return {
            "t_star": self.t_star,
            "J0": self.J0,
            "delta_theta": self.delta_theta,
            "dynamic_phase": self.dynamic,
            "geometric_phase": self.geometric.total,
            "geometric_line_integral": self.geometric.line,
            "shape_term": self.geometric.shape_term,
            "fibre_term": self.geometric.fibre_term,
            "branch_crossings": self.geometric.branch_crossings,
            "pole_term": self.geometric.pole_term,
            "residual": self.residual,
            "residual_error": self.error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "diagnostics": dict(self.diagnostics),
        }


def reconstruct(
    otr,
    t_star,
    J0=None,
    tolerance=1e-5,
    similarity_tolerance=1e-6,
    shape_tolerance=1e-6,
    closure="north",
    flip_beta=False,
):
    """
    Checks the reconstruction formula on [0, t_star]

    :param otr: Oriented trajectory
    :param t_star: Shape return time
    :param J0: Angular momentum (the initial one of the motion by default)
    :param tolerance: Residual accepted as a pass
    :param closure: Pole used to close the reduced loop
    :param flip_beta: Use the negated primitive (self-test of the checks)
    :rtype: phase_report
    :raise ZeroAngularMomentum: if J0 = 0
    """
    if J0 is None:
        J0 = otr.trajectory.momentum[0]
    J0 = np.asarray(J0, dtype=float)
    J = float(np.linalg.norm(J0))
    if J == 0:
        raise ZeroAngularMomentum(
            "Reconstruction divides by |J0|; use a holonomy run for J0 = 0"
        )
    if not 0 < t_star <= otr.t[-1] + 1e-12:
        raise PreconditionViolated("Return time %.17g outside the motion" % t_star)
    segment = otr.truncated(t_star)
    m = otr.masses

    rotation = measure_total_rotation(
        segment.oriented(0), segment.oriented(-1), m, J0, similarity_tolerance, closure
    )
    dynamic, dynamic_error = connection_gauge.dynamic_phase(segment, J0)
    gt = connection_gauge.eigenframe_track(segment, J0)
    loop = close_reduced_loop(gt, shape_tolerance, closure)
    geometric = geometric_phase_line(loop, flip=flip_beta)
    energy_drift, momentum_drift = segment.trajectory.drift()
    diagnostics = {
        "similarity_residual": rotation.residual,
        "similarity_scale": rotation.scale,
        "shape_gap": loop.shape_gap,
        "arc_start": loop.arc_start,
        "arc_end": loop.arc_end,
        "closure": closure,
        "dynamic_error": dynamic_error,
        "geometric_error": geometric.error,
        "frame_continuity_min": float(np.min(gt.continuity)) if len(gt) > 1 else 1.0,
        "eigenvalue_gap_min": float(np.min(gt.gap)),
        "theta2_frozen_samples": gt.frozen,
        "frame_refined_intervals": gt.refined,
        "frame_unresolved_intervals": gt.unresolved,
        "energy_drift": energy_drift,
        "momentum_drift": momentum_drift,
        "samples": len(segment),
    }
    error = (dynamic_error + geometric.error) / J + rotation.residual
    report = phase_report(
        rotation.angle, dynamic, geometric, J, float(t_star), tolerance, error, diagnostics
    )
    logger.info(
        "Reconstruction at t = %.12g: delta_theta %.12g, residual %.3g",
        t_star,
        report.delta_theta,
        report.residual,
    )
    return report


class holonomy_result:
    """
    Holonomy of a horizontal lift against the curvature prediction

    :ivar measured: Rotation between the ends of the lift
    :ivar predicted: wrap of (z1 - 1) dtheta1 / 2 integrated around the loop
    :ivar raw_predicted: The unreduced integral
    :ivar residual: wrap(measured - predicted)
    :ivar path: The horizontal path
    """

    def __init__(self, measured, raw_predicted, path, tolerance=1e-6):
        self.measured = measured
        self.raw_predicted = raw_predicted
        self.predicted = wrap(raw_predicted)
        self.residual = wrap(measured - raw_predicted)
        self.path = path
        self.tolerance = tolerance

    @property
    def passed(self):
        return abs(self.residual) <= self.tolerance

    def as_dict(self):
        return {
            "measured": self.measured,
            "predicted": self.predicted,
            "raw_predicted": self.raw_predicted,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_angular_momentum": self.path.max_angular_momentum,
        }


def holonomy_check(curve, q_start, m, tolerance=1e-6):
    """
    Compares the holonomy of a horizontal lift with its curvature prediction

    :param curve: Closed shape curve
    :param q_start: Planar configuration in the xy-plane with shape curve(0)
    :param m: Masses
    :rtype: holonomy_result
    """
    m = np.asarray(m, dtype=float)
    path = connection_gauge.horizontal_lift(curve, q_start, m)
    measured = rigid_algebra.planar_rotation_angle(path.start, path.end, m)

    def integrand(t):
        values = []
        for x in np.atleast_1d(t):
            z1, _, dtheta1 = curve.rates(x)
            values.append(0.5 * (z1 - 1) * dtheta1)
        return np.array(values)

    predicted, _ = quadrature.composite(integrand, curve.breakpoints)
    result = holonomy_result(measured, predicted, path, tolerance)
    logger.info(
        "Holonomy: measured %.12g, predicted %.12g, residual %.3g",
        measured,
        result.predicted,
        result.residual,
    )
    return result
