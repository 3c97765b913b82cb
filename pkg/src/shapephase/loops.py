"""
Closed curves on the shape sphere used for holonomy runs.

A curve is parametrised over [0, period] and gives points p(t) on the unit
sphere (twice the radius-1/2 shape vector) together with dp/dt. Shape angles
follow as z1 = p_z and theta1 = atan2(p_y, p_x).
"""

import logging
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import PreconditionViolated

logger = logging.getLogger(__name__)


def unit_vector(z1, theta1):
    rho = math.sqrt(max(0.0, 1 - z1 * z1))
    return np.array([rho * math.cos(theta1), rho * math.sin(theta1), z1])


class shape_curve:
    """
    Base class of closed shape curves

    :ivar period: Parameter length of one traversal
    :ivar breakpoints: Parameter values where the curve may have corners
    """

    period = 1.0

    @property
    def breakpoints(self):
        return [0.0, self.period]

    def point(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def rates(self, t):
        """
        (z1, dz1/dt, dtheta1/dt) at parameter t

        :raise PreconditionViolated: at the poles, where theta1 is undefined
        """
        p = self.point(t)
        dp = self.derivative(t)
        rho2 = p[0] ** 2 + p[1] ** 2
        if rho2 == 0:
            raise PreconditionViolated("Shape curve passes through a pole at t = %g" % t)
        return p[2], dp[2], (p[0] * dp[1] - p[1] * dp[0]) / rho2

    @property
    def theta1_start(self):
        p = self.point(0.0)
        return math.atan2(p[1], p[0])


class latitude(shape_curve):
    """
    Circle of constant height z1, traversed ``turns`` times

    Negative ``turns`` traverse the circle with decreasing theta1.
    """

    def __init__(self, z1, turns=1, theta0=0.0):
        if not -1 < z1 < 1:
            raise PreconditionViolated("Latitude height must lie in (-1, 1), got %r" % z1)
        if turns == 0:
            raise PreconditionViolated("A latitude loop needs a nonzero number of turns")
        self.z1 = float(z1)
        self.rho = math.sqrt(1 - z1 * z1)
        self.direction = 1.0 if turns > 0 else -1.0
        self.period = 2 * math.pi * abs(turns)
        self.theta0 = float(theta0)

    def point(self, t):
        angle = self.theta0 + self.direction * t
        return np.array([self.rho * math.cos(angle), self.rho * math.sin(angle), self.z1])

    def derivative(self, t):
        angle = self.theta0 + self.direction * t
        return self.direction * np.array(
            [-self.rho * math.sin(angle), self.rho * math.cos(angle), 0.0]
        )


class constant(shape_curve):
    """The constant loop."""

    def __init__(self, z1, theta1=0.0):
        self.p = unit_vector(z1, theta1)

    def point(self, t):
        return self.p.copy()

    def derivative(self, t):
        return np.zeros(3)


class polygon(shape_curve):
    """
    Closed geodesic polygon

    Each edge is a great-circle arc traversed in unit parameter time.

    :param vertices: Sequence of (z1, theta1) pairs; the polygon closes itself
    """

    def __init__(self, vertices):
        if len(vertices) < 2:
            raise PreconditionViolated("A polygon needs at least two vertices")
        self.vertices = [unit_vector(z1, theta1) for z1, theta1 in vertices]
        self.period = float(len(self.vertices))
        self._arcs = []
        for k, a in enumerate(self.vertices):
            b = self.vertices[(k + 1) % len(self.vertices)]
            angle = math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b))
            if math.pi - angle < 1e-12:
                raise PreconditionViolated("Polygon edge %d joins antipodal points" % k)
            self._arcs.append((a, b, angle))

    @property
    def breakpoints(self):
        return [float(k) for k in range(len(self.vertices) + 1)]

    def _edge(self, t):
        k = min(int(math.floor(t)), len(self._arcs) - 1)
        return self._arcs[k], t - k

    def point(self, t):
        (a, b, angle), s = self._edge(t)
        if angle == 0:
            return a.copy()
        return (math.sin((1 - s) * angle) * a + math.sin(s * angle) * b) / math.sin(angle)

    def derivative(self, t):
        (a, b, angle), s = self._edge(t)
        if angle == 0:
            return np.zeros(3)
        return angle * (
            -math.cos((1 - s) * angle) * a + math.cos(s * angle) * b
        ) / math.sin(angle)


class sampled(shape_curve):
    """
    Periodic cubic spline through sampled points, projected onto the sphere

    :param points: (N, 3) points on the unit sphere; a repeated final point is
        dropped
    """

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or len(points) < 3:
            raise PreconditionViolated("A sampled loop needs at least three 3-vectors")
        if np.allclose(points[0], points[-1]):
            points = points[:-1]
        points = points / np.linalg.norm(points, axis=1)[:, None]
        self.period = float(len(points))
        knots = np.arange(len(points) + 1, dtype=float)
        self._spline = CubicSpline(
            knots, np.vstack([points, points[:1]]), bc_type="periodic", axis=0
        )
        self._velocity = self._spline.derivative()

    @classmethod
    def from_file(cls, file_name):
        """
        Reads a loop from a whitespace-separated text file

        Two columns are read as (z1, theta1), three as unit-sphere points.
        """
        data = np.atleast_2d(np.loadtxt(file_name))
        if data.shape[1] == 2:
            data = np.array([unit_vector(z1, theta1) for z1, theta1 in data])
        return cls(data)

    def point(self, t):
        c = self._spline(t)
        return c / np.linalg.norm(c)

    def derivative(self, t):
        c = self._spline(t)
        length = np.linalg.norm(c)
        p = c / length
        dc = self._velocity(t)
        return (dc - (p @ dc) * p) / length
