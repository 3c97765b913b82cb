"""
Jacobi coordinates and the map from oriented triangles to the shape sphere.

The shape sphere has radius one half: a normalised shape point w satisfies
|w| = 1/2, z1 = 2 w3 is the height (0 on the collinear equator) and theta1 the
azimuth. The Jacobi grouping is fixed to (1, 3 | 2):

    xi1 = q1 - q3
    xi2 = q2 - (m1 q1 + m3 q3) / (m1 + m3)

and zeta_i = sqrt(mu_i) xi_i with 1/mu1 = 1/m1 + 1/m3,
1/mu2 = 1/(m1 + m3) + 1/m2. Other groupings rotate the sphere.
"""

import logging
import math

import numpy as np

from . import triangle_core
from .errors import PreconditionViolated, TripleCollision

logger = logging.getLogger(__name__)


def reduced_masses(m):
    m1, m2, m3 = np.asarray(m, dtype=float)
    mu1 = 1.0 / (1.0 / m1 + 1.0 / m3)
    mu2 = 1.0 / (1.0 / (m1 + m3) + 1.0 / m2)
    return mu1, mu2


class jacobi_vectors:
    """
    Normalised Jacobi vectors

    The vectors may carry leading axes, e.g. shape (N, 3) along a trajectory.
    """

    __slots__ = ["zeta1", "zeta2", "mu1", "mu2"]

    def __init__(self, zeta1, zeta2, mu1, mu2):
        self.zeta1 = np.asarray(zeta1, dtype=float)
        self.zeta2 = np.asarray(zeta2, dtype=float)
        self.mu1 = mu1
        self.mu2 = mu2

    def norm_squared(self):
        return np.sum(self.zeta1**2, axis=-1) + np.sum(self.zeta2**2, axis=-1)


def jacobi(q, m):
    """
    Jacobi vectors of a configuration (or of a velocity, by linearity)

    :param q: (..., 3, 3) positions, one body per row
    :param m: Masses
    :rtype: jacobi_vectors
    """
    q = np.asarray(q, dtype=float)
    m1, _, m3 = np.asarray(m, dtype=float)
    mu1, mu2 = reduced_masses(m)
    xi1 = q[..., 0, :] - q[..., 2, :]
    xi2 = q[..., 1, :] - (m1 * q[..., 0, :] + m3 * q[..., 2, :]) / (m1 + m3)
    return jacobi_vectors(math.sqrt(mu1) * xi1, math.sqrt(mu2) * xi2, mu1, mu2)


def configuration_from_jacobi(zeta1, zeta2, m):
    """
    Centred configuration with the given Jacobi vectors

    Inverse of :func:`jacobi` on centre-of-mass-free configurations.
    """
    m1, m2, m3 = np.asarray(m, dtype=float)
    total = m1 + m2 + m3
    mu1, mu2 = reduced_masses(m)
    xi1 = np.asarray(zeta1, dtype=float) / math.sqrt(mu1)
    xi2 = np.asarray(zeta2, dtype=float) / math.sqrt(mu2)
    centre13 = -m2 * xi2 / total
    q2 = xi2 * (m1 + m3) / total
    q1 = centre13 + m3 / (m1 + m3) * xi1
    q3 = centre13 - m1 / (m1 + m3) * xi1
    return np.stack([q1, q2, q3], axis=-2)


class shape_point:
    """
    Point on the radius-1/2 shape sphere

    :ivar w: Normalised shape vector, |w| = 1/2
    """

    __slots__ = ["w"]

    def __init__(self, w):
        self.w = np.asarray(w, dtype=float)

    @property
    def z1(self):
        return float(np.clip(2 * self.w[2], -1.0, 1.0))

    @property
    def theta1(self):
        return math.atan2(self.w[1], self.w[0])

    @property
    def unit(self):
        """The point scaled onto the unit sphere."""
        return 2 * self.w

    @classmethod
    def from_angles(cls, z1, theta1):
        rho = math.sqrt(max(0.0, 1 - z1 * z1))
        return cls(0.5 * np.array([rho * math.cos(theta1), rho * math.sin(theta1), z1]))

    def __repr__(self):
        return "shape_point(z1=%.12g, theta1=%.12g)" % (self.z1, self.theta1)


def raw_shape_vectors(jv, n):
    """
    Unnormalised shape vectors of (stacked) Jacobi vectors

    w1 = (|zeta1|^2 - |zeta2|^2) / 2, w2 = zeta1.zeta2, w3 = n.(zeta1 x zeta2)
    """
    z1, z2 = jv.zeta1, jv.zeta2
    n = np.asarray(n, dtype=float)
    w1 = 0.5 * (np.sum(z1 * z1, axis=-1) - np.sum(z2 * z2, axis=-1))
    w2 = np.sum(z1 * z2, axis=-1)
    w3 = np.sum(n * np.cross(z1, z2), axis=-1)
    return np.stack([w1, w2, w3], axis=-1)


def hopf_map(jv, n, I):
    """
    Shape point of an oriented configuration

    For a configuration in the xy-plane with n = e3, w2 + i w3 is the complex
    product conj(zeta1) zeta2. Dot and cross products extend this to
    configurations in any plane.

    :param jv: Jacobi vectors
    :param n: Unit normal of the oriented configuration
    :param I: Polar moment of inertia
    :rtype: shape_point
    :raise TripleCollision: if I = 0
    """
    if I == 0:
        raise TripleCollision("Shape undefined at the triple collision")
    return shape_point(raw_shape_vectors(jv, n) / I)


def shape_of(q, n, m):
    """Shape point of configuration q oriented by n."""
    return hopf_map(jacobi(q, m), n, triangle_core.polar_moment(q, m))


def shape_series(q, n, m):
    """
    Normalised shape vectors along a trajectory

    :param q: (N, 3, 3) configurations
    :param n: (N, 3) unit normals
    :param m: Masses
    :return: (N, 3) array of w with |w| = 1/2
    """
    I = triangle_core.polar_moment(q, m)
    if np.any(I == 0):
        raise TripleCollision("Shape undefined at the triple collision")
    return raw_shape_vectors(jacobi(q, m), n) / I[:, None]


def shape_distance(s1, s2):
    """
    Great-circle distance on the radius-1/2 sphere

    Antipodal points are pi/2 apart.
    """
    return float(chord_distance(s1.w, s2.w))


def chord_distance(w1, w2):
    """
    Vectorised :func:`shape_distance` on raw (..., 3) shape vectors

    Computed from the chord, which stays accurate for nearby points.
    """
    chord = np.linalg.norm(2 * (np.asarray(w1) - np.asarray(w2)), axis=-1)
    return np.arcsin(np.clip(chord / 2, 0.0, 1.0))


def orientation_flip(s):
    """
    Reflection about the equator

    Shape of the same triangle with the opposite orientation.
    """
    return shape_point(s.w * np.array([1.0, 1.0, -1.0]))


def section_configuration(z1, theta1, m, I=1.0):
    """
    Planar configuration with a given shape

    The configuration lies in the xy-plane, is oriented by e3 and is the value
    of the local section whose Jacobi vectors u = zeta1 + i zeta2 and
    v = zeta1 - i zeta2 (as complex numbers) have arguments theta1/2 and
    -theta1/2. The section is double valued around the poles: continuing it
    once around in theta1 rotates the triangle by pi.

    :param z1: Height on the shape sphere, in [-1, 1]
    :param theta1: Azimuth
    :param m: Masses
    :param I: Polar moment of the result
    :return: (3, 3) configuration
    """
    if not -1 <= z1 <= 1:
        raise PreconditionViolated("Shape height z1 = %.17g outside [-1, 1]" % z1)
    u = math.sqrt(I * (1 - z1)) * complex(math.cos(theta1 / 2), math.sin(theta1 / 2))
    v = math.sqrt(I * (1 + z1)) * complex(math.cos(theta1 / 2), -math.sin(theta1 / 2))
    zeta1 = (u + v) / 2
    zeta2 = (u - v) / 2j
    return configuration_from_jacobi(
        np.array([zeta1.real, zeta1.imag, 0.0]),
        np.array([zeta2.real, zeta2.imag, 0.0]),
        m,
    )


def section_state(z1, theta1, dz1, dtheta1, m, I=1.0):
    """
    Configuration and velocity of the section along a moving shape

    :param z1: Height, strictly inside (-1, 1)
    :param theta1: Azimuth, continued without wrapping along the motion
    :param dz1: Rate of change of z1
    :param dtheta1: Rate of change of theta1
    :return: (q, v), both (3, 3)
    """
    if not -1 < z1 < 1:
        raise PreconditionViolated("Section velocity undefined at the poles (z1 = %.17g)" % z1)
    half = complex(math.cos(theta1 / 2), math.sin(theta1 / 2))
    u = math.sqrt(I * (1 - z1)) * half
    v = math.sqrt(I * (1 + z1)) * half.conjugate()
    du = u * complex(-dz1 / (2 * (1 - z1)), dtheta1 / 2)
    dv = v * complex(dz1 / (2 * (1 + z1)), -dtheta1 / 2)

    def planar(zeta):
        return np.array([zeta.real, zeta.imag, 0.0])

    q = configuration_from_jacobi(planar((u + v) / 2), planar((u - v) / 2j), m)
    velocity = configuration_from_jacobi(planar((du + dv) / 2), planar((du - dv) / 2j), m)
    return q, velocity


def submersion_speed_check(s, m, tolerance=1e-8):
    """
    Speed of the horizontal part of a planar velocity and of its shape

    The rotation about the normal (the vertical part) is removed before
    measuring. The quotient metric makes the shape sphere a round sphere of
    radius 1/2, so the two returned speeds agree.

    :param s: Planar state with I = 1 and dI/dt = 0
    :param m: Masses
    :param tolerance: Tolerance of the precondition checks
    :return: (horizontal speed, shape speed)
    :raise PreconditionViolated: if the state is not of that kind
    """
    m = np.asarray(m, dtype=float)
    q, v = s.q, s.v
    normal = triangle_core.principal_normal(q, m)
    if normal is None:
        normal = np.array([0.0, 0.0, 1.0])
    if np.max(np.abs(np.concatenate([q @ normal, v @ normal]))) > tolerance:
        raise PreconditionViolated("State is not planar")
    I = triangle_core.polar_moment(q, m)
    if abs(I - 1) > tolerance:
        raise PreconditionViolated("State must have I = 1, got %.17g" % I)
    if abs(float(np.sum(m * np.sum(q * v, axis=1)))) > tolerance:
        raise PreconditionViolated("State must have dI/dt = 0")
    # the normal is an inertia eigenvector with eigenvalue I
    spin = float(triangle_core.angular_momentum(s, m) @ normal) / I
    v = v - spin * np.cross(normal, q)

    jq, jv = jacobi(q, m), jacobi(v, m)
    a, b = jq.zeta1, jq.zeta2
    da, db = jv.zeta1, jv.zeta2
    dw = np.array(
        [
            a @ da - b @ db,
            da @ b + a @ db,
            normal @ (np.cross(da, b) + np.cross(a, db)),
        ]
    )
    horizontal = math.sqrt(float(np.sum(m * np.sum(v * v, axis=1))))
    return horizontal, float(np.linalg.norm(dw))
