"""
Weighted-triangle geometry.

A configuration is a (3, 3) array whose rows q_1, q_2, q_3 are the body
positions; masses are a (3,) array. The functions accept stacks of
configurations with shape (..., 3, 3) wherever that makes sense, so that
whole trajectories can be processed in one call.

Natural units are used throughout: the gravitational constant is 1.
"""

import logging

import numpy as np

from .errors import BinaryCollision, PreconditionViolated, TripleCollision

logger = logging.getLogger(__name__)

# smallest inertia eigenvalue over I below which a triangle counts as collinear
collinear_threshold = 1e-10

_pairs = ((0, 1), (0, 2), (1, 2))


def as_masses(m):
    """
    Validates masses

    :param m: Three positive numbers
    :rtype: numpy.ndarray
    :raise PreconditionViolated: if a mass is not positive
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3,):
        raise PreconditionViolated("Exactly three masses required, got %s" % (m,))
    if not np.all(m > 0):
        raise PreconditionViolated("Masses must be positive, got %s" % (m,))
    return m


class state:
    """
    Positions and velocities of the three bodies

    :ivar q: (3, 3) positions, one body per row
    :ivar v: (3, 3) velocities
    """

    __slots__ = ["q", "v"]

    def __init__(self, q, v):
        self.q = np.array(q, dtype=float)
        self.v = np.array(v, dtype=float)
        if self.q.shape != (3, 3) or self.v.shape != (3, 3):
            raise PreconditionViolated(
                "State needs (3, 3) positions and velocities, got %s and %s"
                % (self.q.shape, self.v.shape)
            )

    def copy(self):
        return state(self.q.copy(), self.v.copy())

    def as_vector(self):
        """Flat 18-vector (positions first) as used by the integrators."""
        return np.concatenate([self.q.ravel(), self.v.ravel()])

    @classmethod
    def from_vector(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(y[:9].reshape(3, 3), y[9:].reshape(3, 3))

    def __repr__(self):
        return "state(q=%s, v=%s)" % (self.q.tolist(), self.v.tolist())


class oriented_configuration:
    """
    A configuration together with a unit normal to its plane

    :ivar q: (3, 3) centred positions
    :ivar n: Unit normal
    """

    __slots__ = ["q", "n"]

    def __init__(self, q, n, tolerance=1e-10):
        self.q = np.array(q, dtype=float)
        n = np.array(n, dtype=float)
        norm = np.linalg.norm(n)
        if abs(norm - 1) > 1e-12:
            n = n / norm
        scale = max(np.sqrt(np.max(np.sum(self.q * self.q, axis=1))), 1.0)
        if np.max(np.abs(self.q @ n)) > tolerance * scale:
            raise PreconditionViolated("Normal is not orthogonal to the triangle")
        self.n = n

    def flipped(self):
        return oriented_configuration(self.q, -self.n)


class potential_spec:
    """
    Pairwise potential V = -sgn(k) sum_{i<j} m_i m_j r_ij^(-k)

    ``newtonian`` is the power law with k = 1. k = 0 gives a constant
    potential, k = -2 the attractive harmonic potential.

    :ivar kind: ``newtonian`` or ``power_law``
    :ivar exponent: k (power law only)
    :ivar softening: Softening length; distances enter as sqrt(r^2 + eps^2)
    :ivar collision_floor: Pairwise distance below which BinaryCollision is raised
    """

    __slots__ = ["kind", "exponent", "softening", "collision_floor"]

    def __init__(self, kind="newtonian", exponent=1.0, softening=0.0, collision_floor=1e-12):
        if kind not in ("newtonian", "power_law"):
            raise PreconditionViolated("Unknown potential kind: %s" % kind)
        if softening < 0:
            raise PreconditionViolated("Softening must be non-negative")
        self.kind = kind
        self.exponent = 1.0 if kind == "newtonian" else float(exponent)
        self.softening = float(softening)
        self.collision_floor = float(collision_floor)

    def __repr__(self):
        return "potential_spec(kind=%r, exponent=%r, softening=%r)" % (
            self.kind,
            self.exponent,
            self.softening,
        )


newtonian = potential_spec()


def center(q_raw, m):
    """
    Moves the centre of mass to the origin

    :param q_raw: Three 3-vectors
    :param m: Masses
    :return: Centred configuration
    """
    q_raw = np.asarray(q_raw, dtype=float)
    m = np.asarray(m, dtype=float)
    return q_raw - (m @ q_raw) / np.sum(m)


def polar_moment(q, m):
    """
    I = sum_a m_a |q_a|^2

    :param q: Configuration(s), shape (..., 3, 3)
    :param m: Masses
    """
    q = np.asarray(q, dtype=float)
    return np.einsum("a,...ai,...ai->...", np.asarray(m, dtype=float), q, q)


def second_moment(q, m):
    """M = sum_a m_a q_a q_a^T"""
    q = np.asarray(q, dtype=float)
    return np.einsum("a,...ai,...aj->...ij", np.asarray(m, dtype=float), q, q)


def inertia_tensor(q, m):
    """
    Inertia tensor 1*I - M, so that w.II(q)w = sum_a m_a |w x q_a|^2

    :param q: Configuration(s), shape (..., 3, 3)
    :param m: Masses
    :return: Symmetric (..., 3, 3) array
    """
    M = second_moment(q, m)
    I = np.trace(M, axis1=-2, axis2=-1)
    return I[..., None, None] * np.eye(3) - M


def collinearity(q, m):
    """
    Smallest inertia eigenvalue divided by I; 0 for collinear triangles

    The triple collision also returns 0.
    """
    q = np.asarray(q, dtype=float)
    I = polar_moment(q, m)
    if I == 0:
        return 0.0
    return float(np.linalg.eigvalsh(inertia_tensor(q, m))[0] / I)


def angular_momentum(s, m):
    """
    J = sum_a m_a q_a x v_a

    :param s: State
    :param m: Masses
    """
    return angular_momentum_qv(s.q, s.v, m)


def angular_momentum_qv(q, v, m):
    """Angular momentum of positions/velocities stacks of shape (..., 3, 3)."""
    return np.einsum("a,...ai->...i", np.asarray(m, dtype=float), np.cross(q, v))


def kinetic_energy(s, m):
    """K = 1/2 sum_a m_a |v_a|^2"""
    v = np.asarray(s.v, dtype=float)
    return 0.5 * float(np.einsum("a,ai,ai->", np.asarray(m, dtype=float), v, v))


def pair_distances(q):
    """Distances |q_1 - q_2|, |q_1 - q_3|, |q_2 - q_3| of (..., 3, 3) stacks."""
    q = np.asarray(q, dtype=float)
    return np.stack(
        [np.linalg.norm(q[..., i, :] - q[..., j, :], axis=-1) for i, j in _pairs],
        axis=-1,
    )


def check_binary_collision(q, spec):
    r = pair_distances(q)
    if np.min(r) < spec.collision_floor:
        i, j = _pairs[int(np.argmin(r))]
        raise BinaryCollision(
            "Bodies %d and %d collide (distance %.3g)" % (i + 1, j + 1, np.min(r))
        )
    return r


def potential_energy(q, m, spec=newtonian):
    """
    Pairwise potential energy, each pair counted once

    :param q: Configuration
    :param m: Masses
    :param spec: Potential specification (Newtonian by default)
    :raise BinaryCollision: if two bodies are closer than the collision floor
    """
    m = np.asarray(m, dtype=float)
    r = check_binary_collision(q, spec)
    k = spec.exponent
    if k == 0:
        return 0.0
    r_eff = np.sqrt(r * r + spec.softening**2)
    products = np.array([m[i] * m[j] for i, j in _pairs])
    return float(-np.sign(k) * np.sum(products * r_eff ** (-k)))


def total_energy(s, m, spec=newtonian):
    return kinetic_energy(s, m) + potential_energy(s.q, m, spec)


def oriented_area(oq):
    """
    Signed area 1/2 n.(q2 - q1) x (q3 - q1)

    :param oq: Oriented configuration
    """
    q = oq.q
    return 0.5 * float(oq.n @ np.cross(q[1] - q[0], q[2] - q[0]))


def principal_normal(q, m=None, threshold=collinear_threshold):
    """
    Unit normal to the plane of the triangle

    The normal is oriented so that the labelled triangle (1, 2, 3) has positive
    area.

    :param q: Configuration
    :param m: Masses for the collinearity measure (unit masses if omitted)
    :param threshold: Collinearity threshold
    :return: Unit 3-vector, or None for a collinear triangle
    :raise TripleCollision: if I = 0
    """
    q = np.asarray(q, dtype=float)
    if m is None:
        m = np.ones(3)
    if polar_moment(q, m) == 0:
        raise TripleCollision("Normal undefined at the triple collision")
    if collinearity(q, m) < threshold:
        return None
    normal = np.cross(q[1] - q[0], q[2] - q[0])
    return normal / np.linalg.norm(normal)
