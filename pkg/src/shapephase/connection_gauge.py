"""
The mechanical connection and the inertia eigenframe gauge.

The connection assigns to a velocity the angular velocity
A = II(q)^-1 J(q, v). Its component along a fixed angular momentum J0 gives
the one-form alpha_J0; along the actual motion it is
omega_J0 = J0^T II(q)^-1 J0, the integrand of the dynamic phase.

Fibre coordinates (z2, theta2) are the body-frame coordinates of J0 in the
frame (U1, U2, n) diagonalising the in-plane inertia block.
"""

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from . import quadrature, rigid_algebra, shape_space, triangle_core
from .errors import (
    EigenframeDegenerate,
    GaugeDegenerate,
    LiftStepFailure,
    PreconditionViolated,
    TripleCollision,
    UndefinedAtCollinear,
    ZeroAngularMomentum,
)

logger = logging.getLogger(__name__)

# eigenvalues of II below floor * I are treated as zero
pseudo_inverse_floor = 1e-12


def _spectrum(q, m):
    I = triangle_core.polar_moment(q, m)
    if np.any(I == 0):
        raise TripleCollision("Connection undefined at the triple collision")
    eigenvalues, eigenvectors = np.linalg.eigh(triangle_core.inertia_tensor(q, m))
    return I, eigenvalues, eigenvectors


def _inverse_eigenvalues(I, eigenvalues):
    floor = pseudo_inverse_floor * np.asarray(I)[..., None]
    keep = eigenvalues > floor
    return np.where(keep, 1.0 / np.where(keep, eigenvalues, 1.0), 0.0)


def connection_value(s, m):
    """
    Angular velocity II^-1 J of a state

    At collinear configurations the pseudo-inverse is used; J is then
    orthogonal to the line, so the result is the limit from nearby triangles.

    :param s: State
    :param m: Masses
    :return: 3-vector
    :raise TripleCollision: if I = 0
    """
    I, eigenvalues, eigenvectors = _spectrum(s.q, m)
    J = triangle_core.angular_momentum(s, m)
    return eigenvectors @ (_inverse_eigenvalues(I, eigenvalues) * (eigenvectors.T @ J))


def alpha_J0(s, m, J0):
    """J0 . A(s), the connection component along J0."""
    return float(np.dot(J0, connection_value(s, m)))


def alpha_series(q, v, m, J0):
    """alpha_J0 for stacks of positions and velocities of shape (N, 3, 3)."""
    I, eigenvalues, eigenvectors = _spectrum(q, m)
    J = triangle_core.angular_momentum_qv(q, v, m)
    inverse = _inverse_eigenvalues(I, eigenvalues)
    along_J = np.einsum("...ij,...i->...j", eigenvectors, J)
    along_J0 = np.einsum("...ij,i->...j", eigenvectors, np.asarray(J0, dtype=float))
    return np.sum(inverse * along_J * along_J0, axis=-1)


def omega_series(q, m, J0, tolerance=1e-8):
    """
    J0^T II(q)^-1 J0 for one configuration or a (N, 3, 3) stack

    :raise UndefinedAtCollinear: if J0 has a component along a collinear line
    """
    J0 = np.asarray(J0, dtype=float)
    I, eigenvalues, eigenvectors = _spectrum(q, m)
    inverse = _inverse_eigenvalues(I, eigenvalues)
    components = np.einsum("...ij,i->...j", eigenvectors, J0)
    null = inverse == 0
    if np.any(np.abs(components[null]) > tolerance * max(np.linalg.norm(J0), 1e-300)):
        raise UndefinedAtCollinear(
            "omega_J0 undefined: J0 has a component along the collinear axis"
        )
    return np.sum(inverse * components * components, axis=-1)


def omega_J0(q, m, J0):
    """
    Instantaneous angular velocity integrand J0^T II(q)^-1 J0

    For a planar triangle with J0 along its normal this is |J0|^2 / I.

    :param q: Configuration
    :param m: Masses
    :param J0: Angular momentum
    :rtype: float
    :raise TripleCollision: if I = 0
    :raise UndefinedAtCollinear: if q is collinear and J0 is not orthogonal to it
    """
    return float(omega_series(np.asarray(q, dtype=float), m, J0))


def dynamic_phase(otr, J0, tolerance=quadrature.epsabs):
    """
    Integral of omega_J0 over the motion

    The sample intervals are integrated together on the dense motion.

    :param otr: Oriented trajectory (or plain trajectory)
    :param J0: Angular momentum of the motion
    :param tolerance: Absolute quadrature error goal
    :return: (value, quadrature error estimate)
    :raise QuadratureFailure: if the error goal cannot be met
    """
    tr = getattr(otr, "trajectory", otr)
    m = tr.masses

    def integrand(t):
        q, _ = tr.evaluate(t)
        return omega_series(q, m, J0)

    value, error = quadrature.composite(integrand, tr.t, epsabs=tolerance)
    logger.debug("Dynamic phase %.17g (error %.3g)", value, error)
    return value, error


class body_frame:
    """
    Inertia eigenframe of an oriented triangle

    :ivar U: (3, 3) array whose rows are U1, U2, U3 = n
    :ivar eigenvalues: In-plane eigenvalues (lambda1, lambda2), lambda1 <= lambda2
    """

    __slots__ = ["U", "eigenvalues"]

    def __init__(self, U, eigenvalues):
        self.U = np.asarray(U, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)

    @property
    def U1(self):
        return self.U[0]

    @property
    def U2(self):
        return self.U[1]

    @property
    def U3(self):
        return self.U[2]


class gauge_trajectory:
    """
    Reduced coordinates (z1, theta1, z2, theta2) along a motion

    Angles are continued without wrapping.

    :ivar t: (N,) times
    :ivar z1: (N,) shape heights
    :ivar theta1: (N,) shape azimuths
    :ivar z2: (N,) J0.n / |J0|
    :ivar theta2: (N,) azimuth of J0 in the eigenframe
    :ivar frames: (N, 3, 3) eigenframes, rows U1, U2, n
    :ivar eigenvalues: (N, 2) in-plane eigenvalues
    :ivar continuity: (N - 1,) products U1(t_k+1).U1(t_k)
    :ivar gap: (N,) relative in-plane eigenvalue gap
    :ivar J0: Angular momentum vector
    :ivar frozen: Number of samples with theta2 frozen (J0 along n)
    :ivar refined: Sample intervals whose frame sign was carried through
        dense intermediate frames
    :ivar unresolved: Refined intervals still turning too fast at the
        deepest refinement
    :ivar motion: The oriented trajectory the coordinates were taken from
    """

    def __init__(
        self,
        t,
        z1,
        theta1,
        z2,
        theta2,
        frames,
        eigenvalues,
        J0,
        frozen=0,
        refined=0,
        unresolved=0,
        motion=None,
    ):
        self.t = np.asarray(t, dtype=float)
        self.z1 = np.asarray(z1, dtype=float)
        self.theta1 = np.asarray(theta1, dtype=float)
        self.z2 = np.asarray(z2, dtype=float)
        self.theta2 = np.asarray(theta2, dtype=float)
        self.frames = np.asarray(frames, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.J0 = np.asarray(J0, dtype=float)
        self.frozen = frozen
        self.refined = refined
        self.unresolved = unresolved
        self.motion = motion
        self.continuity = np.sum(self.frames[1:, 0] * self.frames[:-1, 0], axis=1)
        total = np.sum(self.eigenvalues, axis=1)
        self.gap = (self.eigenvalues[:, 1] - self.eigenvalues[:, 0]) / np.where(
            total > 0, total, 1.0
        )

    def __len__(self):
        return len(self.t)

    @property
    def J0_norm(self):
        return float(np.linalg.norm(self.J0))

    def frame(self, k):
        return body_frame(self.frames[k], self.eigenvalues[k])

    def reduced_point(self, k):
        return self.z1[k], self.theta1[k], self.z2[k], self.theta2[k]


def _plane_basis(n):
    reference = np.where(
        (np.abs(n[..., 0]) < 0.9)[..., None], np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    )
    b1 = reference - np.sum(reference * n, axis=-1)[..., None] * n
    b1 /= np.linalg.norm(b1, axis=-1)[..., None]
    return b1, np.cross(n, b1)


def in_plane_spectrum(inertia, n, degeneracy_floor=1e-8):
    """
    Eigenvectors of the inertia tensor in the plane of the triangle

    :param inertia: (K, 3, 3) inertia tensors
    :param n: (K, 3) unit normals
    :param degeneracy_floor: Gap below which, relative to I, the in-plane
        eigenvalues count as equal; U1 is then the fixed reference direction
        of :func:`_plane_basis`
    :return: (U1, eigenvalues, degenerate); U1 has an arbitrary sign
    """
    b1, b2 = _plane_basis(n)
    P = np.stack([b1, b2], axis=-1)
    block = np.einsum("nia,nij,njb->nab", P, inertia, P)
    eigenvalues, vectors = np.linalg.eigh(block)
    I = np.trace(inertia, axis1=-2, axis2=-1) / 2
    degenerate = eigenvalues[:, 1] - eigenvalues[:, 0] < degeneracy_floor * I
    U1 = np.einsum("nia,na->ni", P, vectors[:, :, 0])
    U1[degenerate] = b1[degenerate]
    return U1, eigenvalues, degenerate


def _dense_U1(otr, t, degeneracy_floor):
    q, _ = otr.trajectory.evaluate(np.atleast_1d(t))
    n = otr.normals_at(t, q)
    U1, _, degenerate = in_plane_spectrum(
        triangle_core.inertia_tensor(q, otr.masses), n, degeneracy_floor
    )
    return U1[0], bool(degenerate[0])


def _carry_sign(otr, t0, t1, u0, u1, depth, degeneracy_floor):
    """
    u1 with the sign continued from u0 through dense intermediate frames

    :return: (u1 with its sign fixed, whether the frame still turned by more
        than acos(0.9) between neighbouring evaluations)
    """
    if abs(u1 @ u0) >= 0.9 or depth == 0:
        return (u1 if u1 @ u0 >= 0 else -u1), abs(u1 @ u0) < 0.9
    middle = 0.5 * (t0 + t1)
    um, degenerate = _dense_U1(otr, middle, degeneracy_floor)
    if degenerate:
        return (u1 if u1 @ u0 >= 0 else -u1), True
    um, poor_left = _carry_sign(otr, t0, middle, u0, um, depth - 1, degeneracy_floor)
    u1, poor_right = _carry_sign(otr, middle, t1, um, u1, depth - 1, degeneracy_floor)
    return u1, poor_left or poor_right


def _hold(values, held):
    """Replaces values where held is set by the last value not held."""
    values = np.array(values, dtype=float)
    last = 0.0
    for k in range(len(values)):
        if held[k]:
            values[k] = last
        else:
            last = values[k]
    return values


def eigenframe_track(
    otr,
    J0=None,
    degeneracy_floor=1e-8,
    offset=0.0,
    freeze_floor=1e-8,
    max_refinement=12,
):
    """
    Fibre and shape coordinates along an oriented motion

    The in-plane eigenvector U1 of the smaller eigenvalue is continued by sign
    chaining, U2 = n x U1. Where the frame turns by more than acos(0.9)
    between samples the sign is carried through bisected dense frames.
    The eigenframe is undefined at the shape-sphere poles; there it is only
    needed, and the tracking only stops, while J0 has a component in the
    plane of the triangle.

    :param otr: Oriented trajectory
    :param J0: Angular momentum (the initial one of the motion by default)
    :param degeneracy_floor: Smallest allowed in-plane gap, relative to I
    :param offset: Constant rotation of the frame about n
    :param freeze_floor: theta2 is held when |J0 x n| / |J0| is below this
    :param max_refinement: Deepest bisection of a sample interval
    :rtype: gauge_trajectory
    :raise EigenframeDegenerate: near a double in-plane eigenvalue with J0
        out of the normal direction
    :raise ZeroAngularMomentum: if J0 = 0
    """
    if J0 is None:
        J0 = otr.trajectory.momentum[0]
    J0 = np.asarray(J0, dtype=float)
    J = np.linalg.norm(J0)
    if J == 0:
        raise ZeroAngularMomentum("Fibre coordinates need a nonzero angular momentum")
    m = otr.masses
    n = otr.n
    inertia = triangle_core.inertia_tensor(otr.q, m)
    U1, eigenvalues, degenerate = in_plane_spectrum(inertia, n, degeneracy_floor)
    frozen = np.linalg.norm(np.cross(n, J0), axis=1) / J < freeze_floor
    bad = np.nonzero(degenerate & ~frozen)[0]
    if len(bad):
        time = float(otr.t[bad[0]])
        raise EigenframeDegenerate(
            "In-plane inertia eigenvalues coincide near t = %.17g" % time, time
        )

    refined = 0
    unresolved = 0
    for k in range(1, len(U1)):
        if abs(U1[k] @ U1[k - 1]) < 0.9 and not (degenerate[k] or degenerate[k - 1]):
            U1[k], poor = _carry_sign(
                otr, otr.t[k - 1], otr.t[k], U1[k - 1], U1[k], max_refinement, degeneracy_floor
            )
            refined += 1
            unresolved += poor
        elif U1[k] @ U1[k - 1] < 0:
            U1[k] = -U1[k]
    if refined:
        logger.debug("Frame sign carried through dense frames on %d intervals", refined)
    if offset:
        U1 = math.cos(offset) * U1 + math.sin(offset) * np.cross(n, U1)
    U2 = np.cross(n, U1)

    z2 = np.clip((n @ J0) / J, -1.0, 1.0)
    theta2 = np.arctan2(U2 @ J0, U1 @ J0)
    if np.any(frozen):
        theta2 = _hold(theta2, frozen)
        logger.debug("theta2 frozen on %d samples (J0 along the normal)", int(np.sum(frozen)))
    theta2 = np.unwrap(theta2)

    w = otr.shapes()
    z1 = np.clip(2 * w[:, 2], -1.0, 1.0)
    # the azimuth is undefined at the poles
    theta1 = _hold(np.arctan2(w[:, 1], w[:, 0]), np.hypot(w[:, 0], w[:, 1]) < 1e-10)
    theta1 = np.unwrap(theta1)

    gt = gauge_trajectory(
        otr.t,
        z1,
        theta1,
        z2,
        theta2,
        np.stack([U1, U2, n], axis=1),
        eigenvalues,
        J0,
        frozen=int(np.sum(frozen)),
        refined=refined,
        unresolved=unresolved,
        motion=otr,
    )
    if unresolved:
        logger.warning(
            "Eigenframe turns faster than the dense motion resolves on %d sample intervals",
            unresolved,
        )
    return gt


def phase_densities(otr, t, J0, pole=1.0, degeneracy_floor=1e-8, freeze_floor=1e-8):
    """
    Rates of the reduced coordinates along the dense motion

    With c = n.J0 the shape part of beta is c z1 dtheta1 / 2. The fibre part
    J0 (z2 - pole) dtheta2 equals pole X / (J0 + pole c), where
    X = |n x J0|^2 Omega3 + c dn/dt.(n x J0) and Omega3 is the rate at which
    the eigenframe turns about n; it stays finite when J0 is along n, where
    theta2 itself is undefined.

    :param otr: Oriented trajectory
    :param t: Array of times
    :param J0: Angular momentum vector
    :param pole: +1 for the north closure, -1 for the south one
    :return: (3, len(t)) array of dtheta1/dt and the shape and fibre
        densities of beta
    :raise EigenframeDegenerate: at a double in-plane eigenvalue with J0 out
        of the normal direction
    :raise GaugeDegenerate: where J0 points to the pole opposite the closure
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    m = otr.masses
    J0 = np.asarray(J0, dtype=float)
    J = float(np.linalg.norm(J0))
    q, v = otr.trajectory.evaluate(t)
    q = q - np.einsum("a,kai->ki", m, q)[:, None] / np.sum(m)
    v = v - np.einsum("a,kai->ki", m, v)[:, None] / np.sum(m)
    n = otr.normals_at(t, q)

    position = shape_space.jacobi(q, m)
    velocity = shape_space.jacobi(v, m)
    a, b = position.zeta1, position.zeta2
    da, db = velocity.zeta1, velocity.zeta2
    w1 = 0.5 * (np.sum(a * a, axis=1) - np.sum(b * b, axis=1))
    w2 = np.sum(a * b, axis=1)
    radius = 0.5 * position.norm_squared()
    z1 = np.sum(n * np.cross(a, b), axis=1) / radius
    dw1 = np.sum(a * da, axis=1) - np.sum(b * db, axis=1)
    dw2 = np.sum(da * b, axis=1) + np.sum(a * db, axis=1)
    azimuthal = w1 * w1 + w2 * w2
    at_pole = azimuthal <= (1e-10 * radius) ** 2
    dtheta1 = np.where(at_pole, 0.0, (w1 * dw2 - w2 * dw1) / np.where(at_pole, 1.0, azimuthal))
    c = n @ J0
    shape = 0.5 * z1 * c * dtheta1

    inertia = triangle_core.inertia_tensor(q, m)
    I = 2 * radius
    U1, eigenvalues, degenerate = in_plane_spectrum(inertia, n, degeneracy_floor)
    U2 = np.cross(n, U1)
    across = np.cross(n, J0)
    rho2 = np.sum(across * across, axis=1)
    needed = rho2 >= (freeze_floor * J) ** 2
    bad = np.nonzero(degenerate & needed)[0]
    if len(bad):
        time = float(t[bad[0]])
        raise EigenframeDegenerate(
            "In-plane inertia eigenvalues coincide near t = %.17g" % time, time
        )
    qv = np.einsum("a,kai,kai->k", m, q, v)
    outer = np.einsum("a,kai,kaj->kij", m, v, q)
    dinertia = 2 * qv[:, None, None] * np.eye(3) - outer - np.swapaxes(outer, 1, 2)
    lambda1, lambda2 = eigenvalues[:, 0], eigenvalues[:, 1]
    turn = np.einsum("ki,kij,kj->k", U2, dinertia, U1)
    omega3 = np.where(degenerate, 0.0, turn / np.where(degenerate, -1.0, lambda1 - lambda2))
    # dn = sum_j (U_j.dII.n) / (I - lambda_j) U_j with I - lambda1 = lambda2
    floor = pseudo_inverse_floor * I
    tilt1 = np.einsum("ki,kij,kj->k", U1, dinertia, n)
    tilt2 = np.einsum("ki,kij,kj->k", U2, dinertia, n)
    dn = (
        np.where(lambda2 > floor, tilt1 / np.where(lambda2 > floor, lambda2, 1.0), 0.0)[:, None] * U1
        + np.where(lambda1 > floor, tilt2 / np.where(lambda1 > floor, lambda1, 1.0), 0.0)[:, None] * U2
    )
    X = rho2 * omega3 + c * np.sum(dn * across, axis=1)
    denominator = J + pole * c
    if np.any(denominator <= 1e-12 * J):
        time = float(t[np.argmin(denominator)])
        raise GaugeDegenerate(
            "J0 points away from the closing pole near t = %.17g" % time
        )
    fibre = pole * X / denominator
    return np.stack([dtheta1, shape, fibre])


class horizontal_path:
    """
    Zero angular momentum motion over a shape curve

    :ivar t: (N,) curve parameters
    :ivar q: (N, 3, 3) configurations in the xy-plane
    :ivar phi: (N,) rotation applied to the section
    :ivar theta1: (N,) continued shape azimuth
    :ivar max_angular_momentum: Largest |J| found along the samples
    """

    def __init__(self, t, q, phi, theta1, max_angular_momentum):
        self.t = t
        self.q = q
        self.phi = phi
        self.theta1 = theta1
        self.max_angular_momentum = max_angular_momentum

    @property
    def start(self):
        return self.q[0]

    @property
    def end(self):
        return self.q[-1]


def _rotation_z(angle):
    return rigid_algebra.exp_rotation(np.array([0.0, 0.0, angle]))


def horizontal_lift(curve, q_start, m, samples_per_unit=64, rtol=1e-12, atol=1e-13):
    """
    Lifts a planar shape curve to a motion with zero angular momentum

    The lift is the local section rotated by phi(t) about e3 with
    dphi/dt = -J3(section, d section/dt) / I. The polar moment stays equal to
    that of q_start.

    :param curve: Shape curve from :mod:`shapephase.loops`
    :param q_start: Configuration in the xy-plane with the shape curve(0)
    :param m: Masses
    :rtype: horizontal_path
    :raise PreconditionViolated: if q_start does not project to curve(0)
    :raise LiftStepFailure: if the integration fails
    """
    m = triangle_core.as_masses(m)
    q_start = np.asarray(q_start, dtype=float)
    if np.max(np.abs(q_start[:, 2])) > 1e-12 * max(1.0, np.max(np.abs(q_start))):
        raise PreconditionViolated("Horizontal lifts are computed in the xy-plane")
    I = triangle_core.polar_moment(q_start, m)
    if I == 0:
        raise TripleCollision("Cannot lift from the triple collision")
    z1_start, _, _ = curve.rates(0.0)
    theta_start = curve.theta1_start
    section_start, _ = shape_space.section_state(z1_start, theta_start, 0.0, 0.0, m, I)
    phi_start = rigid_algebra.planar_rotation_angle(section_start, q_start, m)
    mismatch = q_start - rigid_algebra.rotate(section_start, _rotation_z(phi_start))
    if np.sqrt(np.sum(m * np.sum(mismatch**2, axis=1)) / I) > 1e-8:
        raise PreconditionViolated("q_start does not have the shape of the curve start")

    def rhs(t, y, right=math.inf):
        # corners of the curve are approached from the left
        t = min(t, right - 1e-14 * max(1.0, abs(right)))
        z1, dz1, dtheta1 = curve.rates(t)
        s, ds = shape_space.section_state(z1, y[1], dz1, dtheta1, m, I)
        J3 = float(np.sum(m * (s[:, 0] * ds[:, 1] - s[:, 1] * ds[:, 0])))
        return [-J3 / I, dtheta1]

    breakpoints = curve.breakpoints
    times = [np.array([0.0])]
    values = [np.array([[phi_start], [theta_start]])]
    y = np.array([phi_start, theta_start])
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        count = max(2, int(math.ceil((right - left) * samples_per_unit)) + 1)
        grid = np.linspace(left, right, count)
        solution = solve_ivp(
            lambda t, y, right=right: rhs(t, y, right),
            (left, right),
            y, method="DOP853", t_eval=grid, rtol=rtol, atol=atol
        )
        if solution.status != 0:
            raise LiftStepFailure("Horizontal lift failed: %s" % solution.message)
        times.append(solution.t[1:])
        values.append(solution.y[:, 1:])
        y = solution.y[:, -1]
    t = np.concatenate(times)
    phi, theta1 = np.concatenate(values, axis=1)

    q = np.empty((len(t), 3, 3))
    largest = 0.0
    for k, x in enumerate(t):
        z1, dz1, dtheta1 = curve.rates(x)
        s, ds = shape_space.section_state(z1, theta1[k], dz1, dtheta1, m, I)
        R = _rotation_z(phi[k])
        q[k] = rigid_algebra.rotate(s, R)
        dphi = rhs(x, [phi[k], theta1[k]])[0]
        velocity = rigid_algebra.rotate(ds + dphi * np.cross([0.0, 0.0, 1.0], s), R)
        J = triangle_core.angular_momentum_qv(q[k], velocity, m)
        largest = max(largest, float(np.linalg.norm(J)))
    logger.debug("Horizontal lift: %d samples, max |J| = %.3g", len(t), largest)
    return horizontal_path(t, q, phi, theta1, largest)
