"""
Newtonian three-body motion, its oriented lift and shape returns.
"""

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from . import shape_space, triangle_core
from .errors import (
    PersistentlyCollinear,
    PreconditionViolated,
    StepFailure,
    TripleCollision,
    TripleCollisionApproach,
)
from .triangle_core import newtonian, potential_spec, state

logger = logging.getLogger(__name__)

__all__ = [
    "accelerations",
    "detect_shape_return",
    "integrate",
    "integrator_config",
    "orientation_lift",
    "oriented_trajectory",
    "potential_spec",
    "trajectory",
]

methods = {"dop853": "DOP853", "rk45": "RK45", "verlet": None}


class integrator_config:
    """
    Integration settings

    :ivar method: ``dop853`` (default), ``rk45`` or the fixed-step ``verlet``
    :ivar rtol: Relative tolerance of the adaptive methods
    :ivar atol: Absolute tolerance of the adaptive methods
    :ivar max_step: Largest step; also the Verlet step when finite
    :ivar sample_spacing: Spacing of the stored samples
    :ivar energy_budget: Allowed relative energy drift
    :ivar momentum_budget: Allowed angular momentum drift, relative to 1 + |J0|
    :ivar triple_collision_floor: Integration stops once I < floor * I(0)
    """

    __slots__ = [
        "method",
        "rtol",
        "atol",
        "max_step",
        "sample_spacing",
        "energy_budget",
        "momentum_budget",
        "triple_collision_floor",
    ]

    def __init__(
        self,
        method="dop853",
        rtol=1e-10,
        atol=1e-12,
        max_step=math.inf,
        sample_spacing=0.005,
        energy_budget=1e-7,
        momentum_budget=1e-7,
        triple_collision_floor=1e-12,
    ):
        if method not in methods:
            raise PreconditionViolated("Unknown integration method: %s" % method)
        for name, value in (
            ("rtol", rtol),
            ("atol", atol),
            ("max_step", max_step),
            ("sample_spacing", sample_spacing),
            ("energy_budget", energy_budget),
            ("momentum_budget", momentum_budget),
        ):
            if not value > 0:
                raise PreconditionViolated("%s must be positive, got %r" % (name, value))
        self.method = method
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.max_step = float(max_step)
        self.sample_spacing = float(sample_spacing)
        self.energy_budget = float(energy_budget)
        self.momentum_budget = float(momentum_budget)
        self.triple_collision_floor = float(triple_collision_floor)

    def customized_copy(self, **kwds):
        values = {name: getattr(self, name) for name in self.__slots__}
        values.update(kwds)
        return integrator_config(**values)


def accelerations(q, m, spec=newtonian):
    """
    a_a = -(1/m_a) grad_a V

    :param q: Configuration
    :param m: Masses
    :param spec: Potential
    :return: (3, 3) array, one acceleration per row
    :raise BinaryCollision: if two bodies are closer than the collision floor
    """
    q = np.asarray(q, dtype=float)
    m = np.asarray(m, dtype=float)
    r = triangle_core.check_binary_collision(q, spec)
    k = spec.exponent
    result = np.zeros((3, 3))
    if k == 0:
        return result
    for (i, j), r_ij in zip(triangle_core._pairs, r):
        r_eff = math.sqrt(r_ij * r_ij + spec.softening**2)
        # pair force along q_i - q_j; attractive for every k != 0
        f = abs(k) * r_eff ** (-k - 2) * (q[i] - q[j])
        result[i] -= m[j] * f
        result[j] += m[i] * f
    return result


def _energy_series(q, v, m, spec):
    m = np.asarray(m, dtype=float)
    kinetic = 0.5 * np.einsum("a,nai,nai->n", m, v, v)
    r = triangle_core.pair_distances(q)
    k = spec.exponent
    if k == 0:
        return kinetic
    r_eff = np.sqrt(r * r + spec.softening**2)
    products = np.array([m[i] * m[j] for i, j in triangle_core._pairs])
    return kinetic - np.sign(k) * np.sum(products * r_eff ** (-k), axis=1)


class trajectory:
    """
    Sampled motion with a dense interpolant and conservation diagnostics

    :ivar t: (N,) strictly increasing sample times, t[0] = 0
    :ivar q: (N, 3, 3) positions
    :ivar v: (N, 3, 3) velocities
    :ivar masses: Masses
    :ivar spec: Potential used
    :ivar energy: (N,) total energy
    :ivar momentum: (N, 3) angular momentum
    :ivar polar: (N,) polar moment of inertia
    """

    def __init__(self, t, q, v, masses, spec=newtonian, dense=None):
        self.t = np.asarray(t, dtype=float)
        self.q = np.asarray(q, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.masses = np.asarray(masses, dtype=float)
        self.spec = spec
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise PreconditionViolated("Trajectory times must increase strictly")
        self._dense = dense
        self.energy = _energy_series(self.q, self.v, self.masses, spec)
        self.momentum = triangle_core.angular_momentum_qv(self.q, self.v, self.masses)
        self.polar = triangle_core.polar_moment(self.q, self.masses)

    def __len__(self):
        return len(self.t)

    @property
    def duration(self):
        return float(self.t[-1] - self.t[0])

    def state(self, k):
        return state(self.q[k], self.v[k])

    def final_state(self):
        return self.state(-1)

    def evaluate(self, t):
        """
        Dense positions and velocities

        :param t: Time or array of times within the sampled range
        :return: (q, v), each (3, 3) or (len(t), 3, 3)
        """
        if self._dense is None:
            self._dense = self._hermite()
        return self._dense(t)

    def _hermite(self):
        if len(self.t) < 2:
            q0, v0 = self.q[0], self.v[0]
            return lambda t: (q0.copy(), v0.copy())
        a = np.array([accelerations(q, self.masses, self.spec) for q in self.q])
        position = CubicHermiteSpline(self.t, self.q, self.v, axis=0)
        velocity = CubicHermiteSpline(self.t, self.v, a, axis=0)
        return lambda t: (position(t), velocity(t))

    def drift(self):
        """
        Worst conservation errors

        :return: (relative energy drift, angular momentum drift / (1 + |J0|))
        """
        E0 = self.energy[0]
        scale = abs(E0) if E0 != 0 else 1.0
        energy = float(np.max(np.abs(self.energy - E0)) / scale)
        J0 = self.momentum[0]
        momentum = float(
            np.max(np.linalg.norm(self.momentum - J0, axis=1))
            / (1 + np.linalg.norm(J0))
        )
        return energy, momentum

    def within_budget(self, cfg):
        energy, momentum = self.drift()
        ok = energy <= cfg.energy_budget and momentum <= cfg.momentum_budget
        if not ok:
            logger.warning(
                "Conservation budget exceeded: energy drift %.3g (budget %.3g),"
                " momentum drift %.3g (budget %.3g)",
                energy,
                cfg.energy_budget,
                momentum,
                cfg.momentum_budget,
            )
        return ok

    def reversed(self):
        """The same motion run backwards: t -> T - t, v -> -v."""
        T = self.t[-1]
        forward = self.evaluate

        def dense(t):
            q, v = forward(T - np.asarray(t, dtype=float))
            return q, -v

        return trajectory(
            T - self.t[::-1],
            self.q[::-1],
            -self.v[::-1],
            self.masses,
            self.spec,
            dense=dense,
        )


def _sample_times(t1, spacing):
    if t1 == 0:
        return np.zeros(1)
    count = max(2, int(math.ceil(t1 / spacing)) + 1)
    return np.linspace(0.0, t1, count)


def integrate(s0, t1, m, spec=newtonian, cfg=None):
    """
    Integrates Newton's equations from s0 over [0, t1]

    :param s0: Initial state
    :param t1: Duration (zero gives a single-sample trajectory)
    :param m: Masses
    :param spec: Potential
    :param cfg: Integrator settings
    :rtype: trajectory
    :raise TripleCollisionApproach: if I falls below the triple-collision floor
    :raise StepFailure: if the integrator gives up
    :raise BinaryCollision: if two bodies collide
    """
    if cfg is None:
        cfg = integrator_config()
    m = triangle_core.as_masses(m)
    if t1 < 0:
        raise PreconditionViolated("Duration must be non-negative (reverse velocities)")
    I0 = triangle_core.polar_moment(s0.q, m)
    if I0 == 0:
        raise TripleCollision("Cannot integrate from the triple collision")
    triangle_core.check_binary_collision(s0.q, spec)
    floor = cfg.triple_collision_floor * I0
    times = _sample_times(t1, cfg.sample_spacing)

    if cfg.method == "verlet":
        q, v = _verlet(s0, times, m, spec, cfg, floor)
        logger.debug("Verlet run: %d samples", len(times))
        return trajectory(times, q, v, m, spec)
    if t1 == 0:
        return trajectory(times, s0.q[None], s0.v[None], m, spec)

    def rhs(t, y):
        q = y[:9].reshape(3, 3)
        return np.concatenate([y[9:], accelerations(q, m, spec).ravel()])

    def approach(t, y):
        q = y[:9].reshape(3, 3)
        return triangle_core.polar_moment(q, m) - floor

    approach.terminal = True
    approach.direction = -1

    solution = solve_ivp(
        rhs,
        (0.0, t1),
        s0.as_vector(),
        method=methods[cfg.method],
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step,
        dense_output=True,
        events=approach,
    )
    if solution.status == 1:
        time = float(solution.t_events[0][0])
        raise TripleCollisionApproach(
            "Polar moment fell below %.3g at t = %.17g" % (floor, time), time
        )
    if solution.status != 0:
        raise StepFailure("Integration failed: %s" % solution.message)
    logger.debug(
        "%s run: %d steps, %d evaluations", cfg.method, len(solution.t), solution.nfev
    )
    dense_solution = solution.sol

    def dense(t):
        y = dense_solution(t)
        y = np.moveaxis(y, 0, -1)
        return (
            y[..., :9].reshape(y.shape[:-1] + (3, 3)),
            y[..., 9:].reshape(y.shape[:-1] + (3, 3)),
        )

    q, v = dense(times)
    q[0], v[0] = s0.q, s0.v
    return trajectory(times, q, v, m, spec, dense=dense)


def _verlet(s0, times, m, spec, cfg, floor):
    spacing = times[1] - times[0] if len(times) > 1 else 0.0
    h_max = cfg.max_step if math.isfinite(cfg.max_step) else cfg.sample_spacing / 8
    substeps = max(1, int(math.ceil(spacing / h_max))) if spacing else 1
    h = spacing / substeps
    q = np.empty((len(times), 3, 3))
    v = np.empty((len(times), 3, 3))
    position, velocity = s0.q.copy(), s0.v.copy()
    a = accelerations(position, m, spec)
    q[0], v[0] = position, velocity
    for k in range(1, len(times)):
        for _ in range(substeps):
            velocity = velocity + 0.5 * h * a
            position = position + h * velocity
            a = accelerations(position, m, spec)
            velocity = velocity + 0.5 * h * a
        if not np.all(np.isfinite(position)):
            raise StepFailure("Verlet step produced non-finite positions")
        if triangle_core.polar_moment(position, m) < floor:
            raise TripleCollisionApproach(
                "Polar moment fell below %.3g near t = %.17g" % (floor, times[k]),
                float(times[k]),
            )
        q[k], v[k] = position, velocity
    return q, v


class oriented_trajectory:
    """
    A trajectory with a continuous unit normal

    :ivar trajectory: The underlying trajectory
    :ivar n: (N, 3) unit normals
    """

    def __init__(self, tr, n):
        self.trajectory = tr
        self.n = np.asarray(n, dtype=float)

    def __len__(self):
        return len(self.trajectory)

    @property
    def t(self):
        return self.trajectory.t

    @property
    def q(self):
        return self.trajectory.q

    @property
    def v(self):
        return self.trajectory.v

    @property
    def masses(self):
        return self.trajectory.masses

    def shapes(self):
        """(N, 3) normalised shape vectors along the motion."""
        return shape_space.shape_series(self.q, self.n, self.masses)

    def oriented(self, k):
        return triangle_core.oriented_configuration(self.q[k], self.n[k])

    def normals_at(self, t, q=None):
        """
        Normals at intermediate times, continuous with the stored samples

        The plane normal of the dense motion takes the sign of the normal
        interpolated between the neighbouring samples; at (nearly) collinear
        instants the interpolated normal is used itself.

        :param t: Array of times
        :param q: Dense positions at t, if already evaluated
        :return: (len(t), 3) unit normals
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self.t) < 2:
            return np.broadcast_to(self.n[0], (len(t), 3)).copy()
        if q is None:
            q, _ = self.trajectory.evaluate(t)
        q = np.reshape(q, (len(t), 3, 3))
        k = np.clip(np.searchsorted(self.t, t) - 1, 0, len(self.t) - 2)
        s = ((t - self.t[k]) / (self.t[k + 1] - self.t[k]))[:, None]
        guide = (1 - s) * self.n[k] + s * self.n[k + 1]
        guide /= np.linalg.norm(guide, axis=1)[:, None]
        side1, side2 = q[:, 1] - q[:, 0], q[:, 2] - q[:, 0]
        raw = np.cross(side1, side2)
        size = np.linalg.norm(raw, axis=1)
        sides = np.linalg.norm(side1, axis=1) * np.linalg.norm(side2, axis=1)
        collinear = size <= 1e-12 * sides
        normal = np.where(
            collinear[:, None], guide, raw / np.where(collinear, 1.0, size)[:, None]
        )
        opposite = np.sum(normal * guide, axis=1) < 0
        normal[opposite] = -normal[opposite]
        return normal

    def normal_at(self, t):
        """Normal at an intermediate time, continuous with the stored samples."""
        return self.normals_at(t)[0]

    def shape_at(self, t):
        q, _ = self.trajectory.evaluate(t)
        return shape_space.shape_of(q, self.normal_at(t), self.masses)

    def truncated(self, t_end):
        """Samples up to t_end, with an exact final sample at t_end."""
        keep = self.t < t_end - 1e-12 * max(1.0, abs(t_end))
        q_end, v_end = self.trajectory.evaluate(t_end)
        tr = trajectory(
            np.append(self.t[keep], t_end),
            np.concatenate([self.q[keep], q_end[None]]),
            np.concatenate([self.v[keep], v_end[None]]),
            self.masses,
            self.trajectory.spec,
            dense=self.trajectory.evaluate,
        )
        return oriented_trajectory(tr, np.concatenate([self.n[keep], [self.normal_at(t_end)]]))

    def reversed(self):
        return oriented_trajectory(self.trajectory.reversed(), self.n[::-1])


def orientation_lift(
    tr, n0, threshold=triangle_core.collinear_threshold, max_collinear_samples=3
):
    """
    Continuous choice of unit normal along a motion

    At non-collinear samples the normal is the plane normal, with the sign
    chosen continuously. Through an isolated collinear crossing the normal is
    interpolated linearly between the neighbouring samples, renormalised and
    made orthogonal to the line of the bodies.

    :param tr: Trajectory
    :param n0: Unit normal of the initial triangle
    :param threshold: Collinearity threshold
    :param max_collinear_samples: Longest collinear run treated as a crossing
    :rtype: oriented_trajectory
    :raise PreconditionViolated: if the initial triangle is collinear or n0 is
        not normal to it
    :raise PersistentlyCollinear: for motions collinear over an interval
    """
    m = tr.masses
    n0 = np.asarray(n0, dtype=float)
    n0 = n0 / np.linalg.norm(n0)
    inertia = triangle_core.inertia_tensor(tr.q, m)
    eigenvalues, eigenvectors = np.linalg.eigh(inertia)
    collinear = eigenvalues[:, 0] < threshold * tr.polar
    if collinear[0]:
        if collinear[: max_collinear_samples + 2].all():
            raise PersistentlyCollinear(
                "Motion is collinear from t = 0 over at least %d samples"
                % min(len(tr), max_collinear_samples + 2)
            )
        raise PreconditionViolated("Initial configuration is collinear")
    raw = np.cross(tr.q[:, 1] - tr.q[:, 0], tr.q[:, 2] - tr.q[:, 0])
    norms = np.linalg.norm(raw, axis=1)
    normals = np.zeros_like(raw)
    normals[~collinear] = raw[~collinear] / norms[~collinear, None]
    if abs(abs(n0 @ normals[0]) - 1) > 1e-8:
        raise PreconditionViolated("n0 is not normal to the initial triangle")
    if n0 @ normals[0] < 0:
        normals[0] = -normals[0]

    N = len(tr)
    k = 1
    transported = 0
    while k < N:
        if not collinear[k]:
            if normals[k] @ normals[k - 1] < 0:
                normals[k] = -normals[k]
            k += 1
            continue
        start = k
        while k < N and collinear[k]:
            k += 1
        if k == N or k - start > max_collinear_samples:
            raise PersistentlyCollinear(
                "Motion is collinear from t = %.6g over %d samples"
                % (tr.t[start], k - start)
            )
        before, after = normals[start - 1], normals[k]
        if after @ before < 0:
            after = -after
            normals[k] = after
        for j in range(start, k):
            s = (tr.t[j] - tr.t[start - 1]) / (tr.t[k] - tr.t[start - 1])
            normal = (1 - s) * before + s * after
            line = eigenvectors[j, :, 0]
            normal = normal - (normal @ line) * line
            normals[j] = normal / np.linalg.norm(normal)
        transported += k - start
    if transported:
        logger.info("Normal transported through %d collinear samples", transported)
    return oriented_trajectory(tr, normals)


def detect_shape_return(otr, tol, skip_time=0.0):
    """
    Times at which the oriented shape comes back to the initial shape

    The spherical distance to the initial shape is scanned on the samples and
    every local minimum, the final sample included, is polished with a
    bounded scalar minimisation on the dense motion. A motion of constant shape returns at
    every sample.

    :param otr: Oriented trajectory
    :param tol: Distance on the shape sphere regarded as a return
    :param skip_time: Ignore returns at times up to this value
    :return: List of return times, possibly empty
    """
    if len(otr) < 4:
        return []
    shapes = otr.shapes()
    distance = shape_space.chord_distance(shapes, shapes[0])
    t = otr.t
    later = t > skip_time
    if np.max(distance[later], initial=0.0) < tol:
        return [float(x) for x in t[later & (t > 0)]]

    w0 = shapes[0]

    def distance_at(x):
        return float(shape_space.chord_distance(otr.shape_at(x).w, w0))

    candidate_floor = max(10 * tol, 0.05)
    result = []
    for k in range(1, len(t) - 1):
        if not later[k] or distance[k] > candidate_floor:
            continue
        if not (distance[k] <= distance[k - 1] and distance[k] < distance[k + 1]):
            continue
        polished = minimize_scalar(
            distance_at,
            bounds=(t[k - 1], t[k + 1]),
            method="bounded",
            options={"xatol": 1e-13 * max(1.0, t[k + 1])},
        )
        if polished.fun < tol and polished.x > skip_time:
            logger.debug("Shape return at t = %.17g (distance %.3g)", polished.x, polished.fun)
            result.append(float(polished.x))
    if later[-1] and distance[-1] <= min(distance[-2], candidate_floor):
        polished = minimize_scalar(
            distance_at,
            bounds=(t[-2], t[-1]),
            method="bounded",
            options={"xatol": 1e-13 * max(1.0, t[-1])},
        )
        if polished.fun < min(tol, distance[-1]) and polished.x > skip_time:
            result.append(float(polished.x))
        elif distance[-1] < tol:
            result.append(float(t[-1]))
        if result and result[-1] > t[-2]:
            logger.debug("Shape return at the end of the motion, t = %.17g", result[-1])
    return result
