"""
Randomised property suites.

Each suite draws its cases from its own generator, seeded by the run seed and
the suite's position in :data:`suites`, so results do not depend on which
suites run. Suites that integrate motions or lift loops are expensive and run
at most ``expensive_cases`` cases.
"""

import logging
import math

import numpy as np

from . import connection_gauge, dynamics, phase_reconstruction, pipeline, rigid_algebra, scenario
from . import shape_space, triangle_core
from .errors import ShapePhaseError
from .loops import latitude
from .triangle_core import state

logger = logging.getLogger(__name__)

expensive_cases = 3


def random_masses(rng):
    return rng.uniform(0.5, 2.0, 3)


def random_triangle(rng, m):
    """Centred configuration, kept well away from collinear."""
    while True:
        q = triangle_core.center(rng.normal(size=(3, 3)), m)
        if triangle_core.collinearity(q, m) > 0.05:
            return q


def inertia_identity(rng, flip=False):
    m = random_masses(rng)
    q = triangle_core.center(rng.normal(size=(3, 3)), m)
    omega = rng.normal(size=3)
    quadratic = omega @ triangle_core.inertia_tensor(q, m) @ omega
    direct = np.sum(m * np.sum(np.cross(omega, q) ** 2, axis=1))
    return abs(quadratic - direct) / abs(direct)


def shape_area(rng, flip=False):
    m = random_masses(rng)
    q = random_triangle(rng, m)
    n = rng.normal(size=3)
    normal = triangle_core.principal_normal(q, m)
    if normal @ n < 0:
        normal = -normal
    oq = triangle_core.oriented_configuration(q, normal)
    area = triangle_core.oriented_area(oq)
    I = triangle_core.polar_moment(q, m)
    expected = 4 * math.sqrt(np.prod(m) / np.sum(m)) * area / I
    return abs(shape_space.shape_of(q, normal, m).z1 - expected)


def submersion(rng, flip=False):
    m = random_masses(rng)
    z1 = rng.uniform(-0.9, 0.9)
    theta1 = rng.uniform(-math.pi, math.pi)
    q, v = shape_space.section_state(z1, theta1, rng.normal(), rng.normal(), m, 1.0)
    I = triangle_core.polar_moment(q, m)
    J3 = triangle_core.angular_momentum_qv(q, v, m)[2]
    v = v - (J3 / I) * np.cross([0.0, 0.0, 1.0], q)
    v = v / math.sqrt(np.sum(m * np.sum(v * v, axis=1)))
    horizontal, shape = shape_space.submersion_speed_check(state(q, v), m)
    return abs(horizontal - shape)


def connection_rigidity(rng, flip=False):
    m = random_masses(rng)
    q = random_triangle(rng, m)
    omega = rng.normal(size=3)
    recovered = connection_gauge.connection_value(state(q, np.cross(omega, q)), m)
    return np.linalg.norm(recovered - omega) / np.linalg.norm(omega)


def homothety_invariance(rng, flip=False):
    m = random_masses(rng)
    q = random_triangle(rng, m)
    v = rng.normal(size=(3, 3))
    v = triangle_core.center(v, m)
    scale = rng.uniform(0.5, 2.0)
    dilation = rng.normal()
    J0 = rng.normal(size=3)
    base = connection_gauge.alpha_J0(state(q, v), m, J0)
    scaled = connection_gauge.alpha_J0(state(scale * q, scale * v), m, J0)
    dilated = connection_gauge.alpha_J0(state(q, v + dilation * q), m, J0)
    return max(abs(scaled - base), abs(dilated - base)) / max(1.0, abs(base))


def rotation_invariance(rng, flip=False):
    m = random_masses(rng)
    q = random_triangle(rng, m)
    n = triangle_core.principal_normal(q, m)
    R = rigid_algebra.exp_rotation(rng.normal(size=3))
    before = shape_space.shape_of(q, n, m).w
    after = shape_space.shape_of(rigid_algebra.rotate(q, R), R @ n, m).w
    return float(np.max(np.abs(after - before)))


def stokes(rng, flip=False):
    origin = [
        rng.uniform(-0.7, 0.7),
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-0.7, 0.7),
        rng.uniform(-math.pi, math.pi),
    ]
    a = rng.uniform(-0.1, 0.1, 4)
    b = rng.uniform(-0.1, 0.1, 4)
    J0 = rng.uniform(0.5, 2.0)
    surface = phase_reconstruction.chart_surface.affine(origin, a, b)
    area = phase_reconstruction.omega_surface_quadrature(surface, J0)
    line = phase_reconstruction.boundary_line_integral(surface, J0, flip=flip)
    return abs(line - area) / J0


def holonomy(rng, flip=False):
    m = random_masses(rng)
    z1 = rng.uniform(-0.8, 0.8)
    curve = latitude(z1)
    q_start, _ = shape_space.section_state(z1, curve.theta1_start, 0.0, 0.0, m, 1.0)
    result = phase_reconstruction.holonomy_check(curve, q_start, m)
    return abs(phase_reconstruction.wrap(result.measured - math.pi * (z1 - 1)))


def reconstruction(rng, flip=False):
    """Spatial harmonic motion, reconstructed at its half-period return."""
    m = random_masses(rng)
    period = scenario.harmonic_period(m)
    sc = scenario.load(
        args=[
            "masses=%r %r %r" % tuple(float(x) for x in m),
            "initial.preset=harmonic",
            "preset_options.tilt=%r" % float(rng.uniform(0.3, 0.8)),
            "preset_options.deform=%r" % float(rng.uniform(0.1, 0.3)),
            "potential.kind=power_law",
            "potential.exponent=-2",
            "run.duration=%r" % float(0.55 * period),
            "shape_return.skip_time=%r" % float(0.1 * period),
            "phase.debug_flip_beta=%s" % flip,
        ]
    )
    report = pipeline.run(sc)
    return abs(report.phase.residual)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def exp_log_round_trip(rng, flip=False):
    axis = random_unit(rng)
    angle = rng.uniform(-3.1, 3.1)
    return abs(rigid_algebra.log_about_axis(rigid_algebra.exp_rotation(angle * axis), axis) - angle)


def rotation_between_round_trip(rng, flip=False):
    a = random_unit(rng)
    b = random_unit(rng)
    there = rigid_algebra.rotation_between(a, b)
    back = rigid_algebra.rotation_between(b, a)
    return max(np.max(np.abs(there @ a - b)), np.max(np.abs(back @ there - np.eye(3))))


def similarity_equivariance(rng, flip=False):
    m = random_masses(rng)
    q0 = random_triangle(rng, m)
    q1 = random_triangle(rng, m)
    Q = rigid_algebra.exp_rotation(rng.normal(size=3))
    scale, R, _ = rigid_algebra.fit_similarity(q0, q1, m)
    moved_scale, moved, _ = rigid_algebra.fit_similarity(q0, rigid_algebra.rotate(q1, Q), m)
    return max(abs(moved_scale - scale) / scale, np.max(np.abs(moved - Q @ R)))


def inertia_trace(rng, flip=False):
    m = random_masses(rng)
    q = triangle_core.center(rng.normal(size=(3, 3)), m)
    I = triangle_core.polar_moment(q, m)
    return abs(np.trace(triangle_core.inertia_tensor(q, m)) - 2 * I) / I


def rigid_momentum(rng, flip=False):
    m = random_masses(rng)
    q = triangle_core.center(rng.normal(size=(3, 3)), m)
    omega = rng.normal(size=3)
    J = triangle_core.angular_momentum_qv(q, np.cross(omega, q), m)
    expected = triangle_core.inertia_tensor(q, m) @ omega
    return np.linalg.norm(J - expected) / np.linalg.norm(expected)


def orientation_flip(rng, flip=False):
    m = random_masses(rng)
    q = random_triangle(rng, m)
    n = triangle_core.principal_normal(q, m)
    flipped = shape_space.orientation_flip(shape_space.shape_of(q, n, m))
    return float(np.max(np.abs(flipped.w - shape_space.shape_of(q, -n, m).w)))


def gauge_identity(rng, flip=False):
    """alpha_J0 of the section velocity against -J0 z1 dtheta1 / 2."""
    m = random_masses(rng)
    z1 = rng.uniform(-0.9, 0.9)
    dtheta1 = rng.normal()
    q, v = shape_space.section_state(
        z1, rng.uniform(-math.pi, math.pi), rng.normal(), dtheta1, m, rng.uniform(0.5, 2.0)
    )
    J0 = rng.uniform(0.5, 2.0)
    value = connection_gauge.alpha_J0(state(q, v), m, [0.0, 0.0, J0])
    return abs(value + 0.5 * J0 * z1 * dtheta1) / J0


def fibre_coordinates(rng, flip=False):
    """J0 rebuilt from z2 and theta2 in the in-plane eigenframe."""
    m = random_masses(rng)
    q = random_triangle(rng, m)
    n = triangle_core.principal_normal(q, m)
    J0 = rng.normal(size=3)
    J = np.linalg.norm(J0)
    U1, eigenvalues, _ = connection_gauge.in_plane_spectrum(
        triangle_core.inertia_tensor(q, m)[None], n[None]
    )
    U1 = U1[0]
    U2 = np.cross(n, U1)
    z2 = n @ J0 / J
    theta2 = math.atan2(U2 @ J0, U1 @ J0)
    rho = math.sqrt(max(0.0, 1 - z2 * z2))
    rebuilt = J * (rho * (math.cos(theta2) * U1 + math.sin(theta2) * U2) + z2 * n)
    ordering = abs(U1 @ triangle_core.inertia_tensor(q, m) @ U1 - eigenvalues[0, 0])
    return max(np.linalg.norm(rebuilt - J0) / J, ordering / triangle_core.polar_moment(q, m))


def bound_motion(rng, m):
    return scenario.lagrange_state(
        m, dilation=rng.uniform(0.75, 0.95), tilt=rng.uniform(0.0, math.pi / 2)
    )


def conservation(rng, flip=False):
    m = random_masses(rng)
    tr = dynamics.integrate(bound_motion(rng, m), 2.0, m)
    return max(tr.drift())


def time_reversal(rng, flip=False):
    m = random_masses(rng)
    s = bound_motion(rng, m)
    end = dynamics.integrate(s, 1.5, m).final_state()
    back = dynamics.integrate(state(end.q, -end.v), 1.5, m)
    return max(np.max(np.abs(back.q[-1] - s.q)), np.max(np.abs(back.v[-1] + s.v)))


def scaling_law(rng, flip=False):
    """q -> c q, v -> c^(-k/2) v and t -> c^((k+2)/2) t map motions onto motions."""
    m = random_masses(rng)
    s = bound_motion(rng, m)
    spec = triangle_core.potential_spec("power_law", exponent=rng.choice([1.0, -2.0]))
    k = spec.exponent
    c = rng.uniform(0.5, 2.0)
    tr = dynamics.integrate(s, 1.0, m, spec)
    scaled = dynamics.integrate(state(c * s.q, c ** (-k / 2) * s.v), c ** ((k + 2) / 2), m, spec)
    return max(
        np.max(np.abs(scaled.q[-1] - c * tr.q[-1])) / c,
        np.max(np.abs(scaled.v[-1] - c ** (-k / 2) * tr.v[-1])) / c ** (-k / 2),
    )


def gauge_constant(rng, flip=False):
    """A constant turn of the eigenframe shifts theta2 by a constant."""
    m = random_masses(rng)
    s = scenario.harmonic_state(m, tilt=rng.uniform(0.3, 0.8), deform=rng.uniform(0.1, 0.3))
    harmonic = triangle_core.potential_spec("power_law", exponent=-2)
    otr = pipeline.orient(dynamics.integrate(s, 0.5 * scenario.harmonic_period(m), m, harmonic))
    offset = rng.uniform(-math.pi, math.pi)
    base = connection_gauge.eigenframe_track(otr)
    turned = connection_gauge.eigenframe_track(otr, offset=offset)
    shift = np.array([phase_reconstruction.wrap(d + offset) for d in turned.theta2 - base.theta2])
    return max(
        float(np.max(np.abs(shift))),
        float(np.max(np.abs(turned.z2 - base.z2))),
        float(np.max(np.abs(turned.theta1 - base.theta1))),
    )


# name, function, tolerance, expensive
suites = [
    ("inertia_identity", inertia_identity, 1e-10, False),
    ("shape_area", shape_area, 1e-10, False),
    ("submersion_isometry", submersion, 1e-8, False),
    ("connection_rigidity", connection_rigidity, 1e-10, False),
    ("homothety_invariance", homothety_invariance, 1e-12, False),
    ("rotation_invariance", rotation_invariance, 1e-12, False),
    ("stokes", stokes, 1e-8, False),
    ("latitude_holonomy", holonomy, 1e-6, True),
    ("reconstruction", reconstruction, 1e-4, True),
    ("exp_log_round_trip", exp_log_round_trip, 1e-12, False),
    ("rotation_between", rotation_between_round_trip, 1e-12, False),
    ("similarity_equivariance", similarity_equivariance, 1e-9, False),
    ("inertia_trace", inertia_trace, 1e-12, False),
    ("rigid_momentum", rigid_momentum, 1e-12, False),
    ("orientation_flip", orientation_flip, 1e-12, False),
    ("gauge_identity", gauge_identity, 1e-10, False),
    ("fibre_coordinates", fibre_coordinates, 1e-10, False),
    ("conservation", conservation, 1e-7, True),
    ("time_reversal", time_reversal, 1e-7, True),
    ("scaling_law", scaling_law, 1e-7, True),
    ("gauge_constant", gauge_constant, 1e-9, True),
]


class suite_result:
    """
    Outcome of one property suite

    :ivar worst: Largest residual (inf if a case raised)
    """

    def __init__(self, name, cases, failed, worst, tolerance):
        self.name = name
        self.cases = cases
        self.failed = failed
        self.worst = worst
        self.tolerance = tolerance

    @property
    def passed(self):
        return self.failed == 0

    def as_dict(self):
        return {
            "name": self.name,
            "cases": self.cases,
            "passed": self.cases - self.failed,
            "failed": self.failed,
            "worst": self.worst,
            "tolerance": self.tolerance,
        }


def run_suite(index, seed, count, flip=False):
    name, function, tolerance, expensive = suites[index]
    cases = min(count, expensive_cases) if expensive else count
    rng = np.random.default_rng([seed, index])
    failed = 0
    worst = 0.0
    for case in range(cases):
        try:
            residual = float(function(rng, flip))
        except ShapePhaseError as e:
            logger.warning("%s case %d raised %s: %s", name, case, type(e).__name__, e)
            residual = math.inf
        worst = max(worst, residual)
        if not residual <= tolerance:
            failed += 1
    logger.info("%s: %d/%d passed, worst %.3g", name, cases - failed, cases, worst)
    return suite_result(name, cases, failed, worst, tolerance)


def validate(seed=0, count=20, flip=False, names=None):
    """
    Runs the property suites

    :param seed: Seed of the random cases
    :param count: Cases per suite; 0 gives an empty table
    :param flip: Negate the gauge potential (the Stokes and reconstruction
        suites must then fail)
    :param names: Restrict to these suites
    :return: List of :class:`suite_result`, in the order of :data:`suites`
    """
    if count <= 0:
        return []
    return [
        run_suite(index, seed, count, flip)
        for index, suite in enumerate(suites)
        if names is None or suite[0] in names
    ]


def format_table(results):
    lines = ["%-22s %6s %6s %6s %10s %10s" % ("property", "cases", "pass", "fail", "worst", "tolerance")]
    for r in results:
        lines.append(
            "%-22s %6d %6d %6d %10.3g %10.3g"
            % (r.name, r.cases, r.cases - r.failed, r.failed, r.worst, r.tolerance)
        )
    return "\n".join(lines)
