"""
Scenario definitions.

A scenario is a PHIL file checked against :data:`master_phil`. Parameters may
be overridden on the command line as ``path=value``. Natural units are used
throughout: the gravitational constant is 1.
"""

import hashlib
import logging
import math

import freephil
import numpy as np
from scipy.optimize import brentq

from . import phil_types, rigid_algebra, triangle_core
from .dynamics import integrator_config
from .errors import PreconditionViolated, ScenarioError
from .triangle_core import potential_spec, state

logger = logging.getLogger(__name__)

master_phil_str = """
masses = 1 1 1
  .type = reals(size=3, value_min=0)
  .help = "Masses of the three bodies (natural units, G = 1)"
initial
  .help = "Initial state; positions are moved to the centre of mass frame"
{
  positions = None
    .type = vec3s(size=3)
    .help = "Three position vectors, e.g. (1, 0, 0) (0, 1, 0) (0, 0, 0)"
  velocities = None
    .type = vec3s(size=3)
    .help = "Three velocity vectors; zero if omitted"
  preset = *none lagrange homographic harmonic euler
    .type = choice
    .help = "Generate the initial state instead of reading positions"
}
preset_options
  .help = "Parameters of the generated initial states"
{
  distance = 1
    .type = real(value_min=0)
    .help = "Side length (lagrange, homographic) or spacing (euler)"
  dilation = 0.8
    .type = real(value_min=0)
    .help = "Velocity factor of the homographic preset; 1 is rigid rotation"
  tilt = 0
    .type = real
    .help = "Tilt in radians: of the plane of motion (lagrange, homographic,"
            " euler) or of the rotation axis (harmonic)"
  deform = 0
    .type = real
    .help = "Non-rigid velocity component of the harmonic preset"
}
potential
  .help = "V = -sgn(k) sum_{i<j} m_i m_j r_ij^-k"
{
  kind = *newtonian power_law
    .type = choice
  exponent = 1
    .type = real
    .help = "k of the power law; -2 is the harmonic potential"
  softening = 0
    .type = real(value_min=0)
    .help = "Distances enter as sqrt(r^2 + softening^2)"
  collision_floor = 1e-12
    .type = real(value_min=0)
    .help = "Pairwise distance regarded as a binary collision"
}
integrator {
  method = *dop853 rk45 verlet
    .type = choice
  rtol = 1e-10
    .type = real(value_min=0)
  atol = 1e-12
    .type = real(value_min=0)
  max_step = None
    .type = real(value_min=0)
    .help = "Largest step; also the Verlet step"
  sample_spacing = 0.005
    .type = real(value_min=0)
    .help = "Time between stored samples"
  energy_budget = 1e-7
    .type = real(value_min=0)
    .help = "Allowed relative energy drift"
  momentum_budget = 1e-7
    .type = real(value_min=0)
    .help = "Allowed angular momentum drift relative to 1 + |J0|"
  triple_collision_floor = 1e-12
    .type = real(value_min=0)
    .help = "Stop when I falls below this fraction of I(0)"
}
run {
  duration = 1
    .type = real
  seed = 0
    .type = int
}
shape_return {
  tolerance = 1e-6
    .type = real(value_min=0)
    .help = "Shape-sphere distance counted as a return"
  skip_time = 0
    .type = real(value_min=0)
    .help = "Ignore returns before this time"
}
phase {
  tolerance = 1e-5
    .type = real(value_min=0)
    .help = "Largest residual in radians counted as a pass"
  similarity_tolerance = 1e-6
    .type = real(value_min=0)
  closure = *north south
    .type = choice
    .help = "Pole of the fibre sphere used to close the reduced loop"
  debug_flip_beta = False
    .type = bool
    .help = "Negate the gauge potential (self-test of the checks)"
    .expert_level = 3
}
output {
  archive = None
    .type = path
  report = None
    .type = path
  plot_prefix = None
    .type = str
}
"""

master_phil = freephil.parse(
    master_phil_str, converter_registry=phil_types.converter_registry
)


def _fail(path, message):
    raise ScenarioError("%s: %s" % (path, message))


def lagrange_state(m, distance=1.0, dilation=1.0, tilt=0.0):
    """
    Equilateral relative equilibrium, optionally with scaled velocities

    With dilation = 1 the triangle rotates rigidly at the rate
    sqrt(M / distance^3); other values give homographic motions of constant
    shape.
    """
    m = np.asarray(m, dtype=float)
    radius = distance / math.sqrt(3)
    angles = math.pi / 2 + 2 * math.pi * np.arange(3) / 3
    q = radius * np.stack([np.cos(angles), np.sin(angles), np.zeros(3)], axis=1)
    q = triangle_core.center(q, m)
    rate = math.sqrt(np.sum(m) / distance**3)
    v = dilation * rate * np.cross([0.0, 0.0, 1.0], q)
    R = rigid_algebra.exp_rotation([tilt, 0.0, 0.0])
    return state(rigid_algebra.rotate(q, R), rigid_algebra.rotate(v, R))


def euler_state(m, distance=1.0, tilt=0.0):
    """
    Collinear relative equilibrium with body 2 between bodies 1 and 3

    :param distance: Separation of the outer bodies
    """
    m1, m2, m3 = np.asarray(m, dtype=float)

    def accelerations(rho):
        a1 = m2 / rho**2 + m3
        a2 = -m1 / rho**2 + m3 / (1 - rho) ** 2
        a3 = -m1 - m2 / (1 - rho) ** 2
        return a1, a2, a3

    def balance(rho):
        a1, a2, a3 = accelerations(rho)
        return (a2 - a1) - rho * (a3 - a1)

    rho = brentq(balance, 1e-9, 1 - 1e-9, xtol=1e-15)
    a1, _, a3 = accelerations(rho)
    rate = math.sqrt(-(a3 - a1)) / distance**1.5
    q = distance * np.array([[0.0, 0, 0], [rho, 0, 0], [1.0, 0, 0]])
    q = triangle_core.center(q, m)
    v = rate * np.cross([0.0, 0.0, 1.0], q)
    R = rigid_algebra.exp_rotation([tilt, 0.0, 0.0])
    return state(rigid_algebra.rotate(q, R), rigid_algebra.rotate(v, R))


_harmonic_a = np.array([[2.0, 0, 0], [-1, 0.5, 0], [-1, -0.5, 0]])
_harmonic_c = np.array([[0.3, 1.0, 0], [-0.6, -0.5, 0], [0.3, -0.5, 0]])


def harmonic_state(m, distance=1.0, tilt=0.0, deform=0.0):
    """
    Initial state for the harmonic potential V = M I

    Every motion is q(t) = A cos(w t) + B sin(w t) with w = sqrt(2 M), so
    q(T/2) = -q(0): the shape returns after half a period. B is the rotation
    of A about the axis (0, sin tilt, cos tilt) plus ``deform`` times a fixed
    second triangle.
    """
    m = np.asarray(m, dtype=float)
    A = triangle_core.center(distance * _harmonic_a, m)
    C = triangle_core.center(distance * _harmonic_c, m)
    axis = np.array([0.0, math.sin(tilt), math.cos(tilt)])
    B = np.cross(axis, A) + deform * C
    rate = math.sqrt(2 * np.sum(m))
    return state(A, rate * B)


def harmonic_period(m):
    return 2 * math.pi / math.sqrt(2 * np.sum(m))


class scenario:
    """
    Typed view of a scenario extract

    :ivar params: The PHIL extract
    :ivar masses: Masses
    :ivar initial: Initial state in the centre of mass frame
    :ivar potential: Potential specification
    :ivar integrator: Integrator settings
    """

    def __init__(self, params, check_initial=True):
        self.params = params
        try:
            self.masses = triangle_core.as_masses(params.masses)
        except PreconditionViolated as e:
            _fail("masses", str(e))
        p = params.potential
        try:
            self.potential = potential_spec(
                kind=p.kind,
                exponent=p.exponent,
                softening=p.softening,
                collision_floor=p.collision_floor,
            )
        except PreconditionViolated as e:
            _fail("potential", str(e))
        i = params.integrator
        try:
            self.integrator = integrator_config(
                method=i.method,
                rtol=i.rtol,
                atol=i.atol,
                max_step=math.inf if i.max_step is None else i.max_step,
                sample_spacing=i.sample_spacing,
                energy_budget=i.energy_budget,
                momentum_budget=i.momentum_budget,
                triple_collision_floor=i.triple_collision_floor,
            )
        except PreconditionViolated as e:
            _fail("integrator", str(e))
        if params.run.duration is None or params.run.duration < 0:
            _fail("run.duration", "must be a non-negative number")
        for path, value in (
            ("shape_return.tolerance", params.shape_return.tolerance),
            ("phase.tolerance", params.phase.tolerance),
            ("phase.similarity_tolerance", params.phase.similarity_tolerance),
        ):
            if not value or value <= 0:
                _fail(path, "must be positive")
        self.initial = self._initial_state() if check_initial else None

    def _initial_state(self):
        params = self.params
        preset = params.initial.preset
        options = params.preset_options
        m = self.masses
        if preset == "lagrange":
            s = lagrange_state(m, options.distance, 1.0, options.tilt)
        elif preset == "homographic":
            s = lagrange_state(m, options.distance, options.dilation, options.tilt)
        elif preset == "euler":
            s = euler_state(m, options.distance, options.tilt)
        elif preset == "harmonic":
            if self.potential.kind != "power_law" or self.potential.exponent != -2:
                _fail("initial.preset", "harmonic needs potential.kind=power_law exponent=-2")
            s = harmonic_state(m, options.distance, options.tilt, options.deform)
        else:
            if params.initial.positions is None:
                _fail("initial.positions", "required unless a preset is chosen")
            q = np.array(params.initial.positions, dtype=float)
            if params.initial.velocities is None:
                v = np.zeros((3, 3))
            else:
                v = np.array(params.initial.velocities, dtype=float)
            q = triangle_core.center(q, m)
            v = triangle_core.center(v, m)
            s = state(q, v)
        if triangle_core.polar_moment(s.q, m) == 0:
            _fail("initial.positions", "triple collision")
        try:
            triangle_core.check_binary_collision(s.q, self.potential)
        except Exception as e:
            _fail("initial.positions", str(e))
        return s

    @property
    def duration(self):
        return self.params.run.duration

    def as_phil(self):
        """The effective parameters as PHIL text."""
        return master_phil.format(python_object=self.params).as_str()

    def config_hash(self):
        return hashlib.sha256(self.as_phil().encode("utf-8")).hexdigest()


def _wrap_phil_errors(function, *args, **kwds):
    try:
        return function(*args, **kwds)
    except (RuntimeError, freephil.Sorry) as e:
        raise ScenarioError(str(e))


def load(file_name=None, text=None, args=(), check_initial=True):
    """
    Reads a scenario

    :param file_name: PHIL file
    :param text: PHIL text (instead of a file)
    :param args: Command line overrides of the form ``path=value``
    :param check_initial: Build and check the initial state (not needed when
        an archive supplies the motion)
    :rtype: scenario
    :raise ScenarioError: on parse or validation errors
    """
    sources = []
    if file_name is not None:
        try:
            sources.append(_wrap_phil_errors(freephil.parse, file_name=file_name))
        except OSError as e:
            raise ScenarioError("Cannot read scenario %s: %s" % (file_name, e))
    if text is not None:
        sources.append(_wrap_phil_errors(freephil.parse, text))
    if args:
        interpreter = master_phil.command_line_argument_interpreter()
        sources.extend(_wrap_phil_errors(interpreter.process, args=list(args)))
    working = _wrap_phil_errors(master_phil.fetch, sources=sources)
    params = _wrap_phil_errors(working.extract)
    result = scenario(params, check_initial)
    logger.debug("Scenario loaded, sha256 %s", result.config_hash())
    return result
