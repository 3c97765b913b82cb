"""
Exceptions raised by shapephase.

Every exception carries the process exit code the command line tools map it
to: 1 for numerical tolerance failures, 2 for precondition or physics
failures and 3 for configuration or I/O problems.
"""

import freephil

EXIT_PASS = 0
EXIT_NUMERICAL = 1
EXIT_PHYSICS = 2
EXIT_CONFIG = 3


class Sorry(freephil.Sorry):
    """User-facing fatal error: ends a command line run with a short message."""

    def __init__(self, message, exit_code=EXIT_PHYSICS):
        freephil.Sorry.__init__(self, message)
        self.message = message
        self.exit_code = exit_code


class ShapePhaseError(RuntimeError):
    exit_code = EXIT_PHYSICS


# rotation algebra


class AxisNotFixed(ShapePhaseError):
    pass


class AntipodalInput(ShapePhaseError):
    pass


class DegenerateFit(ShapePhaseError):
    pass


# triangle geometry and dynamics


class BinaryCollision(ShapePhaseError):
    pass


class TripleCollision(ShapePhaseError):
    pass


class TripleCollisionApproach(ShapePhaseError):
    def __init__(self, message, time=None):
        ShapePhaseError.__init__(self, message)
        self.time = time


class PersistentlyCollinear(ShapePhaseError):
    pass


class StepFailure(ShapePhaseError):
    exit_code = EXIT_NUMERICAL


class PreconditionViolated(ShapePhaseError):
    pass


# connection and gauge


class UndefinedAtCollinear(ShapePhaseError):
    pass


class EigenframeDegenerate(ShapePhaseError):
    def __init__(self, message, time=None):
        ShapePhaseError.__init__(self, message)
        self.time = time


class GaugeDegenerate(ShapePhaseError):
    pass


class ChartViolation(ShapePhaseError):
    pass


class LiftStepFailure(ShapePhaseError):
    exit_code = EXIT_NUMERICAL


# reconstruction


class ShapeNotClosed(ShapePhaseError):
    pass


class NotSimilar(ShapePhaseError):
    pass


class AntipodalNormal(ShapePhaseError):
    pass


class ZeroAngularMomentum(ShapePhaseError):
    pass


class NoReturn(ShapePhaseError):
    pass


class ToleranceFailure(ShapePhaseError):
    exit_code = EXIT_NUMERICAL


class QuadratureFailure(ShapePhaseError):
    exit_code = EXIT_NUMERICAL


# harness


class ScenarioError(ShapePhaseError):
    exit_code = EXIT_CONFIG


class ArchiveError(ShapePhaseError):
    exit_code = EXIT_CONFIG


def exit_code_for(exception):
    """
    Maps an exception to the command line exit code

    :param exception: Exception raised while running a command
    :return: Exit code
    :rtype: int
    """
    if isinstance(exception, (ShapePhaseError, Sorry)):
        return exception.exit_code
    if isinstance(exception, (OSError, ValueError)):
        return EXIT_CONFIG
    return EXIT_PHYSICS
