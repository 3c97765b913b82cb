"""
Quadrature shared by the phase computations.

Line integrals use scipy's adaptive Gauss-Kronrod integrator with an absolute
and a relative error goal and a cap on the number of subintervals; reaching
the cap is an error, never a silent loss of accuracy. Surface integrals use a
fixed tensor-product Gauss-Legendre rule.

All reductions run in a fixed order so that repeated runs give identical
results.
"""

import functools
import logging
import math

import numpy as np
from scipy.integrate import quad_vec

from .errors import QuadratureFailure

logger = logging.getLogger(__name__)

epsabs = 1e-12
epsrel = 1e-10
limit = 400


def adaptive(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit):
    """
    Adaptive Gauss-Kronrod integral on [a, b]

    :param f: Integrand of a scalar argument; may return an array
    :param epsabs: Absolute error goal
    :param epsrel: Error goal relative to the size of the result
    :param limit: Largest number of subintervals
    :return: (value, error estimate)
    :raise QuadratureFailure: if the error goal is not met within the limit
    """
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, error = adaptive(f, b, a, epsabs, epsrel, limit)
        return -value, error
    value, error, info = quad_vec(
        f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=True
    )
    if info.status != 0 or not np.all(np.isfinite(value)):
        raise QuadratureFailure(
            "Quadrature on [%.17g, %.17g] stopped after %d subintervals with error %.3g"
            " (goal %.3g absolute, %.3g relative)"
            % (a, b, info.intervals.shape[0], error, epsabs, epsrel)
        )
    logger.debug("Quadrature on [%g, %g]: %d evaluations, error %.3g", a, b, info.neval, error)
    if np.ndim(value) == 0:
        value = float(value)
    return value, float(error)


def composite(f, breakpoints, epsabs=epsabs, epsrel=epsrel, limit=limit):
    """
    Sum of integrals over consecutive intervals

    Every interval [t_k, t_k+1] is mapped onto [0, 1] and the pieces are
    integrated together as one vector, so the integrand is called with the
    whole array of nodes at once. The error goals and the returned error apply
    to the sum.

    :param f: Vectorised integrand; values may carry leading axes, the last
        axis running over the nodes
    :param breakpoints: Increasing interval ends, e.g. sample times
    :return: (value, error estimate)
    :raise QuadratureFailure: if the error goal is not met within the limit
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if len(breakpoints) < 2:
        return 0.0, 0.0
    left = breakpoints[:-1]
    width = np.diff(breakpoints)
    # |sum of pieces| <= sqrt(count) |pieces|_2
    root = math.sqrt(len(width))

    def pieces(s):
        return width * f(left + s * width)

    value, error = adaptive(pieces, 0.0, 1.0, epsabs / root, epsrel, limit)
    value = np.sum(value, axis=-1)
    if np.ndim(value) == 0:
        value = float(value)
    return value, root * error


@functools.lru_cache(maxsize=None)
def legendre_rule(order):
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(order)


def tensor_gauss(f, u_range, v_range, order=20):
    """
    Tensor-product Gauss-Legendre rule on a rectangle

    :param f: Integrand f(u, v) accepting broadcast arrays
    :param u_range: (u0, u1)
    :param v_range: (v0, v1)
    """
    x, w = legendre_rule(order)
    (u0, u1), (v0, v1) = u_range, v_range
    hu, hv = 0.5 * (u1 - u0), 0.5 * (v1 - v0)
    u = 0.5 * (u0 + u1) + hu * x
    v = 0.5 * (v0 + v1) + hv * x
    values = f(u[:, None], v[None, :])
    return hu * hv * float(w @ values @ w)
