"""
Rotation-group arithmetic on 3x3 matrices.

Rotations are plain (3, 3) numpy arrays acting on column vectors. Configurations
are (3, 3) arrays whose rows are the three position vectors, so a rotation R
acts on a configuration q as ``q @ R.T``.
"""

import logging
import math

import numpy as np
from scipy.spatial.transform import Rotation

from . import triangle_core
from .errors import AntipodalInput, AxisNotFixed, DegenerateFit, TripleCollision

logger = logging.getLogger(__name__)

zero_angle_threshold = 1e-15


def is_rotation(R, tolerance=1e-12):
    """
    Checks that R is proper orthogonal

    :param R: 3x3 matrix
    :param tolerance: Entrywise tolerance on R^T R - 1 and det R - 1
    :rtype: bool
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    if np.max(np.abs(R.T @ R - np.eye(3))) > tolerance:
        return False
    return abs(np.linalg.det(R) - 1) <= tolerance


def exp_rotation(v):
    """
    Rotation by ``|v|`` radians, counter-clockwise about ``v/|v|``

    :param v: Rotation vector (angle times unit axis)
    :return: Rotation matrix; identity for vanishing v
    :rtype: numpy.ndarray
    """
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) < zero_angle_threshold:
        return np.eye(3)
    return Rotation.from_rotvec(v).as_matrix()


def log_about_axis(R, axis, tol_axis=1e-8):
    """
    Angle of a rotation known to fix ``axis``

    :param R: Rotation matrix
    :param axis: Unit vector fixed by R
    :param tol_axis: Tolerance on |R axis - axis|
    :return: Angle in (-pi, pi] such that exp_rotation(angle * axis) == R
    :rtype: float
    :raise AxisNotFixed: if R moves the axis
    """
    R = np.asarray(R, dtype=float)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    mismatch = np.linalg.norm(R @ axis - axis)
    if mismatch > tol_axis:
        raise AxisNotFixed(
            "Rotation does not fix the axis (%s): |R u - u| = %.3g > %.3g"
            % (np.array2string(axis, precision=6), mismatch, tol_axis)
        )
    # vee of the antisymmetric part is sin(angle) * axis
    vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sine = float(vee @ axis)
    cosine = 0.5 * (np.trace(R) - 1)
    angle = math.atan2(sine, cosine)
    if angle == -math.pi:
        angle = math.pi
    return angle


def rotation_between(a, b, tol=1e-12):
    """
    Smallest rotation taking the unit vector a to the unit vector b

    The rotation axis is normal to the plane spanned by a and b. Identical
    inputs give the identity.

    :param a: Unit 3-vector
    :param b: Unit 3-vector
    :param tol: Antipodality tolerance on a.b + 1
    :rtype: numpy.ndarray
    :raise AntipodalInput: if a and b are (nearly) opposite
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cosine = float(a @ b)
    if cosine < -1 + tol:
        raise AntipodalInput(
            "Rotation plane undefined for antipodal vectors (a.b = %.17g)" % cosine
        )
    cross = np.cross(a, b)
    sine = np.linalg.norm(cross)
    if sine == 0:
        return np.eye(3)
    angle = math.atan2(sine, cosine)
    return exp_rotation(angle * cross / sine)


def fit_similarity(q0, q1, m, collinear_threshold=triangle_core.collinear_threshold):
    """
    Weighted similarity fit: minimise sum_a m_a |q1_a - s R q0_a|^2

    :param q0: Reference configuration, (3, 3) array of rows
    :param q1: Target configuration
    :param m: Masses
    :param collinear_threshold: Collinearity measure below which R is undetermined
    :return: (scale, rotation, residual)
    :rtype: tuple
    :raise TripleCollision: if q0 is the triple collision
    :raise DegenerateFit: if q0 is collinear
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    m = np.asarray(m, dtype=float)
    I0 = triangle_core.polar_moment(q0, m)
    if I0 == 0:
        raise TripleCollision("Cannot fit a similarity to the triple collision")
    if triangle_core.collinearity(q0, m) < collinear_threshold:
        raise DegenerateFit(
            "Reference configuration is collinear; rotation about the line"
            " is undetermined"
        )
    H = (q0 * m[:, None]).T @ q1
    U, singular, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    D = np.diag([1.0, 1.0, d])
    R = Vt.T @ D @ U.T
    scale = float(np.sum(singular * np.diag(D))) / I0
    difference = q1 - scale * q0 @ R.T
    residual = float(np.sum(m * np.sum(difference * difference, axis=1)))
    logger.debug("similarity fit: scale %.12g residual %.3g", scale, residual)
    return scale, R, residual


def planar_rotation_angle(q0, q1, m, normal=(0, 0, 1)):
    """
    Angle of the rotation about ``normal`` best aligning q0 with q1

    Both configurations are assumed to lie in the plane normal to ``normal``.
    Unlike :func:`fit_similarity` this is well defined for collinear inputs.

    :param q0: Reference configuration
    :param q1: Target configuration
    :param m: Masses
    :param normal: Unit normal of the common plane
    :return: Angle in (-pi, pi]
    :rtype: float
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    m = np.asarray(m, dtype=float)
    normal = np.asarray(normal, dtype=float)
    sine = float(np.sum(m * (np.cross(q0, q1) @ normal)))
    cosine = float(np.sum(m * np.sum(q0 * q1, axis=1)))
    angle = math.atan2(sine, cosine)
    if angle == -math.pi:
        angle = math.pi
    return angle


def rotate(q, R):
    """Applies R to every row of a configuration (or velocity) array."""
    return np.asarray(q, dtype=float) @ np.asarray(R, dtype=float).T
