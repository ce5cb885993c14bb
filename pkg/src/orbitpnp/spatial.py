"""
Spatial (6-D) vector algebra.

Spatial vectors are plain ``numpy`` arrays of shape (6,) ordered
``[angular; linear]``; for a motion vector that is ``[omega; v]`` and for a
force vector ``[torque; force]``. Spatial matrices are (6, 6) arrays whose
3x3 blocks follow the same ordering, so the spatial inertia is::

    I = [[ J       , m * skew(p) ],
         [-m*skew(p), m * E3     ]]

with ``J`` the rotational inertia about the frame origin and ``p`` the
centre of mass in that frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricInertia, NonPositiveMass

SYMMETRY_TOL = 1e-9


def skew(v) -> np.ndarray:
    """
    Cross-product matrix of a 3-vector.

    ``skew(v) @ w == np.cross(v, w)`` for every ``w``.

    Example:
        >>> skew([1.0, 2.0, 3.0])
        array([[ 0., -3.,  2.],
               [ 3.,  0., -1.],
               [-2.,  1.,  0.]])
    """
    x, y, z = (float(c) for c in np.asarray(v, dtype=float).reshape(3))
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def spatial_vector(angular, linear) -> np.ndarray:
    return np.concatenate([np.asarray(angular, dtype=float).reshape(3),
                           np.asarray(linear, dtype=float).reshape(3)])


def split(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return the (angular, linear) halves of a spatial vector."""
    return v[:3], v[3:]


def motion_cross(v: np.ndarray) -> np.ndarray:
    """
    Spatial cross operator for motion vectors.

    For a twist ``v = [omega; v_lin]`` this is::

        [[skew(omega), 0          ],
         [skew(v_lin), skew(omega)]]

    so ``motion_cross(v) @ m`` is the spatial cross product ``v x m``.
    """
    v = np.asarray(v, dtype=float).reshape(6)
    w = skew(v[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = w
    out[3:, :3] = skew(v[3:])
    out[3:, 3:] = w
    return out


def force_cross_dual(v: np.ndarray) -> np.ndarray:
    """Dual cross operator ``-motion_cross(v).T`` acting on force vectors."""
    return -motion_cross(v).T


def assemble_spatial_inertia(mass: float, com, rot_inertia) -> np.ndarray:
    """
    Build the 6x6 spatial inertia of a rigid body.

    Args:
        mass: body mass in kg, strictly positive.
        com: centre of mass in the body frame (m).
        rot_inertia: 3x3 rotational inertia about the body frame origin.

    Raises:
        NonPositiveMass: if ``mass <= 0``.
        AsymmetricInertia: if ``rot_inertia`` is not symmetric to 1e-9.
    """
    if not mass > 0.0:
        raise NonPositiveMass(f"mass must be positive, got {mass}")
    J = np.asarray(rot_inertia, dtype=float).reshape(3, 3)
    if np.linalg.norm(J - J.T) > SYMMETRY_TOL:
        raise AsymmetricInertia("rotational inertia is not symmetric")
    mc = mass * skew(com)
    out = np.empty((6, 6))
    out[:3, :3] = J
    out[:3, 3:] = mc
    out[3:, :3] = -mc
    out[3:, 3:] = mass * np.eye(3)
    return out


def apply_inertia(inertia: np.ndarray, v: np.ndarray) -> np.ndarray:
    return inertia @ v


@dataclass(frozen=True)
class SpatialInertia:
    """Mass, centre of mass and rotational inertia (about the frame origin)."""

    mass: float
    com: np.ndarray
    rot_inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "com", np.asarray(self.com, dtype=float).reshape(3))
        object.__setattr__(self, "rot_inertia",
                           np.asarray(self.rot_inertia, dtype=float).reshape(3, 3))
        if not self.mass > 0.0:
            raise NonPositiveMass(f"mass must be positive, got {self.mass}")
        if np.linalg.norm(self.rot_inertia - self.rot_inertia.T) > SYMMETRY_TOL:
            raise AsymmetricInertia("rotational inertia is not symmetric")

    def matrix(self) -> np.ndarray:
        return assemble_spatial_inertia(self.mass, self.com, self.rot_inertia)


def inertia_about_origin(mass: float, com, inertia_at_com) -> np.ndarray:
    """Parallel-axis shift of a COM inertia to the frame origin."""
    c = np.asarray(com, dtype=float).reshape(3)
    Ic = np.asarray(inertia_at_com, dtype=float).reshape(3, 3)
    return Ic + mass * (np.dot(c, c) * np.eye(3) - np.outer(c, c))


def motion_transform(rotation: np.ndarray, translation) -> np.ndarray:
    """
    Plucker transform taking motion vectors from a parent frame to a child
    frame whose axes are ``rotation`` (columns, in parent coordinates) and
    whose origin sits at ``translation`` in the parent frame.
    """
    E = np.asarray(rotation, dtype=float).T
    r = np.asarray(translation, dtype=float).reshape(3)
    X = np.zeros((6, 6))
    X[:3, :3] = E
    X[3:, :3] = -E @ skew(r)
    X[3:, 3:] = E
    return X
