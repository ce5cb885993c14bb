"""
Recursive Newton-Euler inverse dynamics for serial chains of revolute
joints, with Coulomb joint friction.

Each link frame sits at its joint. Link ``i``'s frame is obtained from its
parent by the fixed ``joint_offset`` followed by a rotation of ``q[i]``
about ``joint_axis`` (expressed in the link frame), so the joint screw is
``S_i = [axis; 0]`` in ``[angular; linear]`` ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidLink, NonFiniteInput, NonPositiveMass
from .spatial import (
    SYMMETRY_TOL,
    assemble_spatial_inertia,
    force_cross_dual,
    motion_cross,
    motion_transform,
)


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit ``axis``."""
    k = np.asarray(axis, dtype=float)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    s, c = np.sin(angle), np.cos(angle)
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


@dataclass(frozen=True)
class LinkParams:
    """Inertial, friction and joint description of one link.

    ``rot_inertia`` is taken about the link frame origin (the joint), not
    about the centre of mass.
    """

    mass: float
    com: np.ndarray
    rot_inertia: np.ndarray
    friction_coeff: float = 0.0
    joint_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    offset_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    offset_translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        conv = {
            "com": (3,),
            "rot_inertia": (3, 3),
            "joint_axis": (3,),
            "offset_rotation": (3, 3),
            "offset_translation": (3,),
        }
        for name, shape in conv.items():
            arr = np.asarray(getattr(self, name), dtype=float).reshape(shape)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.mass > 0.0:
            raise NonPositiveMass(f"link mass must be positive, got {self.mass}")
        if not self.friction_coeff >= 0.0:
            raise InvalidLink("friction_coeff must be non-negative")
        if abs(np.linalg.norm(self.joint_axis) - 1.0) > 1e-12:
            raise InvalidLink("joint_axis must be a unit vector")
        J = self.rot_inertia
        if np.linalg.norm(J - J.T) > SYMMETRY_TOL:
            raise InvalidLink("rot_inertia must be symmetric")
        if np.linalg.eigvalsh(J).min() <= 0.0:
            raise InvalidLink("rot_inertia must be positive definite")
        R = self.offset_rotation
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-9 or np.linalg.det(R) < 0:
            raise InvalidLink("offset_rotation must be a proper rotation")

    @property
    def screw(self) -> np.ndarray:
        return np.concatenate([self.joint_axis, np.zeros(3)])

    def spatial_inertia(self) -> np.ndarray:
        return assemble_spatial_inertia(self.mass, self.com, self.rot_inertia)

    def joint_transform(self, q: float) -> np.ndarray:
        R = self.offset_rotation @ rotation_about(self.joint_axis, q)
        return motion_transform(R, self.offset_translation)


@dataclass(frozen=True)
class ChainModel:
    links: tuple[LinkParams, ...]
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise InvalidLink("a chain needs at least one link")
        object.__setattr__(self, "links", links)
        g = np.asarray(self.gravity, dtype=float).reshape(3)
        g.setflags(write=False)
        object.__setattr__(self, "gravity", g)

    @property
    def dof(self) -> int:
        return len(self.links)

    def with_links(self, links: Sequence[LinkParams]) -> "ChainModel":
        return ChainModel(tuple(links), self.gravity)

    @classmethod
    def from_dict(cls, data: dict) -> "ChainModel":
        links = []
        for ld in data["links"]:
            links.append(LinkParams(
                mass=float(ld["mass"]),
                com=ld.get("com", [0.0, 0.0, 0.0]),
                rot_inertia=ld["rot_inertia"],
                friction_coeff=float(ld.get("friction", 0.0)),
                joint_axis=ld.get("axis", [0.0, 0.0, 1.0]),
                offset_rotation=ld.get("offset_rotation", np.eye(3)),
                offset_translation=ld.get("offset_translation", [0.0, 0.0, 0.0]),
            ))
        return cls(tuple(links), np.asarray(data.get("gravity", [0.0, 0.0, 0.0]), dtype=float))


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray

    def __post_init__(self):
        for name in ("q", "qdot", "qddot"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        if not (len(self.q) == len(self.qdot) == len(self.qddot)):
            raise DimensionMismatch("q, qdot and qddot must have equal length")


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float).reshape(3))

    def spatial(self) -> np.ndarray:
        """Spatial force ``[torque; force]``."""
        return np.concatenate([self.torque, self.force])


def _check(model: ChainModel, *vectors) -> list[np.ndarray]:
    out = []
    for v in vectors:
        a = np.asarray(v, dtype=float).reshape(-1)
        if a.shape[0] != model.dof:
            raise DimensionMismatch(f"expected {model.dof} joint values, got {a.shape[0]}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("joint vectors must be finite")
        out.append(a)
    return out


def _transforms(model: ChainModel, q: np.ndarray) -> list[np.ndarray]:
    return [link.joint_transform(qi) for link, qi in zip(model.links, q)]


def _forward(model, q, qdot, qddot, gravity=True):
    Xs = _transforms(model, q)
    v_prev = np.zeros(6)
    a_prev = np.zeros(6)
    if gravity:
        a_prev[3:] = -model.gravity
    vs, as_ = [], []
    for link, X, qd, qdd in zip(model.links, Xs, qdot, qddot):
        S = link.screw
        v = X @ v_prev + S * qd
        a = X @ a_prev + S * qdd + motion_cross(v) @ (S * qd)
        vs.append(v)
        as_.append(a)
        v_prev, a_prev = v, a
    return Xs, vs, as_


def propagate_velocity(model: ChainModel, q, qdot) -> list[np.ndarray]:
    """Spatial velocity of every link in its own frame, base to tip."""
    q, qdot = _check(model, q, qdot)
    _, vs, _ = _forward(model, q, qdot, np.zeros(model.dof), gravity=False)
    return vs


def propagate_acceleration(model: ChainModel, q, qdot, qddot) -> list[np.ndarray]:
    """Spatial acceleration of every link, seeded with ``-gravity`` at the base."""
    q, qdot, qddot = _check(model, q, qdot, qddot)
    _, _, as_ = _forward(model, q, qdot, qddot)
    return as_


def coulomb_sign(x: np.ndarray) -> np.ndarray:
    return np.sign(x)  # sign(0) == 0


def rnea(model: ChainModel, state: JointState, tip_wrench: Wrench | None = None) -> np.ndarray:
    """
    Joint torques for the given motion.

    ``tip_wrench`` is the wrench the last link exerts on its environment,
    expressed in the last link frame about its origin.
    """
    q, qdot, qddot = _check(model, state.q, state.qdot, state.qddot)
    Xs, vs, as_ = _forward(model, q, qdot, qddot)
    n = model.dof
    fs = []
    for link, v, a in zip(model.links, vs, as_):
        I = link.spatial_inertia()
        fs.append(I @ a + force_cross_dual(v) @ (I @ v))
    if tip_wrench is not None:
        fs[-1] = fs[-1] + tip_wrench.spatial()
    tau = np.empty(n)
    for i in range(n - 1, -1, -1):
        link = model.links[i]
        tau[i] = link.screw @ fs[i] + link.friction_coeff * coulomb_sign(qdot[i])
        if i > 0:
            fs[i - 1] = fs[i - 1] + Xs[i].T @ fs[i]
    return tau


def kinetic_energy(model: ChainModel, q, qdot) -> float:
    vs = propagate_velocity(model, q, qdot)
    return float(sum(0.5 * v @ link.spatial_inertia() @ v for link, v in zip(model.links, vs)))


def forward_kinematics(model: ChainModel, q) -> list[tuple[np.ndarray, np.ndarray]]:
    """World pose ``(R, p)`` of each link frame."""
    (q,) = _check(model, q)
    R = np.eye(3)
    p = np.zeros(3)
    poses = []
    for link, qi in zip(model.links, q):
        p = p + R @ link.offset_translation
        R = R @ link.offset_rotation @ rotation_about(link.joint_axis, qi)
        poses.append((R.copy(), p.copy()))
    return poses
