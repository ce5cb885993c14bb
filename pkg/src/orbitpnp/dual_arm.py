"""
Load wrench decomposition for a rigid load held by two arms.

Unknowns are the two end-effector wrenches ``(f_e1, tau_e1, f_e2, tau_e2)``;
``f_e`` and ``tau_e`` enter the balance with a negative sign (they are the
wrenches the arms receive from the load). The load obeys::

    -f_e1 - f_e2 + C_L + f_L = m_L * a_L
    -(tau_e1 + r1 x f_e1) - (tau_e2 + r2 x f_e2) + tau_L + r_L x f_L
        = I_L * alpha_L + w_L x (I_L * w_L)

which is six equations in twelve unknowns; the minimum-norm solution is
returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrasp, NonPositiveMass
from .rnea import Wrench
from .spatial import SYMMETRY_TOL, skew

PINV_TOL = 1e-10


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(3)


@dataclass(frozen=True)
class LoadState:
    mass: float
    rot_inertia: np.ndarray
    lin_acc: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ang_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ang_acc: np.ndarray = field(default_factory=lambda: np.zeros(3))
    coriolis: np.ndarray = field(default_factory=lambda: np.zeros(3))
    external_force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    external_torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    # application point of external_force relative to the load COM
    force_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("lin_acc", "ang_vel", "ang_acc", "coriolis",
                     "external_force", "external_torque", "force_offset"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        J = np.asarray(self.rot_inertia, dtype=float).reshape(3, 3)
        object.__setattr__(self, "rot_inertia", J)
        if not self.mass > 0.0:
            raise NonPositiveMass("load mass must be positive")
        if np.linalg.norm(J - J.T) > SYMMETRY_TOL or np.linalg.eigvalsh(J).min() <= 0:
            raise ValueError("load inertia must be symmetric positive definite")

    def required_wrench(self) -> np.ndarray:
        """Right-hand side ``b`` of ``G @ x = b`` as ``[force; moment]``."""
        J = self.rot_inertia
        w = self.ang_vel
        force = self.mass * self.lin_acc - self.coriolis - self.external_force
        moment = (J @ self.ang_acc + np.cross(w, J @ w)
                  - self.external_torque - np.cross(self.force_offset, self.external_force))
        return np.concatenate([force, moment])


@dataclass(frozen=True)
class GraspConfig:
    r1: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r1", _vec(self.r1))
        object.__setattr__(self, "r2", _vec(self.r2))
        if np.allclose(self.r1, self.r2, rtol=0.0, atol=1e-12):
            raise DegenerateGrasp("grasp points must be distinct")


def grasp_map(grasp: GraspConfig) -> np.ndarray:
    """6x12 matrix mapping ``(f_e1, tau_e1, f_e2, tau_e2)`` to the net load wrench."""
    E = np.eye(3)
    G = np.zeros((6, 12))
    for k, r in enumerate((grasp.r1, grasp.r2)):
        c = 6 * k
        G[:3, c:c + 3] = -E
        G[3:, c:c + 3] = -skew(r)
        G[3:, c + 3:c + 6] = -E
    return G


def dual_arm_decompose(load: LoadState, grasp: GraspConfig) -> tuple[Wrench, Wrench]:
    G = grasp_map(grasp)
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    if s.min() <= PINV_TOL * max(s.max(), 1.0):
        raise DegenerateGrasp("grasp map is rank deficient")
    x = Vt.T @ ((U.T @ load.required_wrench()) / s)
    return Wrench(x[0:3], x[3:6]), Wrench(x[6:9], x[9:12])


def stack(w1: Wrench, w2: Wrench) -> np.ndarray:
    return np.concatenate([w1.force, w1.torque, w2.force, w2.torque])


def load_balance_residual(load: LoadState, grasp: GraspConfig, w1: Wrench, w2: Wrench) -> np.ndarray:
    """Stacked (force, moment) balance residual; zero iff both balances hold."""
    return grasp_map(grasp) @ stack(w1, w2) - load.required_wrench()
