"""
Differentiable inverse dynamics and gradient-descent system identification.

Link masses and Coulomb friction coefficients are learned through
unconstrained log-parameters ``alpha`` and ``beta`` (``m = exp(alpha)``,
``f_c = exp(beta)``), which keeps both strictly positive. The centre of
mass is fixed geometry and the rotational inertia is a unit-mass shape
scaled by the mass, so each link's spatial inertia is ``exp(alpha) * I_hat``.

Because inverse dynamics is linear in the spatial inertias, predicted torques
decompose as ``tau = C @ m + f_c * tanh(qdot / eps)``, where column ``k`` of
``C`` is the torque produced by link ``k`` alone with unit mass. Gradients are
then exact: ``dtau/dalpha = C * m`` and ``dtau/dbeta = diag(f_c * tanh)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DivergedFit, EmptyDataset, NonPositiveEps
from .rnea import ChainModel, JointState, _check, _forward, rnea
from .spatial import assemble_spatial_inertia, force_cross_dual

DEFAULT_EPS = 1e-2
MAX_HALVINGS = 30
MIN_DECREASE = 1e-14


@dataclass(frozen=True)
class VirtualParams:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).reshape(-1)
        b = np.asarray(self.beta, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise DimensionMismatch("alpha and beta must have equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("virtual parameters must be finite")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_physical(cls, masses, frictions) -> "VirtualParams":
        return cls(np.log(np.asarray(masses, dtype=float)), np.log(np.asarray(frictions, dtype=float)))


@dataclass(frozen=True)
class TorqueSample:
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray
    tau_measured: np.ndarray

    def __post_init__(self):
        for name in ("q", "qdot", "qddot", "tau_measured"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        if not (len(self.q) == len(self.qdot) == len(self.qddot) == len(self.tau_measured)):
            raise DimensionMismatch("sample vectors must have equal length")


@dataclass
class FitReport:
    final_params: VirtualParams
    loss_history: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.loss_history) - 1


def reparam(vp: VirtualParams) -> tuple[np.ndarray, np.ndarray]:
    """Physical ``(masses, frictions)`` from virtual parameters."""
    return np.exp(vp.alpha), np.exp(vp.beta)


def smooth_sign(x, eps: float = DEFAULT_EPS):
    """``tanh(x / eps)``, a differentiable stand-in for ``sign(x)``."""
    if not eps > 0.0:
        raise NonPositiveEps(f"eps must be positive, got {eps}")
    return np.tanh(np.asarray(x, dtype=float) / eps)


def unit_mass_contributions(model_shape: ChainModel, q, qdot, qddot) -> np.ndarray:
    """
    Matrix ``C`` with ``C[j, k]`` the torque at joint ``j`` produced by link
    ``k`` alone when its mass is 1 (friction excluded).
    """
    q, qdot, qddot = _check(model_shape, q, qdot, qddot)
    Xs, vs, as_ = _forward(model_shape, q, qdot, qddot)
    n = model_shape.dof
    C = np.zeros((n, n))
    for k, link in enumerate(model_shape.links):
        I_hat = assemble_spatial_inertia(1.0, link.com, link.rot_inertia / link.mass)
        f = I_hat @ as_[k] + force_cross_dual(vs[k]) @ (I_hat @ vs[k])
        for j in range(k, -1, -1):
            C[j, k] = model_shape.links[j].screw @ f
            if j > 0:
                f = Xs[j].T @ f
    return C


def _check_vp(model_shape: ChainModel, vp: VirtualParams) -> None:
    if vp.alpha.shape[0] != model_shape.dof:
        raise DimensionMismatch(f"expected {model_shape.dof} virtual parameters per kind")


def rnea_with_grads(model_shape: ChainModel, vp: VirtualParams, sample: TorqueSample,
                    eps: float = DEFAULT_EPS):
    """
    Predicted torques and their exact Jacobians w.r.t. ``alpha`` and ``beta``.

    Returns:
        ``(tau_pred, dtau_dalpha, dtau_dbeta)`` with the Jacobians shaped
        ``(n_joints, n_links)``.
    """
    _check_vp(model_shape, vp)
    m, fc = reparam(vp)
    C = unit_mass_contributions(model_shape, sample.q, sample.qdot, sample.qddot)
    sg = smooth_sign(sample.qdot, eps)
    tau = C @ m + fc * sg
    return tau, C * m, np.diag(fc * sg)


def physical_model(model_shape: ChainModel, vp: VirtualParams) -> ChainModel:
    """Chain with masses, inertias and frictions taken from ``vp``."""
    _check_vp(model_shape, vp)
    m, fc = reparam(vp)
    links = []
    for link, mi, fi in zip(model_shape.links, m, fc):
        links.append(type(link)(
            mass=float(mi), com=link.com, rot_inertia=link.rot_inertia * (mi / link.mass),
            friction_coeff=float(fi), joint_axis=link.joint_axis,
            offset_rotation=link.offset_rotation, offset_translation=link.offset_translation,
        ))
    return model_shape.with_links(links)


def make_dataset(model: ChainModel, states: Sequence[JointState],
                 eps: float | None = DEFAULT_EPS) -> list[TorqueSample]:
    """
    Noiseless samples labelled with the torques of ``model``.

    With ``eps`` set the labels use the same smoothed friction as the
    predictor, so the generating parameters are an exact zero of the loss;
    ``eps=None`` labels with the Coulomb ``sign`` model instead.
    """
    if eps is None:
        return [TorqueSample(s.q, s.qdot, s.qddot, rnea(model, s)) for s in states]
    vp = VirtualParams.from_physical([l.mass for l in model.links],
                                     [l.friction_coeff for l in model.links])
    m, fc = reparam(vp)
    return [TorqueSample(s.q, s.qdot, s.qddot,
                         unit_mass_contributions(model, s.q, s.qdot, s.qddot) @ m
                         + fc * smooth_sign(s.qdot, eps))
            for s in states]


class _Problem:
    """Dataset with the parameter-independent parts precomputed."""

    def __init__(self, model_shape: ChainModel, dataset: Sequence[TorqueSample], eps: float):
        if len(dataset) == 0:
            raise EmptyDataset("dataset is empty")
        smooth_sign(0.0, eps)
        self.C = np.stack([unit_mass_contributions(model_shape, s.q, s.qdot, s.qddot)
                           for s in dataset])
        self.sg = np.stack([smooth_sign(s.qdot, eps) for s in dataset])
        self.tau = np.stack([s.tau_measured for s in dataset])
        if self.tau.shape[1] != model_shape.dof:
            raise DimensionMismatch("sample size does not match the chain")

    def loss(self, vp: VirtualParams) -> float:
        m, fc = reparam(vp)
        r = self.C @ m + self.sg * fc - self.tau
        return float(np.mean(r * r))

    def loss_and_grad(self, vp: VirtualParams):
        m, fc = reparam(vp)
        r = self.C @ m + self.sg * fc - self.tau
        scale = 2.0 / r.size
        g_alpha = scale * np.einsum("sj,sjk->k", r, self.C) * m
        g_beta = scale * np.sum(r * self.sg, axis=0) * fc
        return float(np.mean(r * r)), g_alpha, g_beta


def sysid_loss(model_shape: ChainModel, vp: VirtualParams, dataset: Sequence[TorqueSample],
               eps: float = DEFAULT_EPS) -> float:
    """Mean squared torque error over all samples and joints."""
    _check_vp(model_shape, vp)
    return _Problem(model_shape, dataset, eps).loss(vp)


def sysid_grad(model_shape: ChainModel, vp: VirtualParams, dataset: Sequence[TorqueSample],
               eps: float = DEFAULT_EPS) -> tuple[np.ndarray, np.ndarray]:
    _check_vp(model_shape, vp)
    _, ga, gb = _Problem(model_shape, dataset, eps).loss_and_grad(vp)
    return ga, gb


def sysid_fit(model_shape: ChainModel, init: VirtualParams, dataset: Sequence[TorqueSample],
              lr: float = 1e-2, max_iters: int = 5000, eps: float = DEFAULT_EPS) -> FitReport:
    """
    Gradient descent on :func:`sysid_loss` with step-halving backtracking.

    Every iteration first tries the full step ``lr``; while the trial loss
    exceeds the current one the step is halved, up to 30 times. The fit stops
    after ``max_iters`` accepted steps, when no halving yields a decrease, or
    when the decrease falls below 1e-14.
    """
    if not lr > 0.0:
        raise ValueError("lr must be positive")
    if max_iters < 0:
        raise ValueError("max_iters must be non-negative")
    _check_vp(model_shape, init)
    problem = _Problem(model_shape, dataset, eps)
    vp = init
    loss, ga, gb = problem.loss_and_grad(vp)
    if not math.isfinite(loss):
        raise DivergedFit("initial loss is not finite")
    history = [loss]
    for _ in range(max_iters):
        step = lr
        for _ in range(MAX_HALVINGS + 1):
            trial = VirtualParams(vp.alpha - step * ga, vp.beta - step * gb)
            with np.errstate(over="ignore", invalid="ignore"):
                trial_loss = problem.loss(trial)
            if trial_loss <= loss:
                break
            step *= 0.5
        else:
            break
        decrease = loss - trial_loss
        vp = trial
        loss, ga, gb = problem.loss_and_grad(vp)
        if not math.isfinite(loss):
            raise DivergedFit("loss became non-finite")
        history.append(loss)
        if decrease < MIN_DECREASE:
            break
    return FitReport(vp, history)


def write_dataset_csv(path, dataset: Sequence[TorqueSample]) -> None:
    n = len(dataset[0].q)
    header = ([f"q_{i}" for i in range(1, n + 1)] + [f"qd_{i}" for i in range(1, n + 1)]
              + [f"qdd_{i}" for i in range(1, n + 1)] + [f"tau_{i}" for i in range(1, n + 1)])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for s in dataset:
            w.writerow([repr(float(x)) for x in
                        np.concatenate([s.q, s.qdot, s.qddot, s.tau_measured])])


def read_dataset_csv(path) -> list[TorqueSample]:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(header) % 4:
        raise DimensionMismatch("dataset header must hold four equal column groups")
    n = len(header) // 4
    out = []
    for row in body:
        vals = np.array([float(x) for x in row])
        out.append(TorqueSample(vals[:n], vals[n:2 * n], vals[2 * n:3 * n], vals[3 * n:]))
    return out
