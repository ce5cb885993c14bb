"""
Dynamics invariant suite run by ``orbitpnp dynamics-check``.

Each check returns a :class:`CheckResult` with the worst observed error and
the threshold it is held to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diff_rnea import (
    DEFAULT_EPS,
    TorqueSample,
    VirtualParams,
    make_dataset,
    reparam,
    rnea_with_grads,
    sysid_fit,
)
from .dual_arm import GraspConfig, LoadState, dual_arm_decompose, grasp_map, load_balance_residual, stack
from .rnea import ChainModel, JointState, LinkParams, kinetic_energy, rnea
from .spatial import inertia_about_origin


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.threshold)


def planar_two_link(m1=1.3, m2=0.7, l1=1.1, lc1=0.5, lc2=0.4, I1=0.05, I2=0.03,
                    friction=(0.0, 0.0)) -> ChainModel:
    """Two revolute z-joints along x; ``I1``/``I2`` are COM inertias."""
    links = (
        LinkParams(m1, [lc1, 0, 0], inertia_about_origin(m1, [lc1, 0, 0], I1 * np.eye(3)), friction[0]),
        LinkParams(m2, [lc2, 0, 0], inertia_about_origin(m2, [lc2, 0, 0], I2 * np.eye(3)), friction[1],
                   offset_translation=[l1, 0, 0]),
    )
    return ChainModel(links)


def spatial_three_link(friction=(0.0, 0.0, 0.0)) -> ChainModel:
    """A non-planar 3-joint arm with mixed joint axes and offsets."""
    def box(m, com, d):
        return inertia_about_origin(m, com, np.diag(d))
    ax = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    links = (
        LinkParams(2.0, [0.0, 0.0, 0.2], box(2.0, [0, 0, 0.2], [0.03, 0.03, 0.01]), friction[0]),
        LinkParams(1.5, [0.3, 0.05, 0.0], box(1.5, [0.3, 0.05, 0], [0.01, 0.04, 0.04]), friction[1],
                   joint_axis=[0.0, 1.0, 0.0], offset_translation=[0.0, 0.1, 0.4]),
        LinkParams(0.8, [0.2, 0.0, 0.02], box(0.8, [0.2, 0, 0.02], [0.005, 0.02, 0.02]), friction[2],
                   joint_axis=ax, offset_translation=[0.6, 0.0, 0.0]),
    )
    return ChainModel(links)


def double_pendulum_torque(p: dict, q, qd, qdd) -> np.ndarray:
    """Closed-form zero-gravity double pendulum (Lagrangian)."""
    m1, m2, l1, lc1, lc2, I1, I2 = (p[k] for k in ("m1", "m2", "l1", "lc1", "lc2", "I1", "I2"))
    c2, s2 = np.cos(q[1]), np.sin(q[1])
    M11 = I1 + I2 + m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2)
    M12 = I2 + m2 * (lc2**2 + l1 * lc2 * c2)
    M22 = I2 + m2 * lc2**2
    h = m2 * l1 * lc2 * s2
    return np.array([
        M11 * qdd[0] + M12 * qdd[1] - h * (2 * qd[0] * qd[1] + qd[1] ** 2),
        M12 * qdd[0] + M22 * qdd[1] + h * qd[0] ** 2,
    ])


def check_lagrangian(rng: np.random.Generator, n: int = 100) -> CheckResult:
    p = dict(m1=1.3, m2=0.7, l1=1.1, lc1=0.5, lc2=0.4, I1=0.05, I2=0.03)
    model = planar_two_link(**p)
    worst = 0.0
    for _ in range(n):
        q, qd, qdd = rng.uniform(-3.0, 3.0, (3, 2))
        ref = double_pendulum_torque(p, q, qd, qdd)
        tau = rnea(model, JointState(q, qd, qdd))
        worst = max(worst, float(np.max(np.abs(tau - ref) / np.maximum(np.abs(ref), 1e-12))))
    return CheckResult("rnea_vs_lagrangian", worst, 1e-9)


def trajectory(t: float, n: int):
    """Smooth joint trajectory with analytic derivatives."""
    k = np.arange(1, n + 1)
    a, w, ph = 0.8 / k, 0.7 + 0.45 * k, 0.3 * k
    q = a * np.sin(w * t + ph)
    qd = a * w * np.cos(w * t + ph)
    qdd = -a * w * w * np.sin(w * t + ph)
    return q, qd, qdd


def power_gap(model: ChainModel, duration: float = 5.0, samples: int = 100, h: float = 1e-6) -> np.ndarray:
    """``tau . qdot - dKE/dt`` at evenly spaced instants of :func:`trajectory`."""
    out = []
    for t in np.linspace(0.0, duration, samples + 1):
        q, qd, qdd = trajectory(t, model.dof)
        tau = rnea(model, JointState(q, qd, qdd))
        qp, qdp, _ = trajectory(t + h, model.dof)
        qm, qdm, _ = trajectory(t - h, model.dof)
        dke = (kinetic_energy(model, qp, qdp) - kinetic_energy(model, qm, qdm)) / (2 * h)
        out.append((tau @ qd - dke, np.sum([l.friction_coeff for l in model.links] * np.abs(qd))))
    return np.array(out)


def check_power(model: ChainModel, tag: str) -> CheckResult:
    gaps = power_gap(model)
    return CheckResult(f"power_balance[{tag}]", float(np.max(np.abs(gaps[:, 0] - gaps[:, 1]))), 1e-6)


def check_linearity(model: ChainModel, tag: str, rng: np.random.Generator, n: int = 20) -> CheckResult:
    frictionless = model.with_links([
        LinkParams(l.mass, l.com, l.rot_inertia, 0.0, l.joint_axis, l.offset_rotation, l.offset_translation)
        for l in model.links])
    worst = 0.0
    for _ in range(n):
        q, qd, a1, a2 = rng.uniform(-2, 2, (4, model.dof))
        c1, c2 = rng.uniform(-2, 2, 2)
        base = rnea(frictionless, JointState(q, qd, np.zeros(model.dof)))
        lhs = rnea(frictionless, JointState(q, qd, c1 * a1 + c2 * a2)) - base
        rhs = (c1 * (rnea(frictionless, JointState(q, qd, a1)) - base)
               + c2 * (rnea(frictionless, JointState(q, qd, a2)) - base))
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))))
    return CheckResult(f"rnea_linearity[{tag}]", worst, 1e-9)


def check_friction_antisymmetry(model: ChainModel, tag: str, rng: np.random.Generator, n: int = 20) -> CheckResult:
    fc = np.array([max(l.friction_coeff, 0.3) for l in model.links])
    with_f = model.with_links([LinkParams(l.mass, l.com, l.rot_inertia, f, l.joint_axis, l.offset_rotation,
                                          l.offset_translation) for l, f in zip(model.links, fc)])
    without = model.with_links([LinkParams(l.mass, l.com, l.rot_inertia, 0.0, l.joint_axis, l.offset_rotation,
                                           l.offset_translation) for l in model.links])
    worst = 0.0
    for _ in range(n):
        q, qd, qdd = rng.uniform(-2, 2, (3, model.dof))
        for sign in (1.0, -1.0):
            s = JointState(q, sign * qd, qdd)
            diff = rnea(with_f, s) - rnea(without, s)
            worst = max(worst, float(np.max(np.abs(diff - fc * np.sign(sign * qd)))))
    return CheckResult(f"friction_antisymmetry[{tag}]", worst, 1e-12)


def check_gradients(model: ChainModel, tag: str, rng: np.random.Generator, n: int = 50,
                    h: float = 1e-6) -> CheckResult:
    worst = 0.0
    dof = model.dof
    for _ in range(n):
        vp = VirtualParams(rng.uniform(-1, 1, dof), rng.uniform(-2, 0.5, dof))
        q, qd, qdd = rng.uniform(-2, 2, (3, dof))
        sample = TorqueSample(q, qd, qdd, np.zeros(dof))
        _, ga, gb = rnea_with_grads(model, vp, sample)
        for which, analytic in (("alpha", ga), ("beta", gb)):
            fd = np.zeros((dof, dof))
            for k in range(dof):
                e = np.zeros(dof)
                e[k] = h
                if which == "alpha":
                    plus, minus = VirtualParams(vp.alpha + e, vp.beta), VirtualParams(vp.alpha - e, vp.beta)
                else:
                    plus, minus = VirtualParams(vp.alpha, vp.beta + e), VirtualParams(vp.alpha, vp.beta - e)
                fd[:, k] = (rnea_with_grads(model, plus, sample)[0]
                            - rnea_with_grads(model, minus, sample)[0]) / (2 * h)
            scale = max(1.0, float(np.max(np.abs(analytic))))
            worst = max(worst, float(np.max(np.abs(analytic - fd))) / scale)
    return CheckResult(f"gradient_fd[{tag}]", worst, 1e-5)


def check_smooth_limit(model: ChainModel, tag: str, rng: np.random.Generator, n: int = 50) -> CheckResult:
    fc = np.array([max(l.friction_coeff, 0.3) for l in model.links])
    physical = model.with_links([LinkParams(l.mass, l.com, l.rot_inertia, f, l.joint_axis, l.offset_rotation,
                                            l.offset_translation) for l, f in zip(model.links, fc)])
    vp = VirtualParams.from_physical([l.mass for l in model.links], fc)
    worst = 0.0
    for _ in range(n):
        q, qdd = rng.uniform(-2, 2, (2, model.dof))
        qd = rng.uniform(0.01, 2.0, model.dof) * rng.choice([-1.0, 1.0], model.dof)
        smooth = rnea_with_grads(model, vp, TorqueSample(q, qd, qdd, np.zeros(model.dof)), 1e-6)[0]
        worst = max(worst, float(np.max(np.abs(smooth - rnea(physical, JointState(q, qd, qdd))))))
    return CheckResult(f"smooth_friction_limit[{tag}]", worst, 1e-4)


def check_sysid(rng: np.random.Generator, samples: int = 200, lr: float = 1e-2,
                max_iters: int = 5000) -> CheckResult:
    masses, frictions = np.array([2.0, 1.2]), np.array([1.0, 0.6])
    model = planar_two_link(masses[0], masses[1], 1.0, 0.5, 0.5, 0.05, 0.03, tuple(frictions))
    states = [JointState(rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2, 2), rng.uniform(-4, 4, 2))
              for _ in range(samples)]
    data = make_dataset(model, states, DEFAULT_EPS)
    init = VirtualParams.from_physical(masses * rng.uniform(0.5, 1.5, 2), frictions * rng.uniform(0.5, 1.5, 2))
    report = sysid_fit(model, init, data, lr=lr, max_iters=max_iters)
    m, f = reparam(report.final_params)
    err = float(np.max(np.abs(np.concatenate([m / masses, f / frictions]) - 1.0)))
    return CheckResult("sysid_recovery", err, 1e-2)


def random_load_and_grasp(rng: np.random.Generator) -> tuple[LoadState, GraspConfig]:
    A = rng.normal(size=(3, 3))
    J = A @ A.T + 0.1 * np.eye(3)
    load = LoadState(
        mass=rng.uniform(0.5, 20.0), rot_inertia=J,
        lin_acc=rng.normal(size=3), ang_vel=rng.normal(size=3), ang_acc=rng.normal(size=3),
        coriolis=rng.normal(size=3), external_force=rng.normal(size=3),
        external_torque=rng.normal(size=3), force_offset=rng.normal(size=3) * 0.3,
    )
    return load, GraspConfig(rng.normal(size=3), rng.normal(size=3))


def check_dual_arm(rng: np.random.Generator, n: int = 1000, alternatives: int = 10) -> list[CheckResult]:
    worst_res, worst_norm = 0.0, 0.0
    for _ in range(n):
        load, grasp = random_load_and_grasp(rng)
        w1, w2 = dual_arm_decompose(load, grasp)
        worst_res = max(worst_res, float(np.linalg.norm(load_balance_residual(load, grasp, w1, w2))))
        x = stack(w1, w2)
        null = np.linalg.svd(grasp_map(grasp))[2][6:]
        for _ in range(alternatives):
            alt = x + null.T @ rng.normal(size=6)
            worst_norm = max(worst_norm, float(np.linalg.norm(x) - np.linalg.norm(alt)))
    return [CheckResult("dual_arm_residual", worst_res, 1e-9),
            CheckResult("dual_arm_min_norm", max(worst_norm, 0.0), 1e-12)]


CheckFn = Callable[[np.random.Generator], CheckResult]


def registered_checks(chains: dict[str, ChainModel]) -> list[tuple[str, CheckFn]]:
    """Named checks, one report row each; per-chain checks repeat for every chain."""
    out: list[tuple[str, CheckFn]] = [("rnea_vs_lagrangian", check_lagrangian)]
    for tag, model in chains.items():
        out += [
            (f"power_balance[{tag}]", lambda r, m=model, t=tag: check_power(m, t)),
            (f"rnea_linearity[{tag}]", lambda r, m=model, t=tag: check_linearity(m, t, r)),
            (f"friction_antisymmetry[{tag}]", lambda r, m=model, t=tag: check_friction_antisymmetry(m, t, r)),
            (f"gradient_fd[{tag}]", lambda r, m=model, t=tag: check_gradients(m, t, r)),
            (f"smooth_friction_limit[{tag}]", lambda r, m=model, t=tag: check_smooth_limit(m, t, r)),
        ]
    out += [
        ("sysid_recovery", check_sysid),
        ("dual_arm_residual", lambda r: check_dual_arm(r)[0]),
        ("dual_arm_min_norm", lambda r: check_dual_arm(r)[1]),
    ]
    return out


def run_checks(chains: dict[str, ChainModel], seed: int = 0) -> list[CheckResult]:
    """Run every registered check with its own generator seeded by ``(seed, index)``."""
    return [fn(np.random.default_rng([seed, i])) for i, (_, fn) in enumerate(registered_checks(chains))]


def default_chains() -> dict[str, ChainModel]:
    return {
        "planar2": planar_two_link(friction=(0.4, 0.25)),
        "spatial3": spatial_three_link(friction=(0.5, 0.3, 0.2)),
    }
