"""
Acceptance criteria, one test each. Every test prints a single
``ACCEPTANCE <n> PASS|FAIL`` line (also repeated in the pytest summary).
"""

import csv
import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, planar_chain
from orbitpnp import cli
from orbitpnp.allocation import EnvSpec, QHyper, brute_force_optimal, fifo_assign, spt_assign, train_q_policy
from orbitpnp.config import Config
from orbitpnp.debris import FieldKind, FieldSpec, Region, grid_sample, make_field, poisson_disk_sample
from orbitpnp.diff_rnea import (
    TorqueSample,
    VirtualParams,
    make_dataset,
    reparam,
    rnea_with_grads,
    sysid_fit,
)
from orbitpnp.dual_arm import GraspConfig, LoadState, dual_arm_decompose, grasp_map, stack
from orbitpnp.rng import XorShift64Star, derive_seed
from orbitpnp.rnea import ChainModel, JointState, LinkParams, kinetic_energy, rnea
from orbitpnp.sim import RobotSpec, run_episode
from orbitpnp.spatial import inertia_about_origin


def report(n, title, ok, detail):
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# 1 ------------------------------------------------------------------------

def lagrange_double_pendulum(q, qd, qdd, m1, m2, l1, lc1, lc2, I1, I2):
    c2, s2 = math.cos(q[1]), math.sin(q[1])
    M11 = I1 + I2 + m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2)
    M12 = I2 + m2 * (lc2**2 + l1 * lc2 * c2)
    M22 = I2 + m2 * lc2**2
    h = m2 * l1 * lc2 * s2
    return np.array([M11 * qdd[0] + M12 * qdd[1] - h * (2 * qd[0] * qd[1] + qd[1] ** 2),
                     M12 * qdd[0] + M22 * qdd[1] + h * qd[0] ** 2])


def test_1_rnea_matches_lagrangian():
    p = dict(m1=1.3, m2=0.7, l1=1.1, lc1=0.5, lc2=0.4, I1=0.05, I2=0.03)
    model = planar_chain(masses=(p["m1"], p["m2"]), lengths=(p["l1"],), coms=(p["lc1"], p["lc2"]),
                         inertias=(p["I1"], p["I2"]))
    rng = np.random.default_rng(1)
    states = rng.uniform(-3, 3, (100, 3, 2))
    t0 = time.perf_counter()
    worst = 0.0
    for q, qd, qdd in states:
        tau = rnea(model, JointState(q, qd, qdd))
        ref = lagrange_double_pendulum(q, qd, qdd, **p)
        worst = max(worst, float(np.max(np.abs(tau - ref) / np.abs(ref))))
    dt = time.perf_counter() - t0
    report(1, "RNEA vs Lagrangian", worst < 1e-9 and dt < 1.0,
           f"max rel err {worst:.2e} (< 1e-9), {dt:.3f} s (< 1 s)")


# 2 ------------------------------------------------------------------------

def three_link(friction):
    def link(m, com, d, f, **kw):
        return LinkParams(m, com, inertia_about_origin(m, com, np.diag(d)), f, **kw)
    return ChainModel((
        link(2.0, [0, 0, 0.2], [0.03, 0.03, 0.01], friction[0]),
        link(1.5, [0.3, 0.05, 0], [0.01, 0.04, 0.04], friction[1], joint_axis=[0, 1, 0],
             offset_translation=[0, 0.1, 0.4]),
        link(0.8, [0.2, 0, 0.02], [0.005, 0.02, 0.02], friction[2],
             joint_axis=np.array([1.0, 0, 1.0]) / math.sqrt(2), offset_translation=[0.6, 0, 0]),
    ))


def motion(t):
    k = np.arange(1, 4)
    a, w, ph = 0.8 / k, 0.7 + 0.45 * k, 0.3 * k
    return a * np.sin(w * t + ph), a * w * np.cos(w * t + ph), -a * w * w * np.sin(w * t + ph)


def test_2_power_balance():
    fc = np.array([0.5, 0.3, 0.2])
    free, rough = three_link((0, 0, 0)), three_link(fc)
    h = 1e-6
    worst_free = worst_rough = 0.0
    for t in np.arange(0.0, 5.0 + 1e-12, 0.01):
        q, qd, qdd = motion(t)
        qp, qdp, _ = motion(t + h)
        qm, qdm, _ = motion(t - h)
        dke = (kinetic_energy(free, qp, qdp) - kinetic_energy(free, qm, qdm)) / (2 * h)
        worst_free = max(worst_free, abs(rnea(free, JointState(q, qd, qdd)) @ qd - dke))
        gap = rnea(rough, JointState(q, qd, qdd)) @ qd - dke
        worst_rough = max(worst_rough, abs(gap - fc @ np.abs(qd)))
    report(2, "power balance", worst_free < 1e-6 and worst_rough < 1e-6,
           f"frictionless {worst_free:.2e}, Coulomb excess {worst_rough:.2e} (< 1e-6, 501 instants over 5 s)")


# 3 ------------------------------------------------------------------------

def test_3_gradient_fidelity():
    rng = np.random.default_rng(3)
    model = three_link((0, 0, 0))
    h = 1e-6
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        vp = VirtualParams(rng.uniform(-1, 1, 3), rng.uniform(-2, 0.5, 3))
        s = TorqueSample(*rng.uniform(-2, 2, (3, 3)), np.zeros(3))
        _, ga, gb = rnea_with_grads(model, vp, s)
        for k in range(3):
            e = np.eye(3)[k] * h
            fa = (rnea_with_grads(model, VirtualParams(vp.alpha + e, vp.beta), s)[0]
                  - rnea_with_grads(model, VirtualParams(vp.alpha - e, vp.beta), s)[0]) / (2 * h)
            fb = (rnea_with_grads(model, VirtualParams(vp.alpha, vp.beta + e), s)[0]
                  - rnea_with_grads(model, VirtualParams(vp.alpha, vp.beta - e), s)[0]) / (2 * h)
            scale = max(1.0, float(np.max(np.abs(np.concatenate([ga, gb])))))
            worst = max(worst, float(np.max(np.abs(fa - ga[:, k]))) / scale,
                        float(np.max(np.abs(fb - gb[:, k]))) / scale)
    dt = time.perf_counter() - t0
    report(3, "gradient fidelity", worst < 1e-5 and dt < 5.0,
           f"max rel err {worst:.2e} (< 1e-5), {dt:.2f} s (< 5 s)")


# 4 ------------------------------------------------------------------------

def test_4_sysid_recovery():
    masses, frictions = np.array([2.0, 1.2]), np.array([1.0, 0.6])
    model = planar_chain(masses=masses, lengths=(1.0,), coms=(0.5, 0.5), inertias=(0.05, 0.03),
                         friction=frictions)
    rng = np.random.default_rng(4)
    states = [JointState(rng.uniform(-np.pi, np.pi, 2), rng.uniform(-2, 2, 2), rng.uniform(-4, 4, 2))
              for _ in range(200)]
    data = make_dataset(model, states)
    init = VirtualParams.from_physical(masses * rng.uniform(0.5, 1.5, 2), frictions * rng.uniform(0.5, 1.5, 2))
    t0 = time.perf_counter()
    fit = sysid_fit(model, init, data, lr=1e-2, max_iters=5000)
    dt = time.perf_counter() - t0
    m, f = reparam(fit.final_params)
    err = float(np.max(np.abs(np.concatenate([m / masses, f / frictions]) - 1)))
    monotone = all(b <= a for a, b in zip(fit.loss_history, fit.loss_history[1:]))
    ok = err < 0.01 and fit.iterations <= 5000 and monotone and dt < 60.0
    report(4, "system-ID recovery", ok,
           f"max rel err {err:.2e} (< 1e-2) in {fit.iterations} steps (<= 5000), "
           f"monotone={monotone}, {dt:.2f} s (< 60 s)")


# 5 ------------------------------------------------------------------------

def test_5_dual_arm():
    rng = np.random.default_rng(5)
    worst_res, violations = 0.0, 0
    for _ in range(1000):
        A = rng.normal(size=(3, 3))
        J = A @ A.T + 0.1 * np.eye(3)
        load = LoadState(rng.uniform(0.5, 20), J, rng.normal(size=3), rng.normal(size=3), rng.normal(size=3),
                         rng.normal(size=3), rng.normal(size=3), rng.normal(size=3), 0.3 * rng.normal(size=3))
        grasp = GraspConfig(rng.normal(size=3), rng.normal(size=3))
        w1, w2 = dual_arm_decompose(load, grasp)
        # plug back into the load's Newton-Euler balance written out directly
        w = load.ang_vel
        force = -w1.force - w2.force + load.coriolis + load.external_force - load.mass * load.lin_acc
        moment = (-(w1.torque + np.cross(grasp.r1, w1.force)) - (w2.torque + np.cross(grasp.r2, w2.force))
                  + load.external_torque + np.cross(load.force_offset, load.external_force)
                  - J @ load.ang_acc - np.cross(w, J @ w))
        worst_res = max(worst_res, float(np.linalg.norm(np.concatenate([force, moment]))))
        x = stack(w1, w2)
        null = np.linalg.svd(grasp_map(grasp))[2][6:]
        for _ in range(10):
            if np.linalg.norm(x + null.T @ rng.normal(size=6)) < np.linalg.norm(x):
                violations += 1
    report(5, "dual-arm decomposition", worst_res < 1e-9 and violations == 0,
           f"max residual {worst_res:.2e} (< 1e-9), min-norm violations {violations}/10000")


# 6 ------------------------------------------------------------------------

def test_6_poisson_and_grid():
    region = Region((0.0, 0.0), (30.0, 20.0))
    closest = math.inf
    for seed in range(100):
        pts = np.array(poisson_disk_sample(region, 1.5, seed=seed))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        closest = min(closest, float(d[np.triu_indices(len(pts), 1)].min()))
    escaped = 0
    for seed in range(100):
        for idx, (x, y) in enumerate(grid_sample(region, 6, 4, 0.4, seed)):
            i, j = idx % 6, idx // 6
            if not (5.0 * i <= x <= 5.0 * (i + 1) and 5.0 * j <= y <= 5.0 * (j + 1)):
                escaped += 1
    report(6, "Poisson disk / jittered grid", closest >= 1.5 and escaped == 0,
           f"min pair distance {closest:.4f} (>= 1.5) over 100 seeds, grid points outside own cell: {escaped}")


# 7 ------------------------------------------------------------------------

SMALL_REGION = Region((0.0, 0.0), (20.0, 20.0))


def small_instance(i):
    rng = XorShift64Star(derive_seed(7, i))
    n_robots, n_debris = 1 + rng.randbelow(2), 1 + rng.randbelow(4)
    robots = tuple(RobotSpec(r, (rng.uniform(0, 20), rng.uniform(0, 20)), max_speed=1.0, max_accel=0.5,
                             grasp_time=2.0, fuel_budget=30.0) for r in range(n_robots))
    fld = make_field(FieldSpec(FieldKind.POISSON_DISK, count=n_debris, r_min=2.0), SMALL_REGION,
                     derive_seed(7, i, 1))
    return EnvSpec(robots, SMALL_REGION, (10.0, 10.0), fld, horizon=60.0)


def test_7_allocation_optimality():
    t0 = time.perf_counter()
    worst, heuristic_ok, sizes = math.inf, True, []
    for i in range(20):
        env = small_instance(i)
        world = env.make_world(0)
        sizes.append((len(world.robots), len(world.field.items)))
        _, best = brute_force_optimal(world, env.horizon)
        q = train_q_policy(env, QHyper(episodes=200), seed=i)
        value = run_episode(env.make_world(0), q, env.horizon).reward_total
        worst = min(worst, value / best if best > 0 else (1.0 if value >= best else 0.0))
        for p in (fifo_assign, spt_assign):
            heuristic_ok &= run_episode(env.make_world(0), p, env.horizon).reward_total <= best + 1e-12
    dt = time.perf_counter() - t0
    assert all(r <= 2 and d <= 4 for r, d in sizes)
    report(7, "allocation optimality", worst >= 0.95 and heuristic_ok and dt < 300.0,
           f"worst Q/optimal {worst:.4f} (>= 0.95) over 20 instances, FIFO/SPT <= optimal: {heuristic_ok}, "
           f"{dt:.1f} s (< 300 s)")


# 8 / 9 --------------------------------------------------------------------

@pytest.fixture(scope="module")
def bench_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench_a")
    config = Config(output_dir=str(out))
    t0 = time.perf_counter()
    code = cli.cmd_bench(config)
    return out, code, time.perf_counter() - t0


def test_8_benchmark_directionality(bench_run):
    out, code, dt = bench_run
    with open(out / "bench.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    means = {r["policy"]: float(r["mean_transfer_rate"]) for r in rows if r["n"]}
    heuristics = {k: v for k, v in means.items() if k != "q"}
    best_name = max(heuristics, key=heuristics.get)
    gain = (means["q"] - heuristics[best_name]) / heuristics[best_name]
    ok = code == 0 and means["q"] >= heuristics[best_name] and dt < 600.0
    report(8, "benchmark directionality", ok,
           f"Q {means['q']:.3f} vs best heuristic {best_name} {heuristics[best_name]:.3f}, "
           f"relative improvement {gain:+.2%} (>= 0), {dt:.1f} s (< 600 s)")


def test_9_determinism(bench_run, tmp_path):
    first, _, _ = bench_run
    assert cli.cmd_bench(Config(output_dir=str(tmp_path))) == 0
    same = {name: (first / name).read_bytes() == (tmp_path / name).read_bytes()
            for name in ("bench.csv", "bench_seeds.csv")}
    report(9, "determinism", all(same.values()), f"byte-identical reruns: {same}")
