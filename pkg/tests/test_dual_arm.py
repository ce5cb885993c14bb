import numpy as np
import pytest

from orbitpnp.dual_arm import (
    GraspConfig,
    LoadState,
    dual_arm_decompose,
    grasp_map,
    load_balance_residual,
    stack,
)
from orbitpnp.errors import DegenerateGrasp, NonPositiveMass
from orbitpnp.rnea import Wrench


def random_case(rng):
    A = rng.normal(size=(3, 3))
    load = LoadState(
        mass=rng.uniform(0.5, 20.0), rot_inertia=A @ A.T + 0.1 * np.eye(3),
        lin_acc=rng.normal(size=3), ang_vel=rng.normal(size=3), ang_acc=rng.normal(size=3),
        coriolis=rng.normal(size=3), external_force=rng.normal(size=3),
        external_torque=rng.normal(size=3), force_offset=0.3 * rng.normal(size=3),
    )
    return load, GraspConfig(rng.normal(size=3), rng.normal(size=3))


def balance_residual(load, grasp, w1, w2):
    """Newton-Euler balance of the load written out term by term."""
    J, w = load.rot_inertia, load.ang_vel
    force = (-w1.force - w2.force + load.coriolis + load.external_force) - load.mass * load.lin_acc
    moment = (-(w1.torque + np.cross(grasp.r1, w1.force)) - (w2.torque + np.cross(grasp.r2, w2.force))
              + load.external_torque + np.cross(load.force_offset, load.external_force)
              - (J @ load.ang_acc + np.cross(w, J @ w)))
    return np.concatenate([force, moment])


def test_free_floating_load_zero_wrenches():
    load = LoadState(2.0, np.eye(3))
    w1, w2 = dual_arm_decompose(load, GraspConfig([0, 1, 0], [0, -1, 0]))
    assert np.allclose(stack(w1, w2), 0.0, atol=1e-15)


def test_symmetric_grasp_splits_force():
    F = 4.0
    load = LoadState(2.0, np.eye(3), lin_acc=[F / 2.0, 0, 0])
    w1, w2 = dual_arm_decompose(load, GraspConfig([0, 1, 0], [0, -1, 0]))
    assert np.allclose(w1.force, [-F / 2, 0, 0], atol=1e-12)
    assert np.allclose(w2.force, [-F / 2, 0, 0], atol=1e-12)
    assert np.allclose(w1.torque, 0.0, atol=1e-12)
    assert np.allclose(w2.torque, 0.0, atol=1e-12)


def test_plug_back_residual(rng):
    for _ in range(1000):
        load, grasp = random_case(rng)
        w1, w2 = dual_arm_decompose(load, grasp)
        assert np.linalg.norm(balance_residual(load, grasp, w1, w2)) < 1e-9
        assert np.linalg.norm(load_balance_residual(load, grasp, w1, w2)) < 1e-9


def test_min_norm_dominance(rng):
    for _ in range(200):
        load, grasp = random_case(rng)
        x = stack(*dual_arm_decompose(load, grasp))
        null = np.linalg.svd(grasp_map(grasp))[2][6:]
        for _ in range(10):
            alt = x + null.T @ rng.normal(size=6)
            assert np.linalg.norm(balance_residual(load, grasp, Wrench(alt[:3], alt[3:6]),
                                                   Wrench(alt[6:9], alt[9:]))) < 1e-9
            assert np.linalg.norm(x) <= np.linalg.norm(alt) + 1e-12


def test_residual_of_zero_wrenches_on_free_load():
    load = LoadState(1.0, np.eye(3))
    zero = Wrench(np.zeros(3), np.zeros(3))
    assert np.array_equal(load_balance_residual(load, GraspConfig([1, 0, 0], [-1, 0, 0]), zero, zero),
                          np.zeros(6))


def test_residual_force_perturbation(rng):
    load, grasp = random_case(rng)
    w1, w2 = dual_arm_decompose(load, grasp)
    base = load_balance_residual(load, grasp, w1, w2)
    bumped = Wrench(w1.force + [1.0, 0, 0], w1.torque)
    diff = load_balance_residual(load, grasp, bumped, w2) - base
    assert np.allclose(diff[:3], [-1.0, 0, 0], atol=1e-12)


def test_grasp_map_matches_balance(rng):
    load, grasp = random_case(rng)
    x = rng.normal(size=12)
    w1, w2 = Wrench(x[:3], x[3:6]), Wrench(x[6:9], x[9:])
    assert np.allclose(load_balance_residual(load, grasp, w1, w2), balance_residual(load, grasp, w1, w2),
                       atol=1e-12)


def test_degenerate_and_invalid_inputs():
    with pytest.raises(DegenerateGrasp):
        GraspConfig([1, 2, 3], [1, 2, 3])
    with pytest.raises(NonPositiveMass):
        LoadState(0.0, np.eye(3))
    with pytest.raises(ValueError):
        LoadState(1.0, -np.eye(3))
