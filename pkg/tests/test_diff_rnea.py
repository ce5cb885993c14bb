import numpy as np
import pytest

from conftest import planar_chain, random_chain
from orbitpnp.diff_rnea import (
    TorqueSample,
    VirtualParams,
    make_dataset,
    physical_model,
    read_dataset_csv,
    reparam,
    rnea_with_grads,
    smooth_sign,
    sysid_fit,
    sysid_grad,
    sysid_loss,
    write_dataset_csv,
)
from orbitpnp.errors import DimensionMismatch, EmptyDataset, NonPositiveEps
from orbitpnp.rnea import ChainModel, JointState, LinkParams, rnea

TRUE_M = np.array([2.0, 1.2])
TRUE_F = np.array([1.0, 0.6])


def sysid_chain():
    return planar_chain(masses=TRUE_M, lengths=(1.0,), coms=(0.5, 0.5), inertias=(0.05, 0.03),
                        friction=TRUE_F)


def random_states(rng, n, dof=2):
    return [JointState(rng.uniform(-np.pi, np.pi, dof), rng.uniform(-2, 2, dof), rng.uniform(-4, 4, dof))
            for _ in range(n)]


def test_reparam_values():
    m, f = reparam(VirtualParams([0.0], [np.log(0.5)]))
    assert m[0] == 1.0
    assert f[0] == pytest.approx(0.5, rel=1e-15)


def test_reparam_positive_on_grid():
    grid = np.linspace(-20, 20, 81)
    m, f = reparam(VirtualParams(grid, grid[::-1]))
    assert np.all(m > 0) and np.all(f > 0)


def test_smooth_sign():
    assert smooth_sign(0.0) == 0.0
    assert smooth_sign(10.0, 0.01) == pytest.approx(1.0, abs=1e-8)
    x = np.random.default_rng(0).normal(size=50)
    assert np.array_equal(smooth_sign(-x), -smooth_sign(x))
    with pytest.raises(NonPositiveEps):
        smooth_sign(1.0, 0.0)


def test_point_mass_alpha_gradient_equals_torque():
    link = LinkParams(1.0, [1.0, 0, 0], np.diag([1e-12, 1.0 + 1e-12, 1.0 + 1e-12]))
    model = ChainModel((link,))
    vp = VirtualParams([0.7], [0.0])
    tau, ga, _ = rnea_with_grads(model, vp, TorqueSample([0.2], [0.0], [1.5], [0.0]))
    assert tau[0] == pytest.approx(np.exp(0.7) * 1.5, rel=1e-9)
    assert ga[0, 0] == pytest.approx(tau[0], rel=1e-12)


def test_beta_gradient_is_friction_term(rng):
    model = planar_chain()
    vp = VirtualParams(rng.normal(size=2), rng.normal(size=2))
    s = TorqueSample(rng.normal(size=2), rng.normal(size=2), rng.normal(size=2), np.zeros(2))
    _, _, gb = rnea_with_grads(model, vp, s, eps=0.05)
    assert np.allclose(gb, np.diag(np.exp(vp.beta) * np.tanh(s.qdot / 0.05)), rtol=1e-14)


def test_gradients_match_finite_differences(rng):
    h = 1e-6
    for _ in range(50):
        model = random_chain(rng)
        vp = VirtualParams(rng.uniform(-1, 1, 3), rng.uniform(-2, 0.5, 3))
        s = TorqueSample(*rng.uniform(-2, 2, (3, 3)), np.zeros(3))
        _, ga, gb = rnea_with_grads(model, vp, s)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fa = (rnea_with_grads(model, VirtualParams(vp.alpha + e, vp.beta), s)[0]
                  - rnea_with_grads(model, VirtualParams(vp.alpha - e, vp.beta), s)[0]) / (2 * h)
            fb = (rnea_with_grads(model, VirtualParams(vp.alpha, vp.beta + e), s)[0]
                  - rnea_with_grads(model, VirtualParams(vp.alpha, vp.beta - e), s)[0]) / (2 * h)
            scale = max(1.0, np.max(np.abs(ga)), np.max(np.abs(gb)))
            assert np.max(np.abs(fa - ga[:, k])) / scale < 1e-5
            assert np.max(np.abs(fb - gb[:, k])) / scale < 1e-5


def test_prediction_matches_physical_rnea_in_sharp_limit(rng):
    model = random_chain(rng)
    vp = VirtualParams(rng.uniform(-1, 1, 3), rng.uniform(-1, 0.5, 3))
    phys = physical_model(model, vp)
    for _ in range(50):
        q, qdd = rng.uniform(-2, 2, (2, 3))
        qd = rng.uniform(0.01, 2, 3) * rng.choice([-1.0, 1.0], 3)
        pred = rnea_with_grads(model, vp, TorqueSample(q, qd, qdd, np.zeros(3)), eps=1e-6)[0]
        assert np.max(np.abs(pred - rnea(phys, JointState(q, qd, qdd)))) < 1e-4


def test_self_consistent_loss(rng):
    model = sysid_chain()
    data = make_dataset(model, random_states(rng, 50))
    true = VirtualParams.from_physical(TRUE_M, TRUE_F)
    assert sysid_loss(model, true, data) < 1e-20
    assert sysid_loss(model, VirtualParams(true.alpha + 0.1, true.beta), data) > sysid_loss(model, true, data)


def test_loss_permutation_invariant(rng):
    model = sysid_chain()
    data = make_dataset(model, random_states(rng, 30))
    vp = VirtualParams([0.3, 0.1], [-0.2, 0.4])
    perm = [data[i] for i in rng.permutation(len(data))]
    assert sysid_loss(model, vp, perm) == pytest.approx(sysid_loss(model, vp, data), rel=1e-14)


def test_loss_gradient_finite_differences(rng):
    model = sysid_chain()
    data = make_dataset(model, random_states(rng, 20))
    vp = VirtualParams([0.3, 0.1], [-0.2, 0.4])
    ga, gb = sysid_grad(model, vp, data)
    h = 1e-6
    for k in range(2):
        e = np.eye(2)[k] * h
        fa = (sysid_loss(model, VirtualParams(vp.alpha + e, vp.beta), data)
              - sysid_loss(model, VirtualParams(vp.alpha - e, vp.beta), data)) / (2 * h)
        fb = (sysid_loss(model, VirtualParams(vp.alpha, vp.beta + e), data)
              - sysid_loss(model, VirtualParams(vp.alpha, vp.beta - e), data)) / (2 * h)
        assert fa == pytest.approx(ga[k], rel=1e-6)
        assert fb == pytest.approx(gb[k], rel=1e-6)


def test_friction_unobservable_without_motion(rng):
    model = ChainModel((LinkParams(1.5, [0.4, 0, 0], np.eye(3) * 0.3, 0.5),))
    states = [JointState([q], [0.0], [a]) for q, a in rng.uniform(-2, 2, (20, 2))]
    data = make_dataset(model, states)
    _, gb = sysid_grad(model, VirtualParams([0.1], [0.9]), data)
    assert np.array_equal(gb, [0.0])


def test_fit_zero_iterations():
    model = sysid_chain()
    data = make_dataset(model, random_states(np.random.default_rng(1), 10))
    init = VirtualParams([0.1, 0.2], [0.0, 0.0])
    rep = sysid_fit(model, init, data, max_iters=0)
    assert rep.final_params is init and len(rep.loss_history) == 1 and rep.iterations == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fit_recovers_parameters(seed):
    rng = np.random.default_rng(seed)
    model = sysid_chain()
    data = make_dataset(model, random_states(rng, 200))
    init = VirtualParams.from_physical(TRUE_M * rng.uniform(0.5, 1.5, 2), TRUE_F * rng.uniform(0.5, 1.5, 2))
    rep = sysid_fit(model, init, data, lr=1e-2, max_iters=5000)
    m, f = reparam(rep.final_params)
    assert np.all(np.abs(m / TRUE_M - 1) < 0.01)
    assert np.all(np.abs(f / TRUE_F - 1) < 0.01)
    assert rep.iterations <= 5000
    assert all(b <= a for a, b in zip(rep.loss_history, rep.loss_history[1:]))


def test_fit_with_coulomb_labels_is_monotone(rng):
    # sign-labelled data is not an exact zero of the smoothed loss, but descent stays monotone
    model = sysid_chain()
    data = make_dataset(model, random_states(rng, 100), eps=None)
    rep = sysid_fit(model, VirtualParams([0.0, 0.0], [0.0, 0.0]), data, max_iters=300)
    assert all(b <= a for a, b in zip(rep.loss_history, rep.loss_history[1:]))
    m, _ = reparam(rep.final_params)
    assert np.all(m > 0)


def test_fit_rejects_bad_inputs():
    model = sysid_chain()
    with pytest.raises(EmptyDataset):
        sysid_fit(model, VirtualParams([0, 0], [0, 0]), [])
    with pytest.raises(DimensionMismatch):
        sysid_loss(model, VirtualParams([0], [0]), [TorqueSample([0, 0], [0, 0], [0, 0], [0, 0])])


def test_dataset_csv_roundtrip(tmp_path, rng):
    data = make_dataset(sysid_chain(), random_states(rng, 5))
    write_dataset_csv(tmp_path / "d.csv", data)
    back = read_dataset_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == \
        "q_1,q_2,qd_1,qd_2,qdd_1,qdd_2,tau_1,tau_2"
    for a, b in zip(data, back):
        for name in ("q", "qdot", "qddot", "tau_measured"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
