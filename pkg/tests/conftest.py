import numpy as np
import pytest

from orbitpnp.rnea import ChainModel, LinkParams
from orbitpnp.spatial import inertia_about_origin


def planar_chain(masses=(1.3, 0.7), lengths=(1.1,), coms=(0.5, 0.4), inertias=(0.05, 0.03),
                 friction=(0.0, 0.0)):
    """Planar revolute chain along x; ``inertias`` are scalar COM inertias about z."""
    links = []
    for i, (m, c, I, f) in enumerate(zip(masses, coms, inertias, friction)):
        offset = [lengths[i - 1], 0.0, 0.0] if i > 0 else [0.0, 0.0, 0.0]
        links.append(LinkParams(m, [c, 0, 0], inertia_about_origin(m, [c, 0, 0], I * np.eye(3)), f,
                                offset_translation=offset))
    return ChainModel(tuple(links))


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_chain(rng, n=3, friction=0.0):
    """Non-planar chain with random axes, offsets and inertias."""
    links = []
    for i in range(n):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        m = rng.uniform(0.5, 3.0)
        com = rng.uniform(-0.3, 0.3, 3)
        A = rng.normal(size=(3, 3)) * 0.1
        Ic = A @ A.T + 0.01 * np.eye(3)
        links.append(LinkParams(m, com, inertia_about_origin(m, com, Ic), friction, joint_axis=axis,
                                offset_rotation=random_rotation(rng) if i else np.eye(3),
                                offset_translation=rng.uniform(-0.5, 0.5, 3) if i else np.zeros(3)))
    return ChainModel(tuple(links))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
