import math

import pytest

from orbitpnp.config import Config, config_from_dict, parse_config
from orbitpnp.debris import FieldKind
from orbitpnp.errors import ParseError, ValidationError


def write(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    return p


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, ""))
    assert cfg.dt == 0.1 and cfg.horizon == 300.0 and cfg.seeds == tuple(range(10))
    assert len(cfg.robots) == 2 and cfg.field_spec.kind is FieldKind.DENSE_CLUSTER
    assert cfg.allocation.episodes == 300 and cfg.allocation.grid == 4
    assert set(cfg.chains) == {"planar2", "spatial3"}


def test_minimal_file_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, "horizon: 50\nfield:\n  kind: grid\n  nx: 2\n"))
    assert cfg.horizon == 50.0
    assert cfg.field_spec.kind is FieldKind.GRID and cfg.field_spec.nx == 2 and cfg.field_spec.ny == 3
    assert cfg.params.fuel_weight == 0.01


def test_full_robot_spec(tmp_path):
    cfg = parse_config(write(tmp_path, """
robots:
  - {id: 3, start: [1, 2], max_speed: 2, workspace_radius: 10}
  - {start: [5, 5]}
"""))
    assert [r.id for r in cfg.robots] == [3, 1]
    assert cfg.robots[0].max_speed == 2.0 and cfg.robots[0].workspace_radius == 10.0
    assert math.isinf(cfg.robots[1].workspace_radius)


def test_negative_dt(tmp_path):
    with pytest.raises(ValidationError) as exc:
        parse_config(write(tmp_path, "dt: -0.1\n"))
    assert exc.value.field == "dt"


@pytest.mark.parametrize("text, field", [
    ("horizon: 0\n", "horizon"),
    ("robots:\n  - {id: 0, start: [0, 0], max_speed: -1}\n", "robots[0].max_speed"),
    ("robots:\n  - {id: 0}\n", "robots[0].start"),
    ("robots:\n  - {id: 0, start: [0, 0]}\n  - {id: 0, start: [1, 1]}\n", "robots[1].id"),
    ("field: {kind: spiral}\n", "field.kind"),
    ("field: {count: 2.5}\n", "field.count"),
    ("allocation: {discount: 1.0}\n", "allocation.discount"),
    ("allocation: {epsilon_end: 2}\n", "allocation.epsilon_end"),
    ("seeds: []\n", "seeds"),
    ("disposal: [1, 2, 3]\n", "disposal"),
    ("region: {min: [0, 0], max: [0, 5]}\n", "region"),
    ("dt: fast\n", "dt"),
])
def test_validation_errors_name_field(tmp_path, text, field):
    with pytest.raises(ValidationError) as exc:
        parse_config(write(tmp_path, text))
    assert exc.value.field == field


def test_negative_mass_chain_rejected(tmp_path):
    with pytest.raises(ValidationError) as exc:
        parse_config(write(tmp_path, """
dynamics:
  chains:
    - name: bad
      links:
        - {mass: -1.0, rot_inertia: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
"""))
    assert exc.value.field == "dynamics.chains[0].links[0].mass"


def test_chain_from_config(tmp_path):
    cfg = parse_config(write(tmp_path, """
dynamics:
  chains:
    - name: one
      gravity: [0, -9.81, 0]
      links:
        - {mass: 1.5, com: [0.5, 0, 0], rot_inertia: [[0.1, 0, 0], [0, 0.5, 0], [0, 0, 0.5]], friction: 0.2}
"""))
    assert list(cfg.chains) == ["one"] and cfg.chains["one"].links[0].friction_coeff == 0.2


def test_unknown_field_is_parse_error(tmp_path):
    with pytest.raises(ParseError, match="horizn"):
        parse_config(write(tmp_path, "horizn: 10\n"))
    with pytest.raises(ParseError, match="speed"):
        parse_config(write(tmp_path, "robots:\n  - {id: 0, start: [0, 0], speed: 1}\n"))


def test_bad_yaml_reports_line(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        parse_config(write(tmp_path, "dt: 0.1\n  horizon: 5\n"))


def test_top_level_must_be_mapping(tmp_path):
    with pytest.raises(ParseError):
        parse_config(write(tmp_path, "- 1\n- 2\n"))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_config(tmp_path / "nope.yaml")


def test_example_config_parses():
    from pathlib import Path
    cfg = parse_config(Path(__file__).resolve().parents[1] / "configs" / "default.yaml")
    assert cfg.env().horizon == 300.0
    d = Config()
    assert (cfg.robots, cfg.field_spec, cfg.region, cfg.disposal, cfg.params, cfg.horizon, cfg.allocation,
            cfg.seeds) == (d.robots, d.field_spec, d.region, d.disposal, d.params, d.horizon, d.allocation, d.seeds)


def test_config_from_dict_none():
    assert config_from_dict(None).seeds == Config().seeds
