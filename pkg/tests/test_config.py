"""Config grammar: parsing, validation, round trips, hashing."""

import pytest

from elastowave.config import (
    ScenarioConfig,
    config_hash,
    parse_config,
    serialize_config,
)
from elastowave.errors import ConfigError
from elastowave.spaces import AcousticMaterial, ElasticMaterial

MINIMAL = """
[domain]
layout = two-box
solid_box = -1, 0; 0, 1; 0, 1
fluid_box = 0, 1; 0, 1; 0, 1
solid_cells = 4, 4, 4
fluid_cells = 4, 4, 4
analytic = verification

[region.1]
kind = elastic
rho = 2.7
cp = 6.2
cs = 3.12

[region.2]
kind = acoustic
rho = 1.0
c = 1.0

[time]
t_end = 0.1

[boundary]
dirichlet_data = analytic

[source]
initial = analytic
"""


def test_minimal_coupled_config_parses():
    cfg = parse_config(MINIMAL)
    assert cfg.layout == "two-box"
    assert cfg.analytic == "verification"
    assert cfg.solid_box == ((-1.0, 0.0), (0.0, 1.0), (0.0, 1.0))
    assert cfg.fluid_cells == (4, 4, 4)
    assert cfg.t_end == 0.1
    assert cfg.dt is None
    assert cfg.alpha == 1.0
    mats = cfg.materials()
    assert isinstance(mats[1], ElasticMaterial) and isinstance(mats[2], AcousticMaterial)
    assert abs(mats[1].cp - 6.2) < 1e-12
    assert mats[2].c == 1.0


def test_negative_density_rejected():
    bad = MINIMAL.replace("rho = 2.7", "rho = -2.7")
    with pytest.raises(ConfigError, match="density"):
        parse_config(bad)


def test_unknown_key_and_section_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(MINIMAL + "\n[output]\ncolour = red\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "\n[plotting]\nstyle = fancy\n")
    # region sections need an id suffix, plain sections must not have one
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "\n[region]\nkind = elastic\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "\n[time.2]\nt_end = 1\n")


def test_malformed_values_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("solid_cells = 4, 4, 4", "solid_cells = 4, 4"))
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("solid_cells = 4, 4, 4", "solid_cells = 4, 4, 4.5"))
    with pytest.raises(ConfigError):
        parse_config(
            MINIMAL.replace("solid_box = -1, 0; 0, 1; 0, 1", "solid_box = 0, 0; 0, 1; 0, 1")
        )
    with pytest.raises(ConfigError, match="bad value"):
        parse_config(MINIMAL.replace("rho = 1.0", "rho = one"))


def test_elastic_material_needs_one_parameterization():
    both = MINIMAL.replace("cs = 3.12", "cs = 3.12\nlam = 1.0\nmu = 1.0")
    with pytest.raises(ConfigError, match="either"):
        parse_config(both)
    neither = MINIMAL.replace("cp = 6.2\ncs = 3.12", "")
    with pytest.raises(ConfigError, match="either"):
        parse_config(neither)
    missing_c = MINIMAL.replace("c = 1.0", "")
    with pytest.raises(ConfigError, match="speed c"):
        parse_config(missing_c)


def test_cross_field_validation():
    with pytest.raises(ConfigError, match="analytic"):
        parse_config(MINIMAL.replace("analytic = verification", "analytic = none"))
    with pytest.raises(ConfigError, match="dt"):
        parse_config(MINIMAL.replace("t_end = 0.1", "t_end = 0.1\ndt = -0.5"))
    with pytest.raises(ConfigError, match="outer"):
        parse_config(MINIMAL.replace(
            "[boundary]\ndirichlet_data = analytic",
            "[boundary]\nouter = open\ndirichlet_data = analytic"))


def test_cavity_style_config_with_explicit_dt_and_degree():
    text = """
[domain]
layout = cavity-box
solid_box = -600, 600; -600, 600; -300, 300
fluid_box = -30, 30; -30, 30; -30, 30
solid_cells = 60, 60, 30
fluid_cells = 12, 12, 12

[region.1]
kind = elastic
rho = 2700
cp = 3000
cs = 1734

[region.2]
kind = acoustic
rho = 1024
c = 300

[discretization]
degree = 4

[time]
dt = 1e-5
t_end = 0.7

[boundary]
outer = absorbing

[source]
type = ricker
position = 200, 0, 299
peak_frequency = 22
delay = 0.25
amplitude = 1e10
"""
    cfg = parse_config(text)
    assert cfg.dt == 1e-5
    assert cfg.degree_elastic == cfg.degree_acoustic == 4
    assert cfg.outer == "absorbing"
    assert cfg.source_type == "ricker"
    assert cfg.peak_frequency == 22.0


def test_cavity_box_must_be_inside():
    text = MINIMAL.replace("layout = two-box", "layout = cavity-box")
    with pytest.raises(ConfigError, match="inside"):
        parse_config(text)


def test_round_trip_is_identity():
    cfg = parse_config(MINIMAL)
    text = serialize_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert serialize_config(again) == text


def test_config_hash_tracks_content():
    cfg = parse_config(MINIMAL)
    h1 = config_hash(cfg)
    assert h1 == config_hash(parse_config(serialize_config(cfg)))
    other = parse_config(MINIMAL.replace("t_end = 0.1", "t_end = 0.2"))
    assert config_hash(other) != h1


def test_degree_overrides_per_region():
    text = MINIMAL.replace(
        "kind = elastic\nrho = 2.7", "kind = elastic\ndegree = 5\nrho = 2.7"
    )
    cfg = parse_config(text)
    assert cfg.degrees("elastic") == {1: 5}
    assert cfg.degrees("acoustic") == {2: 2}


def test_receivers_and_output_options():
    text = MINIMAL + """
[receivers]
points = 0.5, 0.5, 0.5; -0.3, 0.2, 0.9
stride = 4

[output]
directory = results
snapshot_stride = 10
energy_stride = 2
"""
    cfg = parse_config(text)
    assert cfg.receiver_points == ((0.5, 0.5, 0.5), (-0.3, 0.2, 0.9))
    assert cfg.receiver_stride == 4
    assert cfg.output_dir == "results"
    assert cfg.snapshot_stride == 10
    assert cfg.energy_stride == 2
    assert parse_config(serialize_config(cfg)) == cfg


def test_default_config_requires_regions():
    with pytest.raises(ConfigError, match="region"):
        ScenarioConfig().validate()
