"""Scenario runs, artifacts, sweeps, presets, and CLI behavior."""

import dataclasses
import json

import numpy as np
import pytest

from elastowave import cli
from elastowave.config import parse_config, serialize_config
from elastowave.errors import ConfigError, GeometryError
from elastowave.scenarios import (
    PRESETS,
    build_scenario_mesh,
    converge_sweep,
    preset_config,
    preset_text,
    run_scenario,
    sweep_config,
)

TINY = """
[domain]
layout = two-box
solid_box = -1, 0; 0, 1; 0, 1
fluid_box = 0, 1; 0, 1; 0, 1
solid_cells = 2, 2, 2
fluid_cells = 2, 2, 2
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
t_end = 0.02

[boundary]
dirichlet_data = analytic

[source]
initial = analytic

[receivers]
points = -0.4, 0.6, 0.4; 0.6, 0.4, 0.6
"""


def tiny_config(**overrides):
    cfg = parse_config(TINY)
    if overrides:
        cfg = dataclasses.replace(cfg, regions=dict(cfg.regions), **overrides)
    return cfg


def test_zero_everything_run_stays_zero(tmp_path):
    cfg = tiny_config(dirichlet_data="zero", initial="zero", analytic="none")
    res = run_scenario(cfg, output_dir=str(tmp_path))
    assert res.errors is None
    assert np.all(res.state.u == 0) and np.all(res.state.phi == 0)
    for _, times, samples in res.receiver_series:
        assert times.size == res.steps + 1
        assert np.all(samples == 0)


def test_run_artifacts_and_metadata(tmp_path):
    cfg = tiny_config(energy_stride=2, snapshot_stride=0)
    res = run_scenario(cfg, output_dir=str(tmp_path))
    rec0 = (tmp_path / "receiver_00.csv").read_text().splitlines()
    rec1 = (tmp_path / "receiver_01.csv").read_text().splitlines()
    assert rec0[0] == "t,ux,uy,uz"
    assert rec1[0] == "t,phi"
    assert len(rec0) == res.steps + 2
    # 17 significant digits round-trip exactly
    vals = [float(v) for v in rec0[-1].split(",")]
    assert vals[1:] == pytest.approx(res.receiver_series[0][2][-1].tolist(), abs=0)

    energy = (tmp_path / "energy.csv").read_text().splitlines()
    assert energy[0] == "t,solid,fluid,total"
    assert len(energy) == 2 + res.steps // 2

    table = (tmp_path / "errors.csv").read_text().splitlines()
    assert table[0] == "param,energy_error,l2_error"
    param, eerr, _ = (float(v) for v in table[1].split(","))
    assert param == pytest.approx(0.5)  # elastic meshsize of the 2x2x2 box
    assert eerr == pytest.approx(res.errors["energy"], abs=0)

    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["zeta"] == 0
    assert meta["alpha"] == cfg.alpha
    assert meta["dt"] == res.dt
    assert len(meta["config_sha256"]) == 64
    assert meta["energy_error"] == res.errors["energy"]


def test_runs_are_deterministic(tmp_path):
    cfg = tiny_config()
    run_scenario(cfg, output_dir=str(tmp_path / "a"))
    run_scenario(cfg, output_dir=str(tmp_path / "b"))
    for name in ("receiver_00.csv", "receiver_01.csv", "errors.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_steps_override_controls_duration(tmp_path):
    cfg = tiny_config(steps=3, dt=1e-3)
    res = run_scenario(cfg, write=False)
    assert res.steps == 3
    assert res.state.t == pytest.approx(3e-3)


def test_vtk_snapshot_layout(tmp_path):
    cfg = tiny_config(snapshot_stride=1000)  # only step 0
    res = run_scenario(cfg, output_dir=str(tmp_path))
    text = (tmp_path / "snapshot_000000.vtk").read_text().splitlines()
    assert text[0].startswith("# vtk DataFile")
    nv = res.mesh.n_vertices
    ne = res.mesh.n_elements
    ip = text.index(f"POINTS {nv} double")
    ic = text.index(f"CELLS {ne} {9 * ne}")
    assert all(line.startswith("8 ") for line in text[ic + 1 : ic + 1 + ne])
    it = text.index(f"CELL_TYPES {ne}")
    assert set(text[it + 1 : it + 1 + ne]) == {"12"}
    iv = text.index("VECTORS displacement double")
    istart = text.index("POINT_DATA " + str(nv))
    assert istart < iv
    scalars = text.index("SCALARS phi double")
    phi_vals = np.array([float(v) for v in text[scalars + 2 : scalars + 2 + nv]])
    disp = np.array(
        [[float(v) for v in line.split()] for line in text[iv + 1 : iv + 1 + nv]]
    )
    # fields are zero-padded outside the owning side
    solid_only = res.mesh.vertices[:, 0] < -1e-9
    fluid_only = res.mesh.vertices[:, 0] > 1e-9
    assert np.all(phi_vals[solid_only] == 0)
    assert np.all(disp[fluid_only] == 0)
    # interpolated initial data is nonzero somewhere on each side
    assert np.abs(disp[solid_only]).max() > 0
    assert np.abs(phi_vals).max() == 0  # phi(x, 0) = 0 for this model
    psi_probe = res.receiver_series[1][2][0]
    assert np.isfinite(psi_probe).all()


def test_bump_initial_condition_vanishes_on_boundary():
    cfg = tiny_config(initial="bump", dirichlet_data="zero", analytic="none",
                      steps=1, dt=1e-4)
    res = run_scenario(cfg, write=False)
    assert np.abs(res.state.u).max() > 0
    assert np.abs(res.state.phi).max() > 0


def test_glue_axis_mismatch_raises():
    cfg = tiny_config()
    cfg = dataclasses.replace(
        cfg, fluid_box=((0.5, 1.5), (0.0, 1.0), (0.0, 1.0)), regions=dict(cfg.regions)
    )
    with pytest.raises(GeometryError, match="share"):
        build_scenario_mesh(cfg)


def test_scholte_preset_builds_z_stacked_mesh():
    cfg = preset_config("scholte")
    mesh = build_scenario_mesh(cfg)
    assert mesh.n_elements == 2 * 3 * 3 * 16
    assert mesh.region_kind[1] == "elastic" and mesh.region_kind[2] == "acoustic"
    zs = mesh.vertices[:, 2]
    assert zs.min() == -10.0 and zs.max() == 10.0


def test_sweep_config_h_scales_both_grids():
    cfg = tiny_config()
    sub = sweep_config(cfg, "h", 0.25)
    assert sub.solid_cells == (4, 4, 4) and sub.fluid_cells == (4, 4, 4)
    with pytest.raises(ConfigError, match="non-integer"):
        sweep_config(cfg, "h", 0.3)
    with pytest.raises(ConfigError, match="sweep"):
        sweep_config(cfg, "p", 3)


def test_sweep_config_n_sets_degrees_and_clears_overrides():
    cfg = tiny_config()
    cfg.regions[1] = dataclasses.replace(cfg.regions[1], degree=5)
    sub = sweep_config(cfg, "N", 3)
    assert sub.degree_elastic == sub.degree_acoustic == 3
    assert all(spec.degree is None for spec in sub.regions.values())
    assert cfg.regions[1].degree == 5  # original untouched


def test_converge_sweep_writes_table(tmp_path):
    cfg = tiny_config()
    table = converge_sweep(cfg, "h", [0.5, 0.25], output_dir=str(tmp_path))
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "param,energy_error,l2_error"
    assert len(lines) == 3
    assert table["energy_error"][1] < table["energy_error"][0]
    meta = json.loads((tmp_path / "convergence_meta.json").read_text())
    assert meta["sweep"] == "h"
    with pytest.raises(ConfigError, match="analytic"):
        converge_sweep(tiny_config(analytic="none", dirichlet_data="zero",
                                   initial="zero"), "h", [0.5, 0.25])


def test_preset_registry():
    for name in PRESETS:
        cfg = preset_config(name)
        assert cfg.regions
    assert preset_config("cavity-demo", full=True).dt == 1e-5
    assert preset_config("scholte", full=True).solid_cells == (5, 5, 48)
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_config("volcano")
    text = preset_text("verification-matching")
    assert parse_config(text) == preset_config("verification-matching")


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text(serialize_config(tiny_config(steps=2, dt=1e-3)))
    out_dir = tmp_path / "out"
    assert cli.main(["run", "-c", str(cfg_path), "--output-dir", str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert "steps: 2" in out and "energy error" in out
    assert (out_dir / "metadata.json").exists()

    assert cli.main(["run", "-c", str(tmp_path / "missing.ini")]) == cli.EXIT_IO

    bad = tmp_path / "bad.ini"
    bad.write_text("[domain]\nlayout = dodecahedron\n")
    assert cli.main(["run", "-c", str(bad)]) == cli.EXIT_PARSE

    geo = tmp_path / "geo.ini"
    geo.write_text(
        serialize_config(tiny_config()).replace(
            "fluid_box = 0.0, 1.0; 0.0, 1.0; 0.0, 1.0",
            "fluid_box = 0.5, 1.5; 0.0, 1.0; 0.0, 1.0",
        )
    )
    assert cli.main(["run", "-c", str(geo)]) == cli.EXIT_GEOMETRY

    div = tmp_path / "div.ini"
    div.write_text(serialize_config(tiny_config(dt=0.5, steps=4000)))
    assert cli.main(["run", "-c", str(div), "--output-dir", str(tmp_path / "d")]) \
        == cli.EXIT_DIVERGENCE
    capsys.readouterr()


def test_cli_converge_and_preset_print(tmp_path, capsys):
    cfg_path = tmp_path / "conv.ini"
    cfg_path.write_text(serialize_config(tiny_config()))
    code = cli.main([
        "converge", "-c", str(cfg_path), "--sweep", "h", "--values", "0.5,0.25",
        "--output-dir", str(tmp_path / "sweep"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "energy rate:" in out
    assert (tmp_path / "sweep" / "convergence.csv").exists()

    assert cli.main(["preset", "scholte", "--print"]) == 0
    printed = capsys.readouterr().out
    assert parse_config(printed) == preset_config("scholte")

    assert cli.main(["preset", "volcano"]) == cli.EXIT_PARSE
    capsys.readouterr()
