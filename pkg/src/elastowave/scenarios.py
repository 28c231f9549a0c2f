"""Scenario orchestration: mesh setup, runs, sweeps, presets, outputs."""

import dataclasses
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .analytic import ScholteWave, VerificationSolution, ricker
from .assembly import build_operators, point_source_vector
from .config import ScenarioConfig, config_hash, parse_config, serialize_config
from .diagnostics import (
    coupled_error,
    fit_convergence_rate,
    make_receivers,
    split_energies,
)
from .errors import ConfigError, ElastowaveError, GeometryError
from .kernels import backend_name
from .mesh import (
    HEX_SIGNS,
    build_box_mesh,
    build_cavity_box_mesh,
    build_interface_pairs,
    classify_faces,
    import_mesh,
    merge_meshes,
    strip_face_tags_on_plane,
)
from .spaces import build_acoustic_space, build_elastic_space
from .timestepping import NewmarkIntegrator, estimate_stable_dt


def _region_of_kind(cfg: ScenarioConfig, kind: str) -> int:
    ids = [rid for rid, spec in cfg.regions.items() if spec.kind == kind]
    if len(ids) != 1:
        raise ConfigError(f"{cfg.layout} layout needs exactly one {kind} region")
    return ids[0]


def _glue_axis(solid_box, fluid_box) -> tuple[int, float]:
    """Axis and coordinate of the shared plane of two adjacent boxes."""
    for d in range(3):
        others = [o for o in range(3) if o != d]
        if any(solid_box[o] != fluid_box[o] for o in others):
            continue
        if math.isclose(solid_box[d][1], fluid_box[d][0], rel_tol=0, abs_tol=1e-12):
            return d, solid_box[d][1]
        if math.isclose(fluid_box[d][1], solid_box[d][0], rel_tol=0, abs_tol=1e-12):
            return d, fluid_box[d][1]
    raise GeometryError("solid_box and fluid_box must share exactly one full face")


def build_scenario_mesh(cfg: ScenarioConfig):
    tag = "DIR" if cfg.outer == "dirichlet" else "ABS"
    if cfg.layout == "file":
        return import_mesh(cfg.mesh_file)
    rid_e = _region_of_kind(cfg, "elastic")
    rid_a = _region_of_kind(cfg, "acoustic")
    if cfg.layout == "cavity-box":
        return build_cavity_box_mesh(
            cfg.solid_box, cfg.fluid_box, cfg.solid_cells, cfg.fluid_cells,
            elastic_region=rid_e, acoustic_region=rid_a, outer_tag=tag,
        )
    axis, coord = _glue_axis(cfg.solid_box, cfg.fluid_box)
    solid = build_box_mesh(cfg.solid_box, cfg.solid_cells, rid_e, "elastic", tag)
    fluid = build_box_mesh(cfg.fluid_box, cfg.fluid_cells, rid_a, "acoustic", tag)
    strip_face_tags_on_plane(solid, axis, coord)
    strip_face_tags_on_plane(fluid, axis, coord)
    return merge_meshes([solid, fluid])


def make_analytic_model(cfg: ScenarioConfig):
    if cfg.analytic == "none":
        return None
    if cfg.analytic == "verification":
        mat_e = cfg.regions[_region_of_kind(cfg, "elastic")].material()
        mat_a = cfg.regions[_region_of_kind(cfg, "acoustic")].material()
        return VerificationSolution(cp=mat_e.cp, cs=mat_e.cs, c=mat_a.c)
    mat_e = cfg.regions[_region_of_kind(cfg, "elastic")].material()
    mat_a = cfg.regions[_region_of_kind(cfg, "acoustic")].material()
    return ScholteWave(
        lam=mat_e.lam, mu=mat_e.mu, rho_e=mat_e.rho,
        c=mat_a.c, rho_a=mat_a.rho, omega=cfg.omega,
    )


def _analytic_bcs(model, espace, aspace):
    xe = espace.node_coords[espace.dirichlet_nodes]
    xa = aspace.node_coords[aspace.dirichlet_nodes]

    def bc_e(t):
        return (
            model.displacement(xe, t).reshape(-1),
            model.velocity(xe, t).reshape(-1),
            model.acceleration(xe, t).reshape(-1),
        )

    def bc_a(t):
        return (
            model.potential(xa, t),
            model.potential_rate(xa, t),
            model.potential_accel(xa, t),
        )

    return bc_e, bc_a


def _bump(coords, box, amplitude):
    """Product-sine bump vanishing on the faces of `box`."""
    out = np.full(coords.shape[0], amplitude)
    for d in range(3):
        lo, hi = box[d]
        out *= np.sin(np.pi * (coords[:, d] - lo) / (hi - lo))
    return out


def _initial_fields(cfg, model, espace, aspace):
    ne, na = espace.n_dofs, aspace.n_dofs
    if cfg.initial == "zero":
        return np.zeros(ne), np.zeros(ne), np.zeros(na), np.zeros(na)
    if cfg.initial == "analytic":
        u0 = model.displacement(espace.node_coords, 0.0).reshape(-1)
        v0 = model.velocity(espace.node_coords, 0.0).reshape(-1)
        phi0 = model.potential(aspace.node_coords, 0.0)
        psi0 = model.potential_rate(aspace.node_coords, 0.0)
        return u0, v0, phi0, psi0
    if cfg.layout == "file":
        raise ConfigError("initial = bump needs a box layout")
    g_e = _bump(espace.node_coords, cfg.solid_box, cfg.initial_amplitude)
    u0 = np.repeat(g_e, 3)
    phi0 = _bump(aspace.node_coords, cfg.fluid_box, cfg.initial_amplitude)
    return u0, np.zeros(ne), phi0, np.zeros(na)


def _source_terms(cfg, mesh, espace, aspace):
    if cfg.source_type == "none":
        return None, None
    kind = mesh.region_kind[
        int(mesh.element_region[_containing_element(mesh, cfg.source_position)])
    ]
    if kind == "elastic":
        vec = point_source_vector(espace, cfg.source_position, cfg.source_direction)
        f = lambda t: ricker(t, cfg.peak_frequency, cfg.delay, cfg.amplitude) * vec
        return f, None
    vec = point_source_vector(aspace, cfg.source_position)
    f = lambda t: ricker(t, cfg.peak_frequency, cfg.delay, cfg.amplitude) * vec
    return None, f


def _containing_element(mesh, point):
    from .mesh import find_containing_element

    return find_containing_element(mesh, point)[0]


# ---------------------------------------------------------------------------
# snapshots


def write_vtk_snapshot(path, mesh, espace, aspace, state) -> None:
    """Legacy ASCII unstructured grid on the mesh vertices.

    Point data: vector `displacement` (zero on fluid-only vertices) and
    scalar `phi` (zero on solid-only vertices).
    """
    nv = mesh.n_vertices
    disp = np.zeros((nv, 3))
    phi = np.zeros(nv)
    for space, out in ((espace, disp), (aspace, phi)):
        for blk in space.blocks:
            nn = blk.degree + 1
            steps = np.where(HEX_SIGNS > 0, blk.degree, 0).astype(int)
            corner_local = steps[:, 0] + nn * (steps[:, 1] + nn * steps[:, 2])
            nodes = blk.element_nodes[:, corner_local]  # (E, 8)
            verts = mesh.elements[blk.elements]
            if space.ncomp == 3:
                vals = state.u.reshape(-1, 3)[nodes]
            else:
                vals = state.phi[nodes]
            out[verts] = vals
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"elastowave t={state.t:.9g}\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nv} double\n")
        for p in mesh.vertices:
            fh.write(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
        ne = mesh.n_elements
        fh.write(f"CELLS {ne} {9 * ne}\n")
        for row in mesh.elements:
            fh.write("8 " + " ".join(str(v) for v in row) + "\n")
        fh.write(f"CELL_TYPES {ne}\n")
        fh.write("12\n" * ne)
        fh.write(f"POINT_DATA {nv}\n")
        fh.write("VECTORS displacement double\n")
        for row in disp:
            fh.write(f"{row[0]:.9g} {row[1]:.9g} {row[2]:.9g}\n")
        fh.write("SCALARS phi double\nLOOKUP_TABLE default\n")
        for v in phi:
            fh.write(f"{v:.9g}\n")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


# ---------------------------------------------------------------------------
# runs


@dataclass
class RunResult:
    config: ScenarioConfig
    mesh: object
    ops: object
    state: object
    dt: float
    steps: int
    errors: dict | None
    receiver_series: list  # (receiver, times, samples) triples
    energy_series: np.ndarray | None
    output_dir: str | None


def run_scenario(cfg: ScenarioConfig, output_dir: str | None = None, write=True) -> RunResult:
    cfg.validate()
    out_dir = output_dir if output_dir is not None else cfg.output_dir
    mesh = build_scenario_mesh(cfg)
    fs = classify_faces(mesh)
    espace = build_elastic_space(mesh, cfg.degrees("elastic"), fs.dirichlet)
    a_degrees = set(cfg.degrees("acoustic").values())
    if len(a_degrees) > 1:
        raise ConfigError("the acoustic space is continuous and needs one degree")
    aspace = build_acoustic_space(mesh, a_degrees.pop(), fs.dirichlet)
    max_deg = max(blk.degree for blk in espace.blocks + aspace.blocks)
    pairs = build_interface_pairs(mesh, fs, max_deg + 1)
    materials = cfg.materials()
    ops = build_operators(mesh, espace, aspace, materials, fs, pairs, alpha=cfg.alpha)

    model = make_analytic_model(cfg)
    if cfg.dt is not None:
        dt = cfg.dt
    else:
        dt = estimate_stable_dt(ops, safety=cfg.safety)
    if cfg.steps is not None:
        steps = cfg.steps
    else:
        steps = max(1, math.ceil(cfg.t_end / dt - 1e-12))
        dt = cfg.t_end / steps  # land exactly on t_end

    bc_e = bc_a = None
    if cfg.dirichlet_data == "analytic":
        bc_e, bc_a = _analytic_bcs(model, espace, aspace)
    f_e, f_a = _source_terms(cfg, mesh, espace, aspace)
    stepper = NewmarkIntegrator(ops, dt, f_e=f_e, f_a=f_a, bc_e=bc_e, bc_a=bc_a)
    state = stepper.initial_state(*_initial_fields(cfg, model, espace, aspace))

    receivers = make_receivers(mesh, espace, aspace, cfg.receiver_points)
    rec_times: list[float] = []
    rec_samples = [[] for _ in receivers]
    energies: list[tuple] = []

    def record(step_idx):
        if receivers and step_idx % cfg.receiver_stride == 0:
            rec_times.append(state.t)
            for r, sink in zip(receivers, rec_samples):
                sink.append(r.sample(state))
        if cfg.energy_stride and step_idx % cfg.energy_stride == 0:
            solid, fluid = split_energies(ops, state)
            energies.append((state.t, solid, fluid, solid + fluid))
        if write and cfg.snapshot_stride and step_idx % cfg.snapshot_stride == 0:
            write_vtk_snapshot(
                os.path.join(out_dir, f"snapshot_{step_idx:06d}.vtk"),
                mesh, espace, aspace, state,
            )

    if write:
        os.makedirs(out_dir, exist_ok=True)
    record(0)
    for n in range(1, steps + 1):
        stepper.step(state)
        record(n)

    errors = None
    if model is not None:
        errors = coupled_error(ops, state, model, materials)

    result = RunResult(
        config=cfg,
        mesh=mesh,
        ops=ops,
        state=state,
        dt=dt,
        steps=steps,
        errors=errors,
        receiver_series=[
            (r, np.array(rec_times), np.array(s)) for r, s in zip(receivers, rec_samples)
        ],
        energy_series=np.array(energies) if energies else None,
        output_dir=out_dir if write else None,
    )
    if write:
        _write_artifacts(result)
    return result


def _elastic_meshsize(cfg: ScenarioConfig, mesh) -> float:
    rid = [r for r, s in cfg.regions.items() if s.kind == "elastic"]
    return mesh.region_meshsize(rid[0]) if rid else float("nan")


def _write_artifacts(res: RunResult) -> None:
    cfg, out_dir = res.config, res.output_dir
    for i, (rec, times, samples) in enumerate(res.receiver_series):
        path = os.path.join(out_dir, f"receiver_{i:02d}.csv")
        with open(path, "w") as fh:
            fh.write("t," + ",".join(rec.columns) + "\n")
            for t, row in zip(times, np.atleast_2d(samples)):
                fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in np.atleast_1d(row)))
                fh.write("\n")
    if res.energy_series is not None:
        with open(os.path.join(out_dir, "energy.csv"), "w") as fh:
            fh.write("t,solid,fluid,total\n")
            for row in res.energy_series:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    if res.errors is not None:
        with open(os.path.join(out_dir, "errors.csv"), "w") as fh:
            fh.write("param,energy_error,l2_error\n")
            h_e = _elastic_meshsize(cfg, res.mesh)
            fh.write(
                f"{_fmt(h_e)},{_fmt(res.errors['energy'])},{_fmt(res.errors['l2'])}\n"
            )
    meta = {
        "alpha": cfg.alpha,
        "zeta": 0,
        "dt": res.dt,
        "steps": res.steps,
        "t_end": res.state.t,
        "backend": backend_name,
        "config_sha256": config_hash(cfg),
    }
    if res.errors is not None:
        meta["energy_error"] = res.errors["energy"]
        meta["l2_error"] = res.errors["l2"]
    with open(os.path.join(out_dir, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# convergence sweeps


def _scaled_cells(cells, factor: float, what: str) -> tuple:
    out = []
    for c in cells:
        scaled = c * factor
        if abs(scaled - round(scaled)) > 1e-9 or round(scaled) < 1:
            raise ConfigError(
                f"{what}: meshsize value scales {c} cells to non-integer {scaled}"
            )
        out.append(int(round(scaled)))
    return tuple(out)


def sweep_config(cfg: ScenarioConfig, sweep: str, value) -> ScenarioConfig:
    """Config for one sweep point; h values are elastic target meshsizes."""
    sub = dataclasses.replace(cfg, regions=dict(cfg.regions))
    if sweep == "h":
        if cfg.layout == "file":
            raise ConfigError("h sweeps need a box layout")
        base_h = (cfg.solid_box[0][1] - cfg.solid_box[0][0]) / cfg.solid_cells[0]
        factor = base_h / float(value)
        sub.solid_cells = _scaled_cells(cfg.solid_cells, factor, "solid_cells")
        sub.fluid_cells = _scaled_cells(cfg.fluid_cells, factor, "fluid_cells")
        return sub
    if sweep == "N":
        degree = int(value)
        if degree < 1:
            raise ConfigError("degree sweep values must be >= 1")
        sub.degree_elastic = sub.degree_acoustic = degree
        sub.regions = {
            rid: dataclasses.replace(spec, degree=None)
            for rid, spec in cfg.regions.items()
        }
        return sub
    raise ConfigError(f"unknown sweep kind {sweep!r} (use h or N)")


def converge_sweep(
    cfg: ScenarioConfig, sweep: str, values, output_dir: str | None = None, write=True
) -> dict:
    if cfg.analytic == "none":
        raise ConfigError("convergence sweeps need an analytic model")
    if len(values) < 2:
        raise ConfigError("convergence sweeps need at least two values")
    out_dir = output_dir if output_dir is not None else cfg.output_dir
    rows = []
    for value in values:
        sub = sweep_config(cfg, sweep, value)
        res = run_scenario(sub, write=False)
        rows.append((float(value), res.errors["energy"], res.errors["l2"]))
    xs = np.array([r[0] for r in rows])
    energy = np.array([r[1] for r in rows])
    l2 = np.array([r[2] for r in rows])
    rate_energy, r2_energy = fit_convergence_rate(xs, energy, kind=sweep)
    rate_l2, r2_l2 = fit_convergence_rate(xs, l2, kind=sweep)
    table = {
        "sweep": sweep,
        "values": xs,
        "energy_error": energy,
        "l2_error": l2,
        "rate_energy": rate_energy,
        "r2_energy": r2_energy,
        "rate_l2": rate_l2,
        "r2_l2": r2_l2,
    }
    if write:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "convergence.csv"), "w") as fh:
            fh.write("param,energy_error,l2_error\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        with open(os.path.join(out_dir, "convergence_meta.json"), "w") as fh:
            json.dump(
                {
                    "sweep": sweep,
                    "rate_energy": rate_energy,
                    "r2_energy": r2_energy,
                    "rate_l2": rate_l2,
                    "r2_l2": r2_l2,
                    "config_sha256": config_hash(cfg),
                },
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
    return table


# ---------------------------------------------------------------------------
# presets

_VERIFICATION_COMMON = """
[region.1]
kind = elastic
rho = 2.7
cp = 6.2
cs = 3.12

[region.2]
kind = acoustic
rho = 1.0
c = 1.0

[discretization]
degree = 2

[time]
dt = auto
safety = 0.5
t_end = 0.1

[boundary]
outer = dirichlet
dirichlet_data = analytic

[source]
type = none
initial = analytic

[output]
directory = out
"""

PRESETS = {
    "verification-matching": """
[domain]
layout = two-box
solid_box = -1, 0; 0, 1; 0, 1
fluid_box = 0, 1; 0, 1; 0, 1
solid_cells = 10, 10, 10
fluid_cells = 10, 10, 10
analytic = verification
"""
    + _VERIFICATION_COMMON,
    "verification-nonmatching": """
[domain]
layout = two-box
solid_box = -1, 0; 0, 1; 0, 1
fluid_box = 0, 1; 0, 1; 0, 1
solid_cells = 10, 10, 10
fluid_cells = 5, 5, 5
analytic = verification
"""
    + _VERIFICATION_COMMON,
    "scholte": """
[domain]
layout = two-box
solid_box = -1, 1; -1, 1; -10, 0
fluid_box = -1, 1; -1, 1; 0, 10
solid_cells = 3, 3, 16
fluid_cells = 3, 3, 16
analytic = scholte
omega = 1.0

[region.1]
kind = elastic
rho = 1.0
lam = 1.0
mu = 1.0

[region.2]
kind = acoustic
rho = 1.0
c = 1.0

[discretization]
degree = 2

[time]
dt = auto
safety = 0.5
t_end = 0.1

[boundary]
outer = dirichlet
dirichlet_data = analytic

[source]
type = none
initial = analytic

[output]
directory = out
""",
    "scholte-full": """
[domain]
layout = two-box
solid_box = -1, 1; -1, 1; -20, 0
fluid_box = -1, 1; -1, 1; 0, 20
solid_cells = 5, 5, 48
fluid_cells = 5, 5, 48
analytic = scholte
omega = 1.0

[region.1]
kind = elastic
rho = 1.0
lam = 1.0
mu = 1.0

[region.2]
kind = acoustic
rho = 1.0
c = 1.0

[discretization]
degree = 4

[time]
dt = auto
safety = 0.5
t_end = 0.1

[boundary]
outer = dirichlet
dirichlet_data = analytic

[source]
type = none
initial = analytic

[output]
directory = out
""",
    "cavity-demo": """
[domain]
layout = cavity-box
solid_box = -150, 150; -150, 150; -75, 75
fluid_box = -15, 15; -15, 15; -15, 15
solid_cells = 20, 20, 10
fluid_cells = 6, 6, 6
analytic = none

[region.1]
kind = elastic
rho = 2700.0
cp = 3000.0
cs = 1734.0

[region.2]
kind = acoustic
rho = 1024.0
c = 300.0

[discretization]
degree = 2

[time]
dt = auto
safety = 0.35
t_end = 0.35

[boundary]
outer = absorbing

[source]
type = ricker
position = 50, 0, 50
direction = 0, 0, 1
peak_frequency = 22.0
delay = 0.12
amplitude = 1e10

[receivers]
points = 32, 0, 28; 2, 0, 31; -33, 0, 28; -70, 0, -5
stride = 1

[output]
directory = out
energy_stride = 5
""",
    "cavity-full": """
[domain]
layout = cavity-box
solid_box = -600, 600; -600, 600; -300, 300
fluid_box = -30, 30; -30, 30; -30, 30
solid_cells = 60, 60, 30
fluid_cells = 12, 12, 12
analytic = none

[region.1]
kind = elastic
rho = 2700.0
cp = 3000.0
cs = 1734.0

[region.2]
kind = acoustic
rho = 1024.0
c = 300.0

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
direction = 0, 0, 1
peak_frequency = 22.0
delay = 0.25
amplitude = 1e10

[receivers]
points = 150, 0, 150; 0, 0, 150; -150, 0, 150; -300, 0, 0
stride = 10

[output]
directory = out
energy_stride = 50
""",
}


def preset_config(name: str, full: bool = False) -> ScenarioConfig:
    key = name
    if full:
        promoted = {"cavity-demo": "cavity-full", "scholte": "scholte-full"}
        key = promoted.get(name, name)
    if key not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        )
    return parse_config(PRESETS[key])


def preset_text(name: str, full: bool = False) -> str:
    return serialize_config(preset_config(name, full))
