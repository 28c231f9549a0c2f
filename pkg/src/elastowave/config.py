"""Scenario configuration: INI text in, validated dataclass out.

The grammar is plain configparser INI with a fixed set of sections;
unknown sections or keys are rejected so typos fail loudly instead of
silently running defaults.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field

from .errors import ConfigError
from .spaces import AcousticMaterial, ElasticMaterial

_SCHEMA = {
    "domain": {
        "layout", "solid_box", "fluid_box", "solid_cells", "fluid_cells",
        "mesh_file", "analytic", "omega",
    },
    "region": {"kind", "rho", "cp", "cs", "lam", "mu", "c", "degree"},
    "discretization": {"degree", "degree_elastic", "degree_acoustic", "alpha"},
    "time": {"dt", "safety", "t_end", "steps"},
    "boundary": {"outer", "dirichlet_data"},
    "source": {
        "type", "position", "direction", "peak_frequency", "delay",
        "amplitude", "initial", "initial_amplitude",
    },
    "receivers": {"points", "stride"},
    "output": {"directory", "snapshot_stride", "energy_stride"},
}

_LAYOUTS = ("two-box", "cavity-box", "file")
_ANALYTIC = ("none", "verification", "scholte")


def _fail(msg: str) -> None:
    raise ConfigError(msg)


def _floats(text: str, n: int, what: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        _fail(f"{what}: could not parse numbers from {text!r}")
    if len(vals) != n:
        _fail(f"{what}: expected {n} numbers, got {len(vals)}")
    return vals

def _ints(text: str, n: int, what: str) -> tuple:
    vals = _floats(text, n, what)
    out = tuple(int(v) for v in vals)
    if any(o != v for o, v in zip(out, vals)):
        _fail(f"{what}: expected integers, got {text!r}")
    return out


def _box(text: str, what: str) -> tuple:
    """'x0,x1; y0,y1; z0,z1' -> ((x0,x1),(y0,y1),(z0,z1))."""
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) != 3:
        _fail(f"{what}: expected three 'lo,hi' pairs separated by ';'")
    box = tuple(_floats(p, 2, what) for p in parts)
    for lo, hi in box:
        if not hi > lo:
            _fail(f"{what}: empty extent [{lo}, {hi}]")
    return box


def _points(text: str, what: str) -> tuple:
    parts = [p for p in text.split(";") if p.strip()]
    return tuple(_floats(p, 3, what) for p in parts)


def _fmt_box(box) -> str:
    return "; ".join(f"{lo!r}, {hi!r}" for lo, hi in box)


def _fmt_points(points) -> str:
    return "; ".join(", ".join(repr(v) for v in p) for p in points)


@dataclass
class RegionSpec:
    kind: str
    rho: float
    cp: float | None = None
    cs: float | None = None
    lam: float | None = None
    mu: float | None = None
    c: float | None = None
    degree: int | None = None

    def validate(self, rid: int) -> None:
        if self.kind not in ("elastic", "acoustic"):
            _fail(f"region {rid}: unknown kind {self.kind!r}")
        if self.rho <= 0:
            _fail(f"region {rid}: density must be positive, got {self.rho}")
        if self.degree is not None and self.degree < 1:
            _fail(f"region {rid}: degree must be >= 1")
        if self.kind == "acoustic":
            if self.c is None or self.c <= 0:
                _fail(f"region {rid}: acoustic region needs a positive speed c")
            return
        has_speeds = self.cp is not None and self.cs is not None
        has_moduli = self.lam is not None and self.mu is not None
        if has_speeds == has_moduli:
            _fail(f"region {rid}: give either (cp, cs) or (lam, mu)")
        if has_speeds and not (self.cp > self.cs > 0):
            _fail(f"region {rid}: needs cp > cs > 0")
        if has_moduli and (self.mu <= 0 or self.lam + 2 * self.mu <= 0):
            _fail(f"region {rid}: moduli must give positive wave speeds")

    def material(self):
        if self.kind == "acoustic":
            return AcousticMaterial(rho=self.rho, c=self.c)
        if self.cp is not None:
            return ElasticMaterial.from_speeds(self.rho, self.cp, self.cs)
        return ElasticMaterial(rho=self.rho, lam=self.lam, mu=self.mu)


@dataclass
class ScenarioConfig:
    # domain
    layout: str = "two-box"
    solid_box: tuple = ((-1.0, 0.0), (0.0, 1.0), (0.0, 1.0))
    fluid_box: tuple = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    solid_cells: tuple = (4, 4, 4)
    fluid_cells: tuple = (4, 4, 4)
    mesh_file: str | None = None
    analytic: str = "none"
    omega: float = 1.0
    regions: dict = field(default_factory=dict)
    # discretization
    degree_elastic: int = 2
    degree_acoustic: int = 2
    alpha: float = 1.0
    # time
    dt: float | None = None  # None = estimator
    safety: float = 0.5
    t_end: float = 0.1
    steps: int | None = None
    # boundary
    outer: str = "dirichlet"
    dirichlet_data: str = "zero"
    # source
    source_type: str = "none"
    source_position: tuple = (0.0, 0.0, 0.0)
    source_direction: tuple = (0.0, 0.0, 1.0)
    peak_frequency: float = 1.0
    delay: float = 0.0
    amplitude: float = 1.0
    initial: str = "zero"
    initial_amplitude: float = 1.0
    # receivers
    receiver_points: tuple = ()
    receiver_stride: int = 1
    # output
    output_dir: str = "out"
    snapshot_stride: int = 0
    energy_stride: int = 0

    def validate(self) -> None:
        if self.layout not in _LAYOUTS:
            _fail(f"unknown layout {self.layout!r}")
        if self.analytic not in _ANALYTIC:
            _fail(f"unknown analytic model {self.analytic!r}")
        if self.layout == "file" and not self.mesh_file:
            _fail("layout = file needs mesh_file")
        if self.layout != "file":
            if any(c < 1 for c in self.solid_cells + self.fluid_cells):
                _fail("cell counts must be >= 1")
            if self.layout == "cavity-box":
                for d in range(3):
                    if (
                        self.fluid_box[d][0] <= self.solid_box[d][0]
                        or self.fluid_box[d][1] >= self.solid_box[d][1]
                    ):
                        _fail("fluid_box must lie strictly inside solid_box")
        if not self.regions:
            _fail("at least one [region.<id>] section is required")
        for rid, spec in self.regions.items():
            spec.validate(rid)
        if self.degree_elastic < 1 or self.degree_acoustic < 1:
            _fail("polynomial degrees must be >= 1")
        if self.alpha < 0:
            _fail("penalty alpha must be >= 0")
        if self.dt is not None and self.dt <= 0:
            _fail("dt must be positive (or omitted for the estimator)")
        if not 0 < self.safety <= 1:
            _fail("safety must be in (0, 1]")
        if self.steps is not None and self.steps < 1:
            _fail("steps must be >= 1")
        if self.steps is None and self.t_end <= 0:
            _fail("t_end must be positive")
        if self.outer not in ("dirichlet", "absorbing"):
            _fail(f"unknown outer boundary {self.outer!r}")
        if self.dirichlet_data not in ("zero", "analytic"):
            _fail(f"unknown dirichlet_data {self.dirichlet_data!r}")
        if self.dirichlet_data == "analytic" and self.analytic == "none":
            _fail("dirichlet_data = analytic needs an analytic model")
        if self.source_type not in ("none", "ricker"):
            _fail(f"unknown source type {self.source_type!r}")
        if self.source_type == "ricker" and self.peak_frequency <= 0:
            _fail("ricker source needs a positive peak_frequency")
        if self.initial not in ("zero", "analytic", "bump"):
            _fail(f"unknown initial condition {self.initial!r}")
        if self.initial == "analytic" and self.analytic == "none":
            _fail("initial = analytic needs an analytic model")
        if self.receiver_stride < 1:
            _fail("receiver stride must be >= 1")
        if self.snapshot_stride < 0 or self.energy_stride < 0:
            _fail("output strides must be >= 0")

    def materials(self) -> dict:
        return {rid: spec.material() for rid, spec in self.regions.items()}

    def degrees(self, kind: str) -> dict:
        base = self.degree_elastic if kind == "elastic" else self.degree_acoustic
        return {
            rid: spec.degree if spec.degree is not None else base
            for rid, spec in self.regions.items()
            if spec.kind == kind
        }


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc

    cfg = ScenarioConfig()
    for section in parser.sections():
        base = section.split(".", 1)[0]
        if base not in _SCHEMA or (base == "region") != ("." in section):
            _fail(f"unknown section [{section}]")
        allowed = _SCHEMA[base]
        for key in parser[section]:
            if key not in allowed:
                _fail(f"unknown key {key!r} in [{section}]")

    get = parser.get

    def has(section, key):
        return parser.has_option(section, key)

    try:
        return _extract(parser, cfg, get, has)
    except ValueError as exc:
        raise ConfigError(f"bad value in config: {exc}") from exc


def _extract(parser, cfg, get, has) -> ScenarioConfig:

    if parser.has_section("domain"):
        s = "domain"
        if has(s, "layout"):
            cfg.layout = get(s, "layout").strip()
        if has(s, "solid_box"):
            cfg.solid_box = _box(get(s, "solid_box"), "solid_box")
        if has(s, "fluid_box"):
            cfg.fluid_box = _box(get(s, "fluid_box"), "fluid_box")
        if has(s, "solid_cells"):
            cfg.solid_cells = _ints(get(s, "solid_cells"), 3, "solid_cells")
        if has(s, "fluid_cells"):
            cfg.fluid_cells = _ints(get(s, "fluid_cells"), 3, "fluid_cells")
        if has(s, "mesh_file"):
            cfg.mesh_file = get(s, "mesh_file").strip()
        if has(s, "analytic"):
            cfg.analytic = get(s, "analytic").strip()
        if has(s, "omega"):
            cfg.omega = parser.getfloat(s, "omega")

    for section in parser.sections():
        if not section.startswith("region."):
            continue
        try:
            rid = int(section.split(".", 1)[1])
        except ValueError:
            _fail(f"region id in [{section}] must be an integer")
        spec = RegionSpec(
            kind=get(section, "kind", fallback="elastic").strip(),
            rho=parser.getfloat(section, "rho", fallback=-1.0),
        )
        for key in ("cp", "cs", "lam", "mu", "c"):
            if has(section, key):
                setattr(spec, key, parser.getfloat(section, key))
        if has(section, "degree"):
            spec.degree = parser.getint(section, "degree")
        cfg.regions[rid] = spec

    if parser.has_section("discretization"):
        s = "discretization"
        if has(s, "degree"):
            cfg.degree_elastic = cfg.degree_acoustic = parser.getint(s, "degree")
        if has(s, "degree_elastic"):
            cfg.degree_elastic = parser.getint(s, "degree_elastic")
        if has(s, "degree_acoustic"):
            cfg.degree_acoustic = parser.getint(s, "degree_acoustic")
        if has(s, "alpha"):
            cfg.alpha = parser.getfloat(s, "alpha")

    if parser.has_section("time"):
        s = "time"
        if has(s, "dt"):
            raw = get(s, "dt").strip().lower()
            cfg.dt = None if raw == "auto" else float(raw)
        if has(s, "safety"):
            cfg.safety = parser.getfloat(s, "safety")
        if has(s, "t_end"):
            cfg.t_end = parser.getfloat(s, "t_end")
        if has(s, "steps"):
            cfg.steps = parser.getint(s, "steps")

    if parser.has_section("boundary"):
        s = "boundary"
        if has(s, "outer"):
            cfg.outer = get(s, "outer").strip()
        if has(s, "dirichlet_data"):
            cfg.dirichlet_data = get(s, "dirichlet_data").strip()

    if parser.has_section("source"):
        s = "source"
        if has(s, "type"):
            cfg.source_type = get(s, "type").strip()
        if has(s, "position"):
            cfg.source_position = _floats(get(s, "position"), 3, "source position")
        if has(s, "direction"):
            cfg.source_direction = _floats(get(s, "direction"), 3, "source direction")
        for key, attr in (
            ("peak_frequency", "peak_frequency"),
            ("delay", "delay"),
            ("amplitude", "amplitude"),
            ("initial_amplitude", "initial_amplitude"),
        ):
            if has(s, key):
                setattr(cfg, attr, parser.getfloat(s, key))
        if has(s, "initial"):
            cfg.initial = get(s, "initial").strip()

    if parser.has_section("receivers"):
        s = "receivers"
        if has(s, "points"):
            cfg.receiver_points = _points(get(s, "points"), "receiver points")
        if has(s, "stride"):
            cfg.receiver_stride = parser.getint(s, "stride")

    if parser.has_section("output"):
        s = "output"
        if has(s, "directory"):
            cfg.output_dir = get(s, "directory").strip()
        if has(s, "snapshot_stride"):
            cfg.snapshot_stride = parser.getint(s, "snapshot_stride")
        if has(s, "energy_stride"):
            cfg.energy_stride = parser.getint(s, "energy_stride")

    cfg.validate()
    return cfg


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical INI text; parse(serialize(c)) == c."""
    parser = configparser.ConfigParser(interpolation=None)
    dom = {
        "layout": cfg.layout,
        "analytic": cfg.analytic,
        "omega": repr(cfg.omega),
    }
    if cfg.layout == "file":
        dom["mesh_file"] = cfg.mesh_file
    else:
        dom.update(
            solid_box=_fmt_box(cfg.solid_box),
            fluid_box=_fmt_box(cfg.fluid_box),
            solid_cells=", ".join(str(c) for c in cfg.solid_cells),
            fluid_cells=", ".join(str(c) for c in cfg.fluid_cells),
        )
    parser["domain"] = dom
    for rid in sorted(cfg.regions):
        spec = cfg.regions[rid]
        sec = {"kind": spec.kind, "rho": repr(spec.rho)}
        for key in ("cp", "cs", "lam", "mu", "c"):
            val = getattr(spec, key)
            if val is not None:
                sec[key] = repr(val)
        if spec.degree is not None:
            sec["degree"] = str(spec.degree)
        parser[f"region.{rid}"] = sec
    parser["discretization"] = {
        "degree_elastic": str(cfg.degree_elastic),
        "degree_acoustic": str(cfg.degree_acoustic),
        "alpha": repr(cfg.alpha),
    }
    time_sec = {
        "dt": "auto" if cfg.dt is None else repr(cfg.dt),
        "safety": repr(cfg.safety),
        "t_end": repr(cfg.t_end),
    }
    if cfg.steps is not None:
        time_sec["steps"] = str(cfg.steps)
    parser["time"] = time_sec
    parser["boundary"] = {"outer": cfg.outer, "dirichlet_data": cfg.dirichlet_data}
    parser["source"] = {
        "type": cfg.source_type,
        "position": ", ".join(repr(v) for v in cfg.source_position),
        "direction": ", ".join(repr(v) for v in cfg.source_direction),
        "peak_frequency": repr(cfg.peak_frequency),
        "delay": repr(cfg.delay),
        "amplitude": repr(cfg.amplitude),
        "initial": cfg.initial,
        "initial_amplitude": repr(cfg.initial_amplitude),
    }
    rec = {"stride": str(cfg.receiver_stride)}
    if cfg.receiver_points:
        rec["points"] = _fmt_points(cfg.receiver_points)
    parser["receivers"] = rec
    parser["output"] = {
        "directory": cfg.output_dir,
        "snapshot_stride": str(cfg.snapshot_stride),
        "energy_stride": str(cfg.energy_stride),
    }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()
