"""Hexahedral multi-region meshes and fluid-solid interface geometry.

A mesh is a flat list of trilinear hexahedra partitioned into regions
(elastic or acoustic).  Regions are conforming inside themselves but are
allowed to meet other regions on planar, axis-aligned interfaces with
completely unrelated grids; the coupling quadrature for those interfaces
is built here as rectangle-intersection ("mortar") pairs.

Vertex order inside an element follows the VTK hexahedron convention.
Local faces are numbered 0:-x 1:+x 2:-y 3:+y 4:-z 5:+z in reference
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import QuadratureRule1D, gll_rule, tensor_grid
from .errors import GeometryError, MeshFormatError

__all__ = [
    "HexMesh",
    "FaceSets",
    "FacePair",
    "build_box_mesh",
    "build_cavity_box_mesh",
    "merge_meshes",
    "import_mesh",
    "mesh_to_text",
    "classify_faces",
    "build_interface_pairs",
    "map_points",
    "jacobians",
    "inverse_map",
    "element_nodes_physical",
    "find_containing_element",
]

VALID_TAGS = ("DIR", "NEU", "ABS")

# vertex sign pattern (VTK order) and derived face tables
HEX_SIGNS = np.array(
    [
        [-1, -1, -1],
        [+1, -1, -1],
        [+1, +1, -1],
        [-1, +1, -1],
        [-1, -1, +1],
        [+1, -1, +1],
        [+1, +1, +1],
        [-1, +1, +1],
    ],
    dtype=float,
)

# local vertex ids of each face, ordered so that corner k carries face
# coordinates (s, t) = (-1,-1), (+1,-1), (+1,+1), (-1,+1) where (s, t)
# are the element reference axes other than the face normal, in
# increasing axis order
FACE_CORNERS = np.array(
    [
        [0, 3, 7, 4],  # -x
        [1, 2, 6, 5],  # +x
        [0, 1, 5, 4],  # -y
        [3, 2, 6, 7],  # +y
        [0, 1, 2, 3],  # -z
        [4, 5, 6, 7],  # +z
    ],
    dtype=int,
)

FACE_AXIS = np.array([0, 0, 1, 1, 2, 2])
FACE_SIGN = np.array([-1.0, +1.0, -1.0, +1.0, -1.0, +1.0])


def hex_shape(ref_pts: np.ndarray) -> np.ndarray:
    """Trilinear shape functions at reference points: (npts, 8)."""
    ref = np.atleast_2d(ref_pts)
    return np.prod(1.0 + ref[:, None, :] * HEX_SIGNS[None, :, :], axis=2) / 8.0


def hex_shape_grad(ref_pts: np.ndarray) -> np.ndarray:
    """Reference gradients of the trilinear shape functions: (npts, 8, 3)."""
    ref = np.atleast_2d(ref_pts)
    f = 1.0 + ref[:, None, :] * HEX_SIGNS[None, :, :]  # (np, 8, 3)
    out = np.empty((ref.shape[0], 8, 3))
    for d in range(3):
        others = [i for i in range(3) if i != d]
        out[:, :, d] = HEX_SIGNS[None, :, d] * f[:, :, others[0]] * f[:, :, others[1]] / 8.0
    return out


@dataclass
class HexMesh:
    """Multi-region hexahedral mesh.

    face_tags maps (element id, local face) to one of DIR/NEU/ABS for
    outer boundary faces.  Interface faces between regions stay untagged;
    they are discovered geometrically by `classify_faces`.
    """

    vertices: np.ndarray
    elements: np.ndarray
    element_region: np.ndarray
    region_kind: dict[int, str]
    face_tags: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.elements = np.asarray(self.elements, dtype=np.int64)
        self.element_region = np.asarray(self.element_region, dtype=np.int64)
        for rid in np.unique(self.element_region):
            kind = self.region_kind.get(int(rid))
            if kind not in ("elastic", "acoustic"):
                raise GeometryError(f"region {rid} has no elastic/acoustic kind")
        for (el, lf), tag in self.face_tags.items():
            if tag not in VALID_TAGS:
                raise MeshFormatError(f"unknown face tag {tag!r} on element {el}")
            if not (0 <= lf < 6) or not (0 <= el < self.n_elements):
                raise MeshFormatError(f"face reference ({el}, {lf}) out of range")
        _check_jacobians(self)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def geom_tol(self) -> float:
        return 1e-9 * self.diameter

    def region_elements(self, region_id: int) -> np.ndarray:
        return np.nonzero(self.element_region == region_id)[0]

    def regions_of_kind(self, kind: str) -> list[int]:
        return sorted(r for r, k in self.region_kind.items() if k == kind)

    def element_size(self, elem: int) -> float:
        """Longest edge of the element; used as the local meshsize h."""
        v = self.vertices[self.elements[elem]]
        edges = [
            (0, 1), (1, 2), (2, 3), (3, 0),
            (4, 5), (5, 6), (6, 7), (7, 4),
            (0, 4), (1, 5), (2, 6), (3, 7),
        ]
        return max(np.linalg.norm(v[a] - v[b]) for a, b in edges)

    def region_meshsize(self, region_id: int) -> float:
        return max(self.element_size(e) for e in self.region_elements(region_id))


_PROBE_RULE = gll_rule(2)


def _check_jacobians(mesh: HexMesh) -> None:
    """Trilinear maps must be orientation preserving everywhere we quadrate."""
    pts = tensor_grid(_PROBE_RULE)
    dshape = hex_shape_grad(pts)  # (np, 8, 3)
    verts = mesh.vertices[mesh.elements]  # (ne, 8, 3)
    jac = np.einsum("pvd,evc->epcd", dshape, verts)
    det = np.linalg.det(jac)
    bad = np.nonzero(det.min(axis=1) <= 0)[0]
    if bad.size:
        raise GeometryError(
            f"element {bad[0]} has non-positive Jacobian determinant "
            f"(min {det[bad[0]].min():.3e})"
        )


# ---------------------------------------------------------------------------
# geometry map


def map_points(mesh: HexMesh, elem: int, ref_pts: np.ndarray) -> np.ndarray:
    """Physical coordinates of reference points inside one element."""
    return hex_shape(ref_pts) @ mesh.vertices[mesh.elements[elem]]

def jacobians(mesh: HexMesh, elem: int, ref_pts: np.ndarray):
    """(J, detJ) at reference points; J[p, i, j] = dx_i/dxi_j."""
    dshape = hex_shape_grad(ref_pts)
    verts = mesh.vertices[mesh.elements[elem]]
    jac = np.einsum("pvd,vc->pcd", dshape, verts)
    return jac, np.linalg.det(jac)


def inverse_map(mesh: HexMesh, elem: int, point, tol: float = 1e-12, maxit: int = 50):
    """Invert the trilinear map by Newton iteration.

    Returns (ref, inside): `inside` is True when the point lies in the
    closed reference cube up to a geometric tolerance.
    """
    target = np.asarray(point, dtype=float)
    ref = np.zeros(3)
    scale = max(mesh.element_size(elem), 1e-300)
    for _ in range(maxit):
        x = map_points(mesh, elem, ref[None, :])[0]
        resid = target - x
        if np.linalg.norm(resid) < tol * scale:
            break
        jac, det = jacobians(mesh, elem, ref[None, :])
        if det[0] <= 0:
            return ref, False
        ref = ref + np.linalg.solve(jac[0], resid)
        if np.max(np.abs(ref)) > 3.0:  # diverging: point is far outside
            return ref, False
    inside = bool(np.max(np.abs(ref)) <= 1.0 + 1e-8)
    return ref, inside


def element_nodes_physical(
    mesh: HexMesh, rule: QuadratureRule1D, elems: np.ndarray
) -> np.ndarray:
    """Physical positions of the tensor GLL nodes: (nelem, (N+1)^3, 3)."""
    shape = hex_shape(tensor_grid(rule))  # (nl, 8)
    verts = mesh.vertices[mesh.elements[np.asarray(elems)]]
    return np.einsum("lv,evc->elc", shape, verts)


def find_containing_element(mesh: HexMesh, point, kind: str | None = None):
    """Locate (element, reference coords) for a physical point.

    Candidates are screened by bounding box, then confirmed by inverting
    the trilinear map; ties on shared faces resolve to the lowest element
    id.  Raises GeometryError when no element contains the point.
    """
    pt = np.asarray(point, dtype=float)
    verts = mesh.vertices[mesh.elements]
    tol = mesh.geom_tol + 1e-12
    inside_box = np.all((verts.min(axis=1) <= pt + tol) & (verts.max(axis=1) >= pt - tol), axis=1)
    for elem in np.nonzero(inside_box)[0]:
        if kind is not None and mesh.region_kind[int(mesh.element_region[elem])] != kind:
            continue
        ref, ok = inverse_map(mesh, int(elem), pt)
        if ok:
            return int(elem), np.clip(ref, -1.0, 1.0)
    where = f" in an {kind} region" if kind else ""
    raise GeometryError(f"point {pt.tolist()} lies outside the mesh{where}")


# ---------------------------------------------------------------------------
# builders


def build_box_mesh(
    bounds,
    cells,
    region_id: int = 1,
    kind: str = "elastic",
    outer_tag: str | None = "DIR",
) -> HexMesh:
    """Uniform axis-aligned box mesh forming a single region.

    bounds is ((x0, x1), (y0, y1), (z0, z1)); cells the subdivisions per
    axis.  All outer faces receive `outer_tag` unless it is None.
    """
    bounds = np.asarray(bounds, dtype=float)
    nx, ny, nz = (int(c) for c in cells)
    if min(nx, ny, nz) < 1:
        raise GeometryError(f"box subdivisions must be positive, got {cells}")
    ax = [np.linspace(bounds[d, 0], bounds[d, 1], (nx, ny, nz)[d] + 1) for d in range(3)]
    xx, yy, zz = np.meshgrid(ax[0], ax[1], ax[2], indexing="ij")
    vertices = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)

    def vid(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    elements = []
    face_tags: dict[tuple[int, int], str] = {}
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                elem = len(elements)
                elements.append(
                    [
                        vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k),
                        vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1),
                    ]
                )
                if outer_tag is not None:
                    if i == 0:
                        face_tags[(elem, 0)] = outer_tag
                    if i == nx - 1:
                        face_tags[(elem, 1)] = outer_tag
                    if j == 0:
                        face_tags[(elem, 2)] = outer_tag
                    if j == ny - 1:
                        face_tags[(elem, 3)] = outer_tag
                    if k == 0:
                        face_tags[(elem, 4)] = outer_tag
                    if k == nz - 1:
                        face_tags[(elem, 5)] = outer_tag
    ne = len(elements)
    return HexMesh(
        vertices=vertices,
        elements=np.asarray(elements),
        element_region=np.full(ne, region_id),
        region_kind={region_id: kind},
        face_tags=face_tags,
    )


def merge_meshes(meshes: list[HexMesh]) -> HexMesh:
    """Concatenate meshes with disjoint region ids.

    Vertex sets stay disjoint; coincident interface nodes are matched
    geometrically downstream, never topologically.
    """
    kinds: dict[int, str] = {}
    for m in meshes:
        for rid, kind in m.region_kind.items():
            if rid in kinds:
                raise GeometryError(f"duplicate region id {rid} while merging meshes")
            kinds[rid] = kind
    verts = np.vstack([m.vertices for m in meshes])
    voff = np.cumsum([0] + [m.n_vertices for m in meshes])
    eoff = np.cumsum([0] + [m.n_elements for m in meshes])
    elems = np.vstack([m.elements + voff[i] for i, m in enumerate(meshes)])
    regions = np.concatenate([m.element_region for m in meshes])
    tags = {}
    for i, m in enumerate(meshes):
        for (el, lf), tag in m.face_tags.items():
            tags[(el + int(eoff[i]), lf)] = tag
    return HexMesh(verts, elems, regions, kinds, tags)


def build_cavity_box_mesh(
    outer_bounds,
    cavity_bounds,
    outer_cells,
    cavity_cells,
    elastic_region: int = 1,
    acoustic_region: int = 2,
    outer_tag: str = "ABS",
) -> HexMesh:
    """Elastic box with a rectangular acoustic cavity carved out of it.

    The cavity walls must coincide with gridlines of the outer lattice;
    the cavity interior gets its own (generally finer) acoustic grid, so
    the interface is non-matching.
    """
    outer_bounds = np.asarray(outer_bounds, dtype=float)
    cavity_bounds = np.asarray(cavity_bounds, dtype=float)
    if np.any(cavity_bounds[:, 0] <= outer_bounds[:, 0]) or np.any(
        cavity_bounds[:, 1] >= outer_bounds[:, 1]
    ):
        raise GeometryError("cavity must lie strictly inside the outer box")
    solid = build_box_mesh(outer_bounds, outer_cells, elastic_region, "elastic", outer_tag)
    centers = solid.vertices[solid.elements].mean(axis=1)
    inside = np.all(
        (centers > cavity_bounds[:, 0]) & (centers < cavity_bounds[:, 1]), axis=1
    )
    tol = solid.geom_tol
    for d in range(3):
        grid = np.linspace(outer_bounds[d, 0], outer_bounds[d, 1], int(outer_cells[d]) + 1)
        for side in range(2):
            if np.min(np.abs(grid - cavity_bounds[d, side])) > tol:
                raise GeometryError(
                    f"cavity wall at axis {d} does not align with the outer grid"
                )
    keep = np.nonzero(~inside)[0]
    remap = {int(old): new for new, old in enumerate(keep)}
    tags = {
        (remap[el], lf): tag
        for (el, lf), tag in solid.face_tags.items()
        if el in remap
    }
    solid = HexMesh(
        solid.vertices,
        solid.elements[keep],
        solid.element_region[keep],
        dict(solid.region_kind),
        tags,
    )
    fluid = build_box_mesh(cavity_bounds, cavity_cells, acoustic_region, "acoustic", None)
    return merge_meshes([solid, fluid])


def strip_face_tags_on_plane(mesh: HexMesh, axis: int, coord: float) -> None:
    """Drop boundary tags from faces lying in an axis plane (in place).

    Box builders tag every outer face; when two boxes are glued, the tags
    on the shared plane must go away so the plane classifies as internal.
    """
    tol = mesh.geom_tol + 1e-15
    keep = {}
    for (el, lf), tag in mesh.face_tags.items():
        pts = mesh.vertices[mesh.elements[el][FACE_CORNERS[lf]]]
        if np.max(np.abs(pts[:, axis] - coord)) < tol:
            continue
        keep[(el, lf)] = tag
    mesh.face_tags = keep


# ---------------------------------------------------------------------------
# text format


def mesh_to_text(mesh: HexMesh) -> str:
    lines = []
    for rid in sorted(mesh.region_kind):
        lines.append(f"REGION {rid} {mesh.region_kind[rid].upper()}")
    lines.append(f"NODES {mesh.n_vertices}")
    for i, v in enumerate(mesh.vertices):
        lines.append(f"{i} {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    lines.append(f"HEX {mesh.n_elements}")
    for i, (el, rid) in enumerate(zip(mesh.elements, mesh.element_region)):
        lines.append(f"{i} {rid} " + " ".join(str(v) for v in el))
    lines.append(f"FACES {len(mesh.face_tags)}")
    for (el, lf), tag in sorted(mesh.face_tags.items()):
        lines.append(f"{el} {lf} {tag}")
    return "\n".join(lines) + "\n"


def import_mesh(source: str) -> HexMesh:
    """Parse the plain-text mesh format (path or literal content).

    Sections: REGION lines, then NODES/HEX/FACES blocks with counts.
    Node and element ids may be arbitrary non-negative integers; they are
    remapped to dense indices in order of appearance.
    """
    if "\n" not in source:
        with open(source, "r") as fh:
            text = fh.read()
    else:
        text = source
    lines = text.splitlines()
    region_kind: dict[int, str] = {}
    node_ids: dict[int, int] = {}
    verts: list[list[float]] = []
    elem_ids: dict[int, int] = {}
    elems: list[list[int]] = []
    elem_region: list[int] = []
    face_tags: dict[tuple[int, int], str] = {}

    def err(lineno, msg):
        return MeshFormatError(f"line {lineno + 1}: {msg}")

    i = 0

    def next_content(j):
        while j < len(lines) and not lines[j].strip():
            j += 1
        return j

    while True:
        i = next_content(i)
        if i >= len(lines):
            break
        parts = lines[i].split()
        key = parts[0].upper()
        if key == "REGION":
            if len(parts) != 3 or parts[2].upper() not in ("ELASTIC", "ACOUSTIC"):
                raise err(i, f"bad region descriptor {lines[i]!r}")
            region_kind[int(parts[1])] = parts[2].lower()
            i += 1
        elif key == "NODES":
            count = int(parts[1])
            for _ in range(count):
                i = next_content(i + 1)
                if i >= len(lines):
                    raise err(i - 1, "unexpected end of NODES block")
                p = lines[i].split()
                if len(p) != 4:
                    raise err(i, f"node line needs 'id x y z', got {lines[i]!r}")
                nid = int(p[0])
                if nid in node_ids:
                    raise err(i, f"duplicate node id {nid}")
                node_ids[nid] = len(verts)
                verts.append([float(p[1]), float(p[2]), float(p[3])])
            i += 1
        elif key == "HEX":
            count = int(parts[1])
            for _ in range(count):
                i = next_content(i + 1)
                if i >= len(lines):
                    raise err(i - 1, "unexpected end of HEX block")
                p = lines[i].split()
                if len(p) != 10:
                    raise err(i, f"hex line needs 'id region v1..v8', got {lines[i]!r}")
                eid = int(p[0])
                if eid in elem_ids:
                    raise err(i, f"duplicate element id {eid}")
                try:
                    conn = [node_ids[int(v)] for v in p[2:]]
                except KeyError as exc:
                    raise err(i, f"unknown node id {exc.args[0]}") from None
                elem_ids[eid] = len(elems)
                elems.append(conn)
                elem_region.append(int(p[1]))
            i += 1
        elif key == "FACES":
            count = int(parts[1])
            for _ in range(count):
                i = next_content(i + 1)
                if i >= len(lines):
                    raise err(i - 1, "unexpected end of FACES block")
                p = lines[i].split()
                if len(p) != 3:
                    raise err(i, f"face line needs 'elem face tag', got {lines[i]!r}")
                eid, lf, tag = int(p[0]), int(p[1]), p[2].upper()
                if eid not in elem_ids:
                    raise err(i, f"unknown element id {eid}")
                if not 0 <= lf < 6:
                    raise err(i, f"local face must be 0..5, got {lf}")
                if tag not in VALID_TAGS:
                    raise err(i, f"face tag must be one of {VALID_TAGS}, got {tag!r}")
                face_tags[(elem_ids[eid], lf)] = tag
            i += 1
        else:
            raise err(i, f"unknown section {parts[0]!r}")
    if not elems:
        raise MeshFormatError("mesh has no elements")
    for rid in set(elem_region):
        if rid not in region_kind:
            raise MeshFormatError(f"element references region {rid} with no REGION line")
    return HexMesh(
        vertices=np.asarray(verts),
        elements=np.asarray(elems),
        element_region=np.asarray(elem_region),
        region_kind=region_kind,
        face_tags=face_tags,
    )


# ---------------------------------------------------------------------------
# face classification and interface pairing


@dataclass
class FaceSets:
    """Output of `classify_faces`.

    dirichlet/neumann/absorbing hold (element, local face) tuples.
    interface_faces maps an ordered region pair to raw geometric overlap
    records: (elem_a, face_a, elem_b, face_b, rect) with rect the
    intersection rectangle ((axis, plane), (u0, u1), (v0, v1)) in the two
    in-plane physical axes.
    """

    dirichlet: list
    neumann: list
    absorbing: list
    interface_faces: dict


def _region_boundary_faces(mesh: HexMesh, region: int):
    counts: dict[frozenset, list] = {}
    for elem in mesh.region_elements(region):
        conn = mesh.elements[elem]
        for lf in range(6):
            key = frozenset(int(conn[v]) for v in FACE_CORNERS[lf])
            counts.setdefault(key, []).append((int(elem), lf))
        if len(set(int(v) for v in conn)) != 8:
            raise GeometryError(f"element {elem} has repeated vertices")
    out = []
    for key, faces in counts.items():
        if len(faces) > 2:
            raise GeometryError(f"face shared by {len(faces)} elements in region {region}")
        if len(faces) == 1:
            out.append(faces[0])
    return out


def _face_plane(mesh: HexMesh, elem: int, lf: int, tol: float):
    """(axis, coord, rect) for an axis-aligned rectangular face, else None.

    rect is ((u0, u1), (v0, v1)) along the two in-plane axes in
    increasing axis order.
    """
    pts = mesh.vertices[mesh.elements[elem][FACE_CORNERS[lf]]]
    for axis in range(3):
        vals = pts[:, axis]
        if vals.max() - vals.min() < tol:
            t1, t2 = [d for d in range(3) if d != axis]
            u, v = pts[:, t1], pts[:, t2]
            # rectangle test: two distinct values per in-plane axis
            if (
                abs(np.sort(u)[0] - np.sort(u)[1]) < tol
                and abs(np.sort(u)[2] - np.sort(u)[3]) < tol
                and abs(np.sort(v)[0] - np.sort(v)[1]) < tol
                and abs(np.sort(v)[2] - np.sort(v)[3]) < tol
            ):
                return axis, float(vals.mean()), ((u.min(), u.max()), (v.min(), v.max()))
            return None
    return None


def classify_faces(mesh: HexMesh) -> FaceSets:
    """Split region-boundary faces into outer conditions and interfaces.

    A region-boundary face overlapping (in the same plane) a boundary face
    of another region is an interface face; it must be covered completely
    by such overlaps.  Every remaining boundary face needs a DIR/NEU/ABS
    tag.
    """
    tol = mesh.geom_tol
    regions = sorted(mesh.region_kind)
    boundary = {r: _region_boundary_faces(mesh, r) for r in regions}
    planes: dict[int, list] = {}
    for r in regions:
        recs = []
        for elem, lf in boundary[r]:
            pl = _face_plane(mesh, elem, lf, tol)
            recs.append((elem, lf, pl))
        planes[r] = recs

    interface_faces: dict = {}
    covered: dict[tuple[int, int], float] = {}
    for ia, ra in enumerate(regions):
        for rb in regions[ia + 1 :]:
            overlaps = []
            for elem_a, lf_a, pa in planes[ra]:
                if pa is None:
                    continue
                axis_a, coord_a, rect_a = pa
                for elem_b, lf_b, pb in planes[rb]:
                    if pb is None:
                        continue
                    axis_b, coord_b, rect_b = pb
                    if axis_a != axis_b or abs(coord_a - coord_b) > tol:
                        continue
                    u0 = max(rect_a[0][0], rect_b[0][0])
                    u1 = min(rect_a[0][1], rect_b[0][1])
                    v0 = max(rect_a[1][0], rect_b[1][0])
                    v1 = min(rect_a[1][1], rect_b[1][1])
                    if u1 - u0 > tol and v1 - v0 > tol:
                        rect = ((axis_a, coord_a), (u0, u1), (v0, v1))
                        overlaps.append((elem_a, lf_a, elem_b, lf_b, rect))
                        area = (u1 - u0) * (v1 - v0)
                        covered[(elem_a, lf_a)] = covered.get((elem_a, lf_a), 0.0) + area
                        covered[(elem_b, lf_b)] = covered.get((elem_b, lf_b), 0.0) + area
            if overlaps:
                ka, kb = mesh.region_kind[ra], mesh.region_kind[rb]
                if ka == "acoustic" and kb == "acoustic":
                    raise GeometryError(
                        "acoustic regions must form a single conforming domain; "
                        f"regions {ra} and {rb} meet on an interface"
                    )
                interface_faces[(ra, rb)] = overlaps

    # faces touched by any overlap must be fully tiled by overlaps
    for r in regions:
        for elem, lf, pl in planes[r]:
            if (elem, lf) not in covered:
                continue
            if pl is None:
                raise GeometryError(f"interface face ({elem}, {lf}) is not axis aligned")
            ((u0, u1), (v0, v1)) = pl[2]
            area = (u1 - u0) * (v1 - v0)
            if abs(covered[(elem, lf)] - area) > tol * mesh.diameter:
                raise GeometryError(
                    f"face ({elem}, {lf}) is only partially covered by the "
                    "opposite region; partial interfaces are unsupported"
                )
            if (elem, lf) in mesh.face_tags:
                raise GeometryError(
                    f"face ({elem}, {lf}) lies on an internal interface but "
                    f"carries boundary tag {mesh.face_tags[(elem, lf)]!r}"
                )

    sets = FaceSets(dirichlet=[], neumann=[], absorbing=[], interface_faces=interface_faces)
    dest = {"DIR": sets.dirichlet, "NEU": sets.neumann, "ABS": sets.absorbing}
    for r in regions:
        for elem, lf in boundary[r]:
            if (elem, lf) in covered:
                continue
            tag = mesh.face_tags.get((elem, lf))
            if tag is None:
                raise GeometryError(
                    f"outer face ({elem}, {lf}) has no boundary tag and no "
                    "facing region"
                )
            dest[tag].append((elem, lf))
    for lst in dest.values():
        lst.sort()
    return sets


@dataclass
class FacePair:
    """Quadrature for one rectangle of interface shared by two elements.

    Side a/b each get the quadrature points in their own reference
    coordinates.  `normal_a` is the outward unit normal of side a
    (constant on the planar face); weights carry the physical surface
    measure.
    """

    elem_a: int
    face_a: int
    elem_b: int
    face_b: int
    ref_a: np.ndarray
    ref_b: np.ndarray
    weights: np.ndarray
    normal_a: np.ndarray
    area: float


def _face_affine_2d(mesh: HexMesh, elem: int, lf: int, axes: tuple[int, int], tol: float):
    """Affine coefficients mapping face coords (s, t) to in-plane physical
    coordinates: p(s, t) = a + b s + c t.  Errors out on sheared faces."""
    pts = mesh.vertices[mesh.elements[elem][FACE_CORNERS[lf]]][:, list(axes)]
    a = pts.mean(axis=0)
    b = 0.25 * (-pts[0] + pts[1] + pts[2] - pts[3])
    c = 0.25 * (-pts[0] - pts[1] + pts[2] + pts[3])
    d = 0.25 * (pts[0] - pts[1] + pts[2] - pts[3])
    if np.max(np.abs(d)) > tol:
        raise GeometryError(f"face ({elem}, {lf}) is not an axis-aligned rectangle")
    return a, np.column_stack([b, c])


def _outward_normal(mesh: HexMesh, elem: int, lf: int) -> np.ndarray:
    center = np.zeros(3)
    center[FACE_AXIS[lf]] = FACE_SIGN[lf]
    jac, _ = jacobians(mesh, elem, 0.999 * center[None, :])
    n = np.linalg.solve(jac[0].T, np.eye(3)[FACE_AXIS[lf]]) * FACE_SIGN[lf]
    return n / np.linalg.norm(n)


def build_interface_pairs(
    mesh: HexMesh, face_sets: FaceSets, quad_order: int
) -> dict[tuple[int, int], list[FacePair]]:
    """Gauss-Legendre quadrature on every interface intersection rectangle.

    quad_order is the number of points per direction; the same physical
    points are expressed in the reference frames of both adjacent
    elements, so two-sided integrands can be sampled consistently.
    """
    if quad_order < 1:
        raise GeometryError(f"interface quadrature order must be >= 1, got {quad_order}")
    g, gw = np.polynomial.legendre.leggauss(quad_order)
    tol = mesh.geom_tol
    out: dict[tuple[int, int], list[FacePair]] = {}
    for pair_key, overlaps in face_sets.interface_faces.items():
        pairs = []
        for elem_a, lf_a, elem_b, lf_b, rect in overlaps:
            (axis, coord), (u0, u1), (v0, v1) = rect
            t1, t2 = [d for d in range(3) if d != axis]
            uu = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * g
            vv = 0.5 * (v0 + v1) + 0.5 * (v1 - v0) * g
            w2 = np.outer(gw, gw).ravel() * 0.25 * (u1 - u0) * (v1 - v0)
            U, V = np.meshgrid(uu, vv, indexing="ij")
            plane_pts = np.column_stack([U.ravel(), V.ravel()])

            refs = []
            for elem, lf in ((elem_a, lf_a), (elem_b, lf_b)):
                a2, m2 = _face_affine_2d(mesh, elem, lf, (t1, t2), tol)
                st = np.linalg.solve(m2, (plane_pts - a2).T).T
                ref = np.empty((plane_pts.shape[0], 3))
                ax = FACE_AXIS[lf]
                d1, d2 = [d for d in range(3) if d != ax]
                ref[:, ax] = FACE_SIGN[lf]
                ref[:, d1] = st[:, 0]
                ref[:, d2] = st[:, 1]
                refs.append(ref)

            pairs.append(
                FacePair(
                    elem_a=elem_a,
                    face_a=lf_a,
                    elem_b=elem_b,
                    face_b=lf_b,
                    ref_a=refs[0],
                    ref_b=refs[1],
                    weights=w2,
                    normal_a=_outward_normal(mesh, elem_a, lf_a),
                    area=(u1 - u0) * (v1 - v0),
                )
            )
        pairs.sort(key=lambda p: (p.elem_a, p.face_a, p.elem_b, p.face_b))
        out[pair_key] = pairs
    return out
