"""Materials and nodal spectral element spaces.

The elastic space is continuous inside each region and discontinuous
across region boundaries (the DG faces carry the coupling).  The
acoustic space is one globally continuous block.  Nodes are merged by
quantized physical coordinates, which is what permits regions to be
meshed independently.

DoF layout: region-major, nodes lexicographic by (x, y, z) inside each
region, components minor (dof = 3*node + comp for displacements).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import QuadratureRule1D, gll_rule
from .errors import ElastowaveError, GeometryError
from .mesh import FACE_AXIS, FACE_SIGN, HexMesh, element_nodes_physical

__all__ = [
    "ElasticMaterial",
    "AcousticMaterial",
    "RegionBlock",
    "DofSpace",
    "build_elastic_space",
    "build_acoustic_space",
    "check_materials",
]


@dataclass(frozen=True)
class ElasticMaterial:
    """Linear isotropic solid: density and Lame parameters."""

    rho: float
    lam: float
    mu: float

    def __post_init__(self):
        if self.rho <= 0 or self.mu <= 0 or self.lam + 2 * self.mu <= 0:
            raise ElastowaveError(
                f"elastic material needs rho > 0, mu > 0, lam + 2 mu > 0; "
                f"got rho={self.rho}, lam={self.lam}, mu={self.mu}"
            )

    @property
    def cp(self) -> float:
        return float(np.sqrt((self.lam + 2 * self.mu) / self.rho))

    @property
    def cs(self) -> float:
        return float(np.sqrt(self.mu / self.rho))

    @classmethod
    def from_speeds(cls, rho: float, cp: float, cs: float) -> "ElasticMaterial":
        if not 0 < cs < cp:
            raise ElastowaveError(f"need 0 < cs < cp, got cp={cp}, cs={cs}")
        mu = rho * cs**2
        lam = rho * cp**2 - 2 * mu
        return cls(rho=rho, lam=lam, mu=mu)


@dataclass(frozen=True)
class AcousticMaterial:
    """Inviscid fluid: density and sound speed."""

    rho: float
    c: float

    def __post_init__(self):
        if self.rho <= 0 or self.c <= 0:
            raise ElastowaveError(
                f"acoustic material needs rho > 0, c > 0; got rho={self.rho}, c={self.c}"
            )


def check_materials(mesh: HexMesh, materials: dict) -> None:
    """Every region must carry a material of the matching kind."""
    for rid, kind in mesh.region_kind.items():
        mat = materials.get(rid)
        if mat is None:
            raise ElastowaveError(f"region {rid} has no material")
        want = ElasticMaterial if kind == "elastic" else AcousticMaterial
        if not isinstance(mat, want):
            raise ElastowaveError(
                f"region {rid} is {kind} but got {type(mat).__name__}"
            )


@dataclass
class RegionBlock:
    """All elements of one region together with their node connectivity."""

    region: int
    degree: int
    rule: QuadratureRule1D
    elements: np.ndarray  # global element ids
    element_nodes: np.ndarray  # (nelem, (N+1)^3) space-wide node ids


@dataclass
class DofSpace:
    kind: str  # elastic | acoustic
    mesh: HexMesh
    blocks: list[RegionBlock]
    node_coords: np.ndarray
    dirichlet_nodes: np.ndarray
    ncomp: int

    @property
    def n_nodes(self) -> int:
        return self.node_coords.shape[0]

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.ncomp

    def block_for_element(self, elem: int) -> tuple[RegionBlock, int]:
        """(block, position of `elem` inside it)."""
        for blk in self.blocks:
            pos = np.searchsorted(blk.elements, elem)
            if pos < blk.elements.size and blk.elements[pos] == elem:
                return blk, int(pos)
        raise ElastowaveError(f"element {elem} is not part of this {self.kind} space")

    def element_dofs(self, blk: RegionBlock) -> np.ndarray:
        """(nelem, nloc*ncomp) global dof ids, component minor."""
        nodes = blk.element_nodes
        if self.ncomp == 1:
            return nodes
        out = (nodes[..., None] * self.ncomp + np.arange(self.ncomp)).reshape(
            nodes.shape[0], -1
        )
        return out

    def dirichlet_dofs(self) -> np.ndarray:
        if self.ncomp == 1:
            return self.dirichlet_nodes
        return (
            self.dirichlet_nodes[:, None] * self.ncomp + np.arange(self.ncomp)
        ).reshape(-1)


def _face_local_nodes(degree: int, lf: int) -> np.ndarray:
    """Local tensor-node indices lying on a local face."""
    nn = degree + 1
    idx = np.arange(nn**3)
    i = idx % nn
    j = (idx // nn) % nn
    k = idx // nn**2
    per_axis = (i, j, k)[FACE_AXIS[lf]]
    want = 0 if FACE_SIGN[lf] < 0 else degree
    return idx[per_axis == want]


def _build_space(
    mesh: HexMesh,
    kind: str,
    degrees: dict[int, int],
    dirichlet_faces,
    merge_regions: bool,
    ncomp: int,
) -> DofSpace:
    regions = mesh.regions_of_kind(kind)
    if not regions:
        raise GeometryError(f"mesh has no {kind} region")
    for rid in regions:
        if degrees.get(rid) is None or degrees[rid] < 1:
            raise ElastowaveError(f"region {rid} needs a polynomial degree >= 1")
    tol = max(mesh.geom_tol, 1e-14)

    blocks: list[RegionBlock] = []
    coords_list: list[np.ndarray] = []
    key_to_id: dict[tuple, int] = {}
    next_id = 0
    for rid in regions:
        if not merge_regions:
            key_to_id = {}
        rule = gll_rule(degrees[rid])
        elems = mesh.region_elements(rid)
        phys = element_nodes_physical(mesh, rule, elems)  # (E, nloc, 3)
        flat_keys = np.round(phys.reshape(-1, 3) / tol).astype(np.int64)
        flat_phys = phys.reshape(-1, 3)
        # np.unique sorts rows lexicographically, which fixes the node order
        uniq, first, inv = np.unique(
            flat_keys, axis=0, return_index=True, return_inverse=True
        )
        ids = np.empty(uniq.shape[0], dtype=np.int64)
        for u in range(uniq.shape[0]):
            key = tuple(uniq[u])
            known = key_to_id.get(key)
            if known is None:
                key_to_id[key] = next_id
                coords_list.append(flat_phys[first[u]])
                ids[u] = next_id
                next_id += 1
            else:
                ids[u] = known
        enodes = ids[inv.reshape(-1)].reshape(phys.shape[:2])
        blocks.append(
            RegionBlock(
                region=rid,
                degree=degrees[rid],
                rule=rule,
                elements=elems,
                element_nodes=enodes,
            )
        )

    node_coords = np.asarray(coords_list)
    dir_nodes: set[int] = set()
    by_elem = {}
    for blk in blocks:
        for pos, el in enumerate(blk.elements):
            by_elem[int(el)] = (blk, pos)
    for elem, lf in dirichlet_faces:
        hit = by_elem.get(int(elem))
        if hit is None:
            continue  # face belongs to the other space
        blk, pos = hit
        dir_nodes.update(
            int(n) for n in blk.element_nodes[pos, _face_local_nodes(blk.degree, lf)]
        )
    return DofSpace(
        kind=kind,
        mesh=mesh,
        blocks=blocks,
        node_coords=node_coords,
        dirichlet_nodes=np.asarray(sorted(dir_nodes), dtype=np.int64),
        ncomp=ncomp,
    )


def build_elastic_space(
    mesh: HexMesh, degrees: int | dict[int, int], dirichlet_faces=()
) -> DofSpace:
    """Vector displacement space: continuous per region, broken across
    regions."""
    regions = mesh.regions_of_kind("elastic")
    if isinstance(degrees, int):
        degrees = {rid: degrees for rid in regions}
    return _build_space(mesh, "elastic", degrees, dirichlet_faces, False, 3)


def build_acoustic_space(
    mesh: HexMesh, degree: int, dirichlet_faces=()
) -> DofSpace:
    """Scalar potential space, continuous over the whole acoustic domain."""
    regions = mesh.regions_of_kind("acoustic")
    degrees = {rid: degree for rid in regions}
    return _build_space(mesh, "acoustic", degrees, dirichlet_faces, True, 1)
