"""Global operators: mass, stiffness, interface coupling, boundary terms.

Mass matrices are diagonal (GLL co-location).  Stiffness is applied
matrix-free through the element kernels; `tocsr` materializes the same
operator for small problems and debugging.  Interface terms (interior
penalty faces, elasto-acoustic coupling) and absorbing boundaries are
genuinely sparse and kept as CSR matrices.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .basis import (
    diff_matrix,
    lagrange_basis_at,
    lagrange_deriv_at,
    tensor_grid,
    tensor_weights,
)
from .errors import GeometryError
from .mesh import FACE_AXIS, FACE_SIGN, HexMesh, hex_shape_grad, jacobians
from .spaces import DofSpace, RegionBlock, _face_local_nodes


def basis_at_points(rule, pts):
    """All tensorized basis values and reference gradients at `pts`.

    Returns (vals, dref) with shapes (npts, (N+1)^3) and
    (npts, (N+1)^3, 3), flat node index ordered x fastest.
    """
    pts = np.atleast_2d(pts)
    nq = pts.shape[0]
    nl = rule.n_nodes**3
    vx, vy, vz = (lagrange_basis_at(rule, pts[:, d]) for d in range(3))
    dx, dy, dz = (lagrange_deriv_at(rule, pts[:, d]) for d in range(3))
    vals = np.einsum("qi,qj,qk->qkji", vx, vy, vz).reshape(nq, nl)
    gx = np.einsum("qi,qj,qk->qkji", dx, vy, vz).reshape(nq, nl)
    gy = np.einsum("qi,qj,qk->qkji", vx, dy, vz).reshape(nq, nl)
    gz = np.einsum("qi,qj,qk->qkji", vx, vy, dz).reshape(nq, nl)
    return vals, np.stack([gx, gy, gz], axis=-1)


def block_geometry(mesh: HexMesh, blk: RegionBlock):
    """(jinv, detj) at the GLL nodes of every element of a block.

    Affine elements are detected and stored with a length-1 point axis,
    which the kernels broadcast.
    """
    pts = tensor_grid(blk.rule)
    dshape = hex_shape_grad(pts)
    verts = mesh.vertices[mesh.elements[blk.elements]]
    jac = np.einsum("lvd,evc->elcd", dshape, verts)
    scale = np.abs(jac).max()
    if np.abs(jac - jac[:, :1]).max() <= 1e-12 * scale:
        jac = np.ascontiguousarray(jac[:, :1])
    detj = np.linalg.det(jac)
    if detj.min() <= 0:
        raise GeometryError(
            f"non-positive Jacobian in region {blk.region} at a quadrature node"
        )
    return np.ascontiguousarray(np.linalg.inv(jac)), detj


def _mass_coefficient(space: DofSpace, materials: dict, region: int) -> float:
    mat = materials[region]
    if space.kind == "elastic":
        return mat.rho
    return mat.rho / mat.c**2


def assemble_mass(space: DofSpace, materials: dict) -> np.ndarray:
    """Diagonal of the mass matrix as a dof vector."""
    node_diag = np.zeros(space.n_nodes)
    for blk in space.blocks:
        _, detj = block_geometry(space.mesh, blk)
        w = tensor_weights(blk.rule)
        coef = _mass_coefficient(space, materials, blk.region)
        vals = coef * w[None, :] * np.broadcast_to(detj, (blk.elements.size, w.size))
        node_diag += np.bincount(
            blk.element_nodes.ravel(), weights=vals.ravel(), minlength=space.n_nodes
        )
    if space.ncomp == 1:
        return node_diag
    return np.repeat(node_diag, space.ncomp)


def assemble_load_weights(space: DofSpace) -> np.ndarray:
    """Per-dof quadrature weights w*detJ (no material factor).

    With GLL co-location a body force enters the residual as
    f(x_node) * weight, so this vector is all the load assembly needs.
    """
    node_diag = np.zeros(space.n_nodes)
    for blk in space.blocks:
        _, detj = block_geometry(space.mesh, blk)
        w = tensor_weights(blk.rule)
        vals = w[None, :] * np.broadcast_to(detj, (blk.elements.size, w.size))
        node_diag += np.bincount(
            blk.element_nodes.ravel(), weights=vals.ravel(), minlength=space.n_nodes
        )
    if space.ncomp == 1:
        return node_diag
    return np.repeat(node_diag, space.ncomp)


@dataclass
class _BlockData:
    d1: np.ndarray
    w: np.ndarray
    jinv: np.ndarray
    detj: np.ndarray
    dofs: np.ndarray  # (E, nl) node ids or (E, nl, 3) dof ids
    coef_a: np.ndarray  # lam (elastic) or rho (acoustic), per element
    coef_b: np.ndarray | None  # mu (elastic)


class StiffnessOperator(spla.LinearOperator):
    """Symmetric volume stiffness, applied element by element.

    `face_matrix` (optional CSR) carries interior-penalty face terms and
    is added to every apply, so the operator is the complete spatial
    stiffness of its field.
    """

    def __init__(self, space: DofSpace, materials: dict, face_matrix=None):
        super().__init__(dtype=float, shape=(space.n_dofs, space.n_dofs))
        self.space = space
        self.face_matrix = face_matrix
        self._blocks = []
        for blk in space.blocks:
            jinv, detj = block_geometry(space.mesh, blk)
            mat = materials[blk.region]
            ne = blk.elements.size
            if space.kind == "elastic":
                dofs = blk.element_nodes[..., None] * 3 + np.arange(3)
                coef_a = np.full(ne, mat.lam)
                coef_b = np.full(ne, mat.mu)
            else:
                dofs = blk.element_nodes
                coef_a = np.full(ne, mat.rho)
                coef_b = None
            self._blocks.append(
                _BlockData(
                    d1=diff_matrix(blk.rule),
                    w=tensor_weights(blk.rule),
                    jinv=jinv,
                    detj=detj,
                    dofs=dofs,
                    coef_a=coef_a,
                    coef_b=coef_b,
                )
            )

    def _apply_volume(self, x: np.ndarray, out: np.ndarray) -> None:
        n = self.shape[0]
        for bd in self._blocks:
            u = x[bd.dofs]
            if bd.coef_b is not None:
                ku = kernels.elastic_stiffness_apply(
                    u, bd.d1, bd.jinv, bd.detj, bd.w, bd.coef_a, bd.coef_b
                )
            else:
                ku = kernels.acoustic_stiffness_apply(
                    u, bd.d1, bd.jinv, bd.detj, bd.w, bd.coef_a
                )
            out += np.bincount(bd.dofs.ravel(), weights=ku.ravel(), minlength=n)

    def _matvec(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        out = np.zeros_like(x)
        self._apply_volume(x, out)
        if self.face_matrix is not None:
            out += self.face_matrix @ x
        return out

    def _rmatvec(self, x):
        return self._matvec(x)

    def tocsr(self) -> sp.csr_matrix:
        """Materialize the operator; meant for small problems and tests."""
        n = self.shape[0]
        rows, cols, vals = [], [], []
        for bd in self._blocks:
            edofs = bd.dofs.reshape(bd.dofs.shape[0], -1)
            nloc = edofs.shape[1]
            for j in range(nloc):
                u = np.zeros_like(bd.dofs, dtype=float)
                u.reshape(u.shape[0], -1)[:, j] = 1.0
                if bd.coef_b is not None:
                    ku = kernels.elastic_stiffness_apply(
                        u, bd.d1, bd.jinv, bd.detj, bd.w, bd.coef_a, bd.coef_b
                    )
                else:
                    ku = kernels.acoustic_stiffness_apply(
                        u, bd.d1, bd.jinv, bd.detj, bd.w, bd.coef_a
                    )
                rows.append(edofs.ravel())
                cols.append(np.repeat(edofs[:, j], nloc))
                vals.append(ku.reshape(ku.shape[0], -1).ravel())
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        ).tocsr()
        if self.face_matrix is not None:
            mat = (mat + self.face_matrix).tocsr()
        return mat


# ---------------------------------------------------------------------------
# face terms


def _side_trace(space: DofSpace, mesh: HexMesh, elem: int, ref: np.ndarray):
    """Basis values, physical gradients and dof rows of one face side."""
    blk, pos = space.block_for_element(elem)
    vals, dref = basis_at_points(blk.rule, ref)
    jac, _ = jacobians(mesh, elem, ref)
    grad = np.einsum("qlr,qrd->qld", dref, np.linalg.inv(jac))
    nodes = blk.element_nodes[pos]
    return blk, vals, grad, nodes


def _hmean(x: float, y: float) -> float:
    return 2.0 * x * y / (x + y)


def assemble_sipg_faces(
    space: DofSpace, materials: dict, mesh: HexMesh, pairs: dict
):
    """Interior-penalty terms on elastic-elastic interfaces.

    Returns (core, penalty_unit): `core` holds the consistency term and
    its symmetrizing transpose, `penalty_unit` the stabilization at unit
    penalty parameter, so the full face matrix is core + alpha * penalty_unit.
    The penalty already carries the material and N^2/h scalings (harmonic
    averages across the face).
    """
    kinds = mesh.region_kind
    n = space.n_dofs
    rows, cols, core_vals, pen_vals = [], [], [], []
    eye3 = np.eye(3)
    for (ra, rb), plist in sorted(pairs.items()):
        if kinds[ra] != "elastic" or kinds[rb] != "elastic":
            continue
        mats = materials[ra], materials[rb]
        for pair in plist:
            signs, vals, trac, dofs = [], [], [], []
            geo = []
            for sign, elem, ref, mat in (
                (+1.0, pair.elem_a, pair.ref_a, mats[0]),
                (-1.0, pair.elem_b, pair.ref_b, mats[1]),
            ):
                blk, v, grad, nodes = _side_trace(space, mesh, elem, ref)
                gn = grad @ pair.normal_a
                # traction of basis (l, c): sigma(phi_l e_c) . n
                trac.append(
                    mat.lam * np.einsum("qlc,a->qlca", grad, pair.normal_a)
                    + mat.mu * np.einsum("ql,ca->qlca", gn, eye3)
                    + mat.mu * np.einsum("qla,c->qlca", grad, pair.normal_a)
                )
                signs.append(sign)
                vals.append(v)
                dofs.append((nodes[:, None] * 3 + np.arange(3)).ravel())
                geo.append(blk.degree**2 / mesh.element_size(elem))
            fac = _hmean(
                mats[0].lam + 2 * mats[0].mu, mats[1].lam + 2 * mats[1].mu
            ) * _hmean(geo[0], geo[1])
            w = pair.weights
            cons = {
                (r, c): -0.5
                * signs[r]
                * np.einsum("q,ql,qmdc->lcmd", w, vals[r], trac[c])
                for r in range(2)
                for c in range(2)
            }
            for r in range(2):
                for c in range(2):
                    block = cons[r, c] + cons[c, r].transpose(2, 3, 0, 1)
                    base = np.einsum("q,ql,qm->lm", w, vals[r], vals[c])
                    pen = (signs[r] * signs[c] * fac) * np.einsum(
                        "lm,cd->lcmd", base, eye3
                    )
                    nl_r, nl_c = vals[r].shape[1], vals[c].shape[1]
                    rows.append(np.repeat(dofs[r], nl_c * 3))
                    cols.append(np.tile(dofs[c], nl_r * 3))
                    core_vals.append(block.reshape(-1))
                    pen_vals.append(pen.reshape(-1))
    if not rows:
        return None, None
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    core = sp.coo_matrix((np.concatenate(core_vals), (rows, cols)), shape=(n, n)).tocsr()
    pen = sp.coo_matrix((np.concatenate(pen_vals), (rows, cols)), shape=(n, n)).tocsr()
    core.eliminate_zeros()
    pen.eliminate_zeros()
    return core, pen


def assemble_coupling(
    espace: DofSpace, aspace: DofSpace, mesh: HexMesh, pairs: dict, materials: dict
) -> sp.csr_matrix:
    """Interface coupling matrix C (elastic rows, acoustic columns).

    C[(i, a), j] = int_Gamma rho_f phi_i n_a psi_j over elasto-acoustic
    interfaces, n the elastic outward normal.  The acoustic side receives
    exactly -C^T, which keeps the semi-discrete energy balance exact.
    """
    kinds = mesh.region_kind
    rows, cols, vals = [], [], []
    for (ra, rb), plist in sorted(pairs.items()):
        pair_kinds = (kinds[ra], kinds[rb])
        if set(pair_kinds) != {"elastic", "acoustic"}:
            continue
        fluid_region = ra if pair_kinds[0] == "acoustic" else rb
        rho_f = materials[fluid_region].rho
        for pair in plist:
            if pair_kinds[0] == "elastic":
                e_elem, e_ref, n_e = pair.elem_a, pair.ref_a, pair.normal_a
                a_elem, a_ref = pair.elem_b, pair.ref_b
            else:
                e_elem, e_ref, n_e = pair.elem_b, pair.ref_b, -pair.normal_a
                a_elem, a_ref = pair.elem_a, pair.ref_a
            eblk, epos = espace.block_for_element(e_elem)
            ablk, apos = aspace.block_for_element(a_elem)
            vals_e, _ = basis_at_points(eblk.rule, e_ref)
            vals_a, _ = basis_at_points(ablk.rule, a_ref)
            block = rho_f * np.einsum(
                "q,ql,c,qm->lcm", pair.weights, vals_e, n_e, vals_a
            )
            edofs = (eblk.element_nodes[epos][:, None] * 3 + np.arange(3)).ravel()
            anodes = ablk.element_nodes[apos]
            rows.append(np.repeat(edofs, anodes.size))
            cols.append(np.tile(anodes, edofs.size))
            vals.append(block.reshape(-1))
    shape = (espace.n_dofs, aspace.n_dofs)
    if not rows:
        return sp.csr_matrix(shape)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=shape,
    ).tocsr()
    mat.eliminate_zeros()  # off-face basis values are exact zeros
    return mat


# orientation of e_t1 x e_t2 relative to e_axis when the two tangential
# axes are taken in increasing order
_AXIS_PARITY = np.array([1.0, -1.0, 1.0])


def _face_node_quadrature(mesh: HexMesh, blk: RegionBlock, elem: int, lf: int):
    """GLL face nodes with surface weights and outward normals.

    Returns (local node indices, w2d * surface jacobian, normals (nf, 3)).
    """
    idx = _face_local_nodes(blk.degree, lf)
    pts3 = tensor_grid(blk.rule)[idx]
    jac, _ = jacobians(mesh, elem, pts3)
    t_axes = [d for d in range(3) if d != FACE_AXIS[lf]]
    cross = np.cross(jac[:, :, t_axes[0]], jac[:, :, t_axes[1]])
    surf = np.linalg.norm(cross, axis=1)
    orient = FACE_SIGN[lf] * _AXIS_PARITY[FACE_AXIS[lf]]
    normals = orient * cross / surf[:, None]
    w1 = blk.rule.weights
    nn = blk.rule.n_nodes
    w2 = np.outer(w1, w1).ravel()
    if surf.size != nn * nn:
        raise GeometryError("face node count mismatch")
    return idx, w2 * surf, normals


def assemble_absorbing(space: DofSpace, materials: dict, faces: list) -> sp.csr_matrix:
    """First-order absorbing boundary matrix acting on the velocity.

    Elastic: rho (c_p n n^T + c_s (I - n n^T)) times the face mass;
    acoustic: rho / c times the face mass.  Faces outside this space's
    regions are ignored.
    """
    mesh = space.mesh
    n = space.n_dofs
    regions = {blk.region for blk in space.blocks}
    rows, cols, vals = [], [], []
    for elem, lf in faces:
        region = int(mesh.element_region[elem])
        if region not in regions:
            continue
        blk, pos = space.block_for_element(elem)
        idx, wsurf, normals = _face_node_quadrature(mesh, blk, elem, lf)
        nodes = blk.element_nodes[pos][idx]
        mat = materials[region]
        if space.kind == "elastic":
            nn_outer = np.einsum("fa,fb->fab", normals, normals)
            block = mat.rho * (
                mat.cp * nn_outer + mat.cs * (np.eye(3)[None] - nn_outer)
            )
            block *= wsurf[:, None, None]
            dofs = nodes[:, None] * 3 + np.arange(3)
            rows.append(np.repeat(dofs, 3, axis=1).ravel())
            cols.append(np.tile(dofs, (1, 3)).ravel())
            vals.append(block.reshape(-1))
        else:
            rows.append(nodes)
            cols.append(nodes)
            vals.append(mat.rho / mat.c * wsurf)
    if not rows:
        return sp.csr_matrix((n, n))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()


def point_source_vector(space: DofSpace, point, direction=None) -> np.ndarray:
    """Dof vector of a delta load at `point` (unit amplitude).

    For the elastic space `direction` gives the force direction; the
    acoustic space takes a scalar source and ignores it.
    """
    from .mesh import find_containing_element

    elem, ref = find_containing_element(space.mesh, point, kind=space.kind)
    blk, pos = space.block_for_element(elem)
    vals, _ = basis_at_points(blk.rule, ref[None, :])
    nodes = blk.element_nodes[pos]
    vec = np.zeros(space.n_dofs)
    if space.ncomp == 1:
        vec[nodes] = vals[0]
    else:
        d = np.asarray(direction, dtype=float)
        vec[(nodes[:, None] * 3 + np.arange(3)).ravel()] = np.outer(vals[0], d).ravel()
    return vec


# ---------------------------------------------------------------------------
# bundled system


@dataclass
class SystemOperators:
    """Everything the time integrator needs, assembled once."""

    espace: DofSpace
    aspace: DofSpace
    m_e: np.ndarray
    m_a: np.ndarray
    k_e: StiffnessOperator
    k_a: StiffnessOperator
    coupling: sp.csr_matrix
    s_e: sp.csr_matrix | None
    s_a: sp.csr_matrix | None
    load_w_e: np.ndarray
    load_w_a: np.ndarray
    alpha: float


def build_operators(
    mesh: HexMesh,
    espace: DofSpace,
    aspace: DofSpace,
    materials: dict,
    face_sets,
    pairs: dict,
    alpha: float = 1.0,
) -> SystemOperators:
    core, pen = assemble_sipg_faces(espace, materials, mesh, pairs)
    face_matrix = None if core is None else (core + alpha * pen).tocsr()
    k_e = StiffnessOperator(espace, materials, face_matrix=face_matrix)
    k_a = StiffnessOperator(aspace, materials)
    coupling = assemble_coupling(espace, aspace, mesh, pairs, materials)
    s_e = s_a = None
    if face_sets.absorbing:
        s_e = assemble_absorbing(espace, materials, face_sets.absorbing)
        s_a = assemble_absorbing(aspace, materials, face_sets.absorbing)
        if s_e.nnz == 0:
            s_e = None
        if s_a.nnz == 0:
            s_a = None
    return SystemOperators(
        espace=espace,
        aspace=aspace,
        m_e=assemble_mass(espace, materials),
        m_a=assemble_mass(aspace, materials),
        k_e=k_e,
        k_a=k_a,
        coupling=coupling,
        s_e=s_e,
        s_a=s_a,
        load_w_e=assemble_load_weights(espace),
        load_w_a=assemble_load_weights(aspace),
        alpha=alpha,
    )
