"""Error norms, energy accounting, receiver sampling, and rate fits."""

from dataclasses import dataclass

import numpy as np

from .assembly import basis_at_points
from .basis import gll_rule, tensor_grid, tensor_weights
from .errors import ElastowaveError
from .mesh import find_containing_element, jacobians, map_points


def _block_sampling(space, blk, extra):
    """Quadrature points plus basis tables for one region block."""
    qrule = gll_rule(blk.degree + extra)
    ref = tensor_grid(qrule)
    wq = tensor_weights(qrule)
    vals, dref = basis_at_points(blk.rule, ref)
    return ref, wq, vals, dref


def elastic_error_norms(space, materials, u, v, exact=None, t=0.0, extra=2):
    """Squared energy and L2 errors of the solid pair (u, v).

    Energy density rho |v - v_x|^2 + sigma(e) : eps(e) with e = u - u_x,
    integrated `extra` degrees above the field degree.  With exact=None
    the norms of the discrete fields themselves come back.
    """
    mesh = space.mesh
    energy_sq = 0.0
    l2_sq = 0.0
    for blk in space.blocks:
        mat = materials[blk.region]
        ref, wq, vals, dref = _block_sampling(space, blk, extra)
        dofs = space.element_dofs(blk).reshape(len(blk.elements), -1, 3)
        uh = np.einsum("ql,elc->eqc", vals, u[dofs])
        vh = np.einsum("ql,elc->eqc", vals, v[dofs])
        duh = np.einsum("qld,elc->eqcd", dref, u[dofs])
        for i, e in enumerate(blk.elements):
            jac, detj = jacobians(mesh, int(e), ref)
            grad = np.einsum("qcd,qdr->qcr", duh[i], np.linalg.inv(jac))
            v_err = vh[i]
            u_err = uh[i]
            if exact is not None:
                xq = map_points(mesh, int(e), ref)
                grad = grad - exact.displacement_gradient(xq, t)
                v_err = v_err - exact.velocity(xq, t)
                u_err = u_err - exact.displacement(xq, t)
            eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
            tr = np.trace(eps, axis1=-2, axis2=-1)
            strain_energy = 2.0 * mat.mu * np.einsum("qcd,qcd->q", eps, eps)
            strain_energy += mat.lam * tr**2
            kinetic = mat.rho * np.einsum("qc,qc->q", v_err, v_err)
            wdet = wq * detj
            energy_sq += float(wdet @ (kinetic + strain_energy))
            l2_sq += float(wdet @ np.einsum("qc,qc->q", u_err, u_err))
    return energy_sq, l2_sq


def acoustic_error_norms(space, materials, phi, psi, exact=None, t=0.0, extra=2):
    """Squared energy and L2 errors of the fluid pair (phi, psi).

    Energy density (rho / c^2) |psi - psi_x|^2 + rho |grad e|^2.
    """
    mesh = space.mesh
    energy_sq = 0.0
    l2_sq = 0.0
    for blk in space.blocks:
        mat = materials[blk.region]
        ref, wq, vals, dref = _block_sampling(space, blk, extra)
        dofs = space.element_dofs(blk)
        ph = np.einsum("ql,el->eq", vals, phi[dofs])
        psh = np.einsum("ql,el->eq", vals, psi[dofs])
        dph = np.einsum("qld,el->eqd", dref, phi[dofs])
        for i, e in enumerate(blk.elements):
            jac, detj = jacobians(mesh, int(e), ref)
            grad = np.einsum("qd,qdr->qr", dph[i], np.linalg.inv(jac))
            rate_err = psh[i]
            p_err = ph[i]
            if exact is not None:
                xq = map_points(mesh, int(e), ref)
                grad = grad - exact.potential_gradient(xq, t)
                rate_err = rate_err - exact.potential_rate(xq, t)
                p_err = p_err - exact.potential(xq, t)
            dens = (mat.rho / mat.c**2) * rate_err**2
            dens += mat.rho * np.einsum("qd,qd->q", grad, grad)
            wdet = wq * detj
            energy_sq += float(wdet @ dens)
            l2_sq += float(wdet @ p_err**2)
    return energy_sq, l2_sq


def coupled_error(ops, state, exact, materials, extra=2):
    """Energy and L2 error of a run against a closed-form solution."""
    e_sq, l2_e = elastic_error_norms(
        ops.espace, materials, state.u, state.v, exact, state.t, extra
    )
    a_sq, l2_a = acoustic_error_norms(
        ops.aspace, materials, state.phi, state.psi, exact, state.t, extra
    )
    return {
        "energy": float(np.sqrt(e_sq + a_sq)),
        "l2": float(np.sqrt(l2_e + l2_a)),
        "energy_elastic": float(np.sqrt(e_sq)),
        "energy_acoustic": float(np.sqrt(a_sq)),
    }


def split_energies(ops, state) -> tuple[float, float]:
    """Discrete (solid, fluid) energies 0.5 (v' M v + u' K u) per side."""
    solid = 0.5 * (state.v @ (ops.m_e * state.v) + state.u @ (ops.k_e @ state.u))
    fluid = 0.5 * (state.psi @ (ops.m_a * state.psi) + state.phi @ (ops.k_a @ state.phi))
    return float(solid), float(fluid)


def total_discrete_energy(ops, state) -> float:
    solid, fluid = split_energies(ops, state)
    return solid + fluid


def fit_convergence_rate(xs, errors, kind: str = "h") -> tuple[float, float]:
    """Least-squares decay rate and R^2 of an error sequence.

    kind="h": slope of log err vs log h (algebraic order, positive for
    first-order-or-better convergence since h decreases).
    kind="N": minus the slope of log err vs N (exponential decay rate).
    """
    xs = np.asarray(xs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if xs.size != errors.size or xs.size < 2:
        raise ElastowaveError("rate fit needs at least two (x, error) samples")
    if np.any(errors <= 0):
        raise ElastowaveError("rate fit needs positive errors")
    t = np.log(xs) if kind == "h" else xs
    y = np.log(errors)
    coef = np.polyfit(t, y, 1)
    resid = y - np.polyval(coef, t)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    rate = float(coef[0]) if kind == "h" else -float(coef[0])
    return rate, float(r2)


@dataclass
class Receiver:
    """Point probe: solid points record displacement, fluid points the
    velocity potential."""

    point: np.ndarray
    kind: str
    dofs: np.ndarray
    weights: np.ndarray  # basis values at the point, one per local node

    def sample(self, state) -> np.ndarray:
        if self.kind == "elastic":
            return self.weights @ state.u[self.dofs]
        return np.atleast_1d(self.weights @ state.phi[self.dofs])

    @property
    def columns(self) -> list[str]:
        if self.kind == "elastic":
            return ["ux", "uy", "uz"]
        return ["phi"]


def make_receivers(mesh, espace, aspace, points) -> list[Receiver]:
    out = []
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return out
    for pt in np.atleast_2d(pts):
        elem, ref = find_containing_element(mesh, pt)
        kind = mesh.region_kind[int(mesh.element_region[elem])]
        space = espace if kind == "elastic" else aspace
        blk, pos = space.block_for_element(elem)
        vals, _ = basis_at_points(blk.rule, ref[None, :])
        nodes = blk.element_nodes[pos]
        if space.ncomp == 1:
            dofs = nodes
        else:
            dofs = nodes[:, None] * 3 + np.arange(3)
        out.append(Receiver(pt, kind, dofs, vals[0]))
    return out
