"""Vectorized numpy reference kernels.

These are the semantics-defining implementations: the numba versions in
`_numba` must agree with them to rounding error.  Layout conventions:

- nodal values are flat over the tensor grid, x index fastest
- `jinv` and `detj` have a second axis of length 1 (affine elements,
  constant Jacobian) or (N+1)^3 (general trilinear elements)
"""

import numpy as np


def _ref_gradients(u4, d1):
    """Reference-coordinate gradients of tensor nodal data.

    u4 has shape (E, nn, nn, nn, C) with axes (elem, k, j, i, comp);
    returns (E, nn, nn, nn, C, 3).
    """
    gx = np.einsum("qi,ekjic->ekjqc", d1, u4)
    gy = np.einsum("qj,ekjic->ekqic", d1, u4)
    gz = np.einsum("qk,ekjic->eqjic", d1, u4)
    return np.stack([gx, gy, gz], axis=-1)


def _ref_gradients_adjoint(t5, d1):
    """Adjoint of `_ref_gradients`: t5 is (E, nn, nn, nn, C, 3)."""
    ax = np.einsum("qi,ekjqc->ekjic", d1, t5[..., 0])
    ay = np.einsum("qj,ekqic->ekjic", d1, t5[..., 1])
    az = np.einsum("qk,eqjic->ekjic", d1, t5[..., 2])
    return ax + ay + az


def elastic_stiffness_apply(u, d1, jinv, detj, w, lam, mu):
    """Volume stiffness action for displacement fields.

    u: (E, nl, 3) -> out (E, nl, 3) with
    out[e, i, a] = sum_q w_q detJ sigma(u_h)[a, d] d(phi_i)/dx_d.
    """
    ne, nl, _ = u.shape
    nn = d1.shape[0]
    jj = np.broadcast_to(jinv, (ne, nl, 3, 3))
    dd = np.broadcast_to(detj, (ne, nl))
    du = _ref_gradients(u.reshape(ne, nn, nn, nn, 3), d1).reshape(ne, nl, 3, 3)
    grad = np.einsum("eqcr,eqrd->eqcd", du, jj)
    eps = 0.5 * (grad + grad.transpose(0, 1, 3, 2))
    tr = np.trace(eps, axis1=2, axis2=3)
    sig = 2.0 * mu[:, None, None, None] * eps
    sig[:, :, [0, 1, 2], [0, 1, 2]] += (lam[:, None] * tr)[:, :, None]
    sig *= (w[None, :] * dd)[:, :, None, None]
    tref = np.einsum("eqad,eqrd->eqar", sig, jj)
    out = _ref_gradients_adjoint(tref.reshape(ne, nn, nn, nn, 3, 3), d1)
    return out.reshape(ne, nl, 3)


def acoustic_stiffness_apply(p, d1, jinv, detj, w, rho):
    """Volume stiffness action for the scalar potential: (rho grad, grad)."""
    ne, nl = p.shape
    nn = d1.shape[0]
    jj = np.broadcast_to(jinv, (ne, nl, 3, 3))
    dd = np.broadcast_to(detj, (ne, nl))
    du = _ref_gradients(p.reshape(ne, nn, nn, nn, 1), d1).reshape(ne, nl, 1, 3)
    grad = np.einsum("eqcr,eqrd->eqcd", du, jj)[:, :, 0, :]
    flux = grad * (rho[:, None] * w[None, :] * dd)[:, :, None]
    tref = np.einsum("eqd,eqrd->eqr", flux, jj)
    out = _ref_gradients_adjoint(tref.reshape(ne, nn, nn, nn, 1, 3), d1)
    return out.reshape(ne, nl)
