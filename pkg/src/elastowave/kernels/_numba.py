"""Numba versions of the element kernels.

Element loops are embarrassingly parallel: every iteration writes only
its own (E, ...) slice, so results are bit-identical for any thread
count.  Keep the arithmetic in the same order as `_numpy` where it
matters for the final few ulp (summation over quadrature is per point
here, so small differences against the vectorized path are expected and
covered by tolerances, not bit equality).
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def elastic_stiffness_apply(u, d1, jinv, detj, w, lam, mu):
    ne, nl, _ = u.shape
    nn = d1.shape[0]
    per_point = jinv.shape[1] > 1
    out = np.empty_like(u)
    for e in prange(ne):
        du = np.empty((nl, 3, 3))
        tref = np.empty((nl, 3, 3))
        # reference gradients, one tensor direction at a time
        for k in range(nn):
            for j in range(nn):
                row = (k * nn + j) * nn
                for i in range(nn):
                    for c in range(3):
                        s = 0.0
                        for m in range(nn):
                            s += d1[i, m] * u[e, row + m, c]
                        du[row + i, c, 0] = s
        for k in range(nn):
            for i in range(nn):
                for j in range(nn):
                    for c in range(3):
                        s = 0.0
                        for m in range(nn):
                            s += d1[j, m] * u[e, (k * nn + m) * nn + i, c]
                        du[(k * nn + j) * nn + i, c, 1] = s
        for j in range(nn):
            for i in range(nn):
                for k in range(nn):
                    for c in range(3):
                        s = 0.0
                        for m in range(nn):
                            s += d1[k, m] * u[e, (m * nn + j) * nn + i, c]
                        du[(k * nn + j) * nn + i, c, 2] = s
        # pointwise constitutive update and pullback
        for q in range(nl):
            qj = q if per_point else 0
            scale = w[q] * detj[e, qj]
            g00 = du[q, 0, 0] * jinv[e, qj, 0, 0] + du[q, 0, 1] * jinv[e, qj, 1, 0] + du[q, 0, 2] * jinv[e, qj, 2, 0]
            g01 = du[q, 0, 0] * jinv[e, qj, 0, 1] + du[q, 0, 1] * jinv[e, qj, 1, 1] + du[q, 0, 2] * jinv[e, qj, 2, 1]
            g02 = du[q, 0, 0] * jinv[e, qj, 0, 2] + du[q, 0, 1] * jinv[e, qj, 1, 2] + du[q, 0, 2] * jinv[e, qj, 2, 2]
            g10 = du[q, 1, 0] * jinv[e, qj, 0, 0] + du[q, 1, 1] * jinv[e, qj, 1, 0] + du[q, 1, 2] * jinv[e, qj, 2, 0]
            g11 = du[q, 1, 0] * jinv[e, qj, 0, 1] + du[q, 1, 1] * jinv[e, qj, 1, 1] + du[q, 1, 2] * jinv[e, qj, 2, 1]
            g12 = du[q, 1, 0] * jinv[e, qj, 0, 2] + du[q, 1, 1] * jinv[e, qj, 1, 2] + du[q, 1, 2] * jinv[e, qj, 2, 2]
            g20 = du[q, 2, 0] * jinv[e, qj, 0, 0] + du[q, 2, 1] * jinv[e, qj, 1, 0] + du[q, 2, 2] * jinv[e, qj, 2, 0]
            g21 = du[q, 2, 0] * jinv[e, qj, 0, 1] + du[q, 2, 1] * jinv[e, qj, 1, 1] + du[q, 2, 2] * jinv[e, qj, 2, 1]
            g22 = du[q, 2, 0] * jinv[e, qj, 0, 2] + du[q, 2, 1] * jinv[e, qj, 1, 2] + du[q, 2, 2] * jinv[e, qj, 2, 2]
            div = g00 + g11 + g22
            s00 = (lam[e] * div + 2.0 * mu[e] * g00) * scale
            s11 = (lam[e] * div + 2.0 * mu[e] * g11) * scale
            s22 = (lam[e] * div + 2.0 * mu[e] * g22) * scale
            s01 = mu[e] * (g01 + g10) * scale
            s02 = mu[e] * (g02 + g20) * scale
            s12 = mu[e] * (g12 + g21) * scale
            for r in range(3):
                j0 = jinv[e, qj, r, 0]
                j1 = jinv[e, qj, r, 1]
                j2 = jinv[e, qj, r, 2]
                tref[q, 0, r] = s00 * j0 + s01 * j1 + s02 * j2
                tref[q, 1, r] = s01 * j0 + s11 * j1 + s12 * j2
                tref[q, 2, r] = s02 * j0 + s12 * j1 + s22 * j2
        # adjoint gradient
        for k in range(nn):
            for j in range(nn):
                row = (k * nn + j) * nn
                for i in range(nn):
                    for c in range(3):
                        s = 0.0
                        for m in range(nn):
                            s += d1[m, i] * tref[row + m, c, 0]
                        for m in range(nn):
                            s += d1[m, j] * tref[(k * nn + m) * nn + i, c, 1]
                        for m in range(nn):
                            s += d1[m, k] * tref[(m * nn + j) * nn + i, c, 2]
                        out[e, row + i, c] = s
    return out


@njit(parallel=True, cache=True)
def acoustic_stiffness_apply(p, d1, jinv, detj, w, rho):
    ne, nl = p.shape
    nn = d1.shape[0]
    per_point = jinv.shape[1] > 1
    out = np.empty_like(p)
    for e in prange(ne):
        du = np.empty((nl, 3))
        tref = np.empty((nl, 3))
        for k in range(nn):
            for j in range(nn):
                row = (k * nn + j) * nn
                for i in range(nn):
                    s = 0.0
                    for m in range(nn):
                        s += d1[i, m] * p[e, row + m]
                    du[row + i, 0] = s
        for k in range(nn):
            for i in range(nn):
                for j in range(nn):
                    s = 0.0
                    for m in range(nn):
                        s += d1[j, m] * p[e, (k * nn + m) * nn + i]
                    du[(k * nn + j) * nn + i, 1] = s
        for j in range(nn):
            for i in range(nn):
                for k in range(nn):
                    s = 0.0
                    for m in range(nn):
                        s += d1[k, m] * p[e, (m * nn + j) * nn + i]
                    du[(k * nn + j) * nn + i, 2] = s
        for q in range(nl):
            qj = q if per_point else 0
            scale = rho[e] * w[q] * detj[e, qj]
            g0 = du[q, 0] * jinv[e, qj, 0, 0] + du[q, 1] * jinv[e, qj, 1, 0] + du[q, 2] * jinv[e, qj, 2, 0]
            g1 = du[q, 0] * jinv[e, qj, 0, 1] + du[q, 1] * jinv[e, qj, 1, 1] + du[q, 2] * jinv[e, qj, 2, 1]
            g2 = du[q, 0] * jinv[e, qj, 0, 2] + du[q, 1] * jinv[e, qj, 1, 2] + du[q, 2] * jinv[e, qj, 2, 2]
            for r in range(3):
                tref[q, r] = scale * (
                    g0 * jinv[e, qj, r, 0] + g1 * jinv[e, qj, r, 1] + g2 * jinv[e, qj, r, 2]
                )
        for k in range(nn):
            for j in range(nn):
                row = (k * nn + j) * nn
                for i in range(nn):
                    s = 0.0
                    for m in range(nn):
                        s += d1[m, i] * tref[row + m, 0]
                    for m in range(nn):
                        s += d1[m, j] * tref[(k * nn + m) * nn + i, 1]
                    for m in range(nn):
                        s += d1[m, k] * tref[(m * nn + j) * nn + i, 2]
                    out[e, row + i] = s
    return out
