"""Gauss-Lobatto-Legendre quadrature and nodal Lagrange bases on [-1, 1].

The 1D rule is the backbone of every discrete operator in the package:
co-locating quadrature nodes with the Lagrange interpolation nodes makes
all mass matrices diagonal, and tensorization of the 1D rule gives the
hexahedral shape functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureRule1D",
    "gll_rule",
    "diff_matrix",
    "lagrange_eval",
    "lagrange_basis_at",
    "lagrange_deriv_at",
    "tensor_eval",
    "tensor_grid",
    "tensor_weights",
]

_NEWTON_TOL = 1e-14
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes and weights of the (N+1)-point Gauss-Lobatto-Legendre rule."""

    degree: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.degree + 1


def _legendre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (P_{n-1}, P_n) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = np.asarray(x, dtype=float).copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p_prev, p


def gll_rule(degree: int) -> QuadratureRule1D:
    """Build the GLL rule of polynomial degree `degree` (N+1 nodes).

    Interior nodes are the roots of P_N', found by Newton iteration from
    Chebyshev-Gauss-Lobatto initial guesses.  The identity
    (1-x^2) P_N'(x) = N (P_{N-1} - x P_N) keeps the residual well defined
    at the endpoints, where the update vanishes identically.
    """
    if degree < 1:
        raise ValueError(f"GLL rule needs degree >= 1, got {degree}")
    n = degree
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    for _ in range(_NEWTON_MAXIT):
        p_prev, p = _legendre_pair(n, x)
        dx = (p_prev - x * p) / ((n + 1) * p)
        x = x + dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"GLL Newton iteration stalled for degree {degree}")
    # force exact symmetry; the endpoints are +-1 by construction
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    _, p = _legendre_pair(n, x)
    w = 2.0 / (n * (n + 1) * p**2)
    return QuadratureRule1D(degree=degree, nodes=x, weights=w)


def _bary_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def diff_matrix(rule: QuadratureRule1D) -> np.ndarray:
    """Nodal differentiation matrix: D[i, j] = l_j'(x_i).

    Diagonal entries come from the zero row-sum property rather than a
    separate formula, which keeps D exact on constants.
    """
    x = rule.nodes
    bw = _bary_weights(x)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d = (bw[None, :] / bw[:, None]) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def lagrange_basis_at(rule: QuadratureRule1D, x) -> np.ndarray:
    """Values of all basis polynomials at `x`: shape (len(x), N+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = rule.nodes
    nn = rule.n_nodes
    out = np.ones((x.size, nn))
    for i in range(nn):
        for j in range(nn):
            if j != i:
                out[:, i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
    return out


def lagrange_deriv_at(rule: QuadratureRule1D, x) -> np.ndarray:
    """Derivatives of all basis polynomials at `x`: shape (len(x), N+1).

    Uses the sum-of-products form, which stays finite when `x` hits a node.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = rule.nodes
    nn = rule.n_nodes
    out = np.zeros((x.size, nn))
    for i in range(nn):
        for m in range(nn):
            if m == i:
                continue
            term = np.full(x.size, 1.0 / (nodes[i] - nodes[m]))
            for j in range(nn):
                if j != i and j != m:
                    term *= (x - nodes[j]) / (nodes[i] - nodes[j])
            out[:, i] += term
    return out


def lagrange_eval(rule: QuadratureRule1D, i: int, x):
    """Value of the i-th nodal basis polynomial at `x` (scalar or array)."""
    if not 0 <= i < rule.n_nodes:
        raise IndexError(f"basis index {i} out of range for degree {rule.degree}")
    vals = lagrange_basis_at(rule, x)[:, i]
    return vals[0] if np.isscalar(x) else vals.reshape(np.shape(x))


def tensor_grid(rule: QuadratureRule1D) -> np.ndarray:
    """Reference coordinates of the tensorized node set, shape ((N+1)^3, 3).

    Flat node n = i + (N+1)*(j + (N+1)*k): the x index runs fastest.  Every
    array in the package that is indexed by "local node" uses this order.
    """
    nn = rule.n_nodes
    i, j, k = np.meshgrid(rule.nodes, rule.nodes, rule.nodes, indexing="ij")
    pts = np.stack([i, j, k], axis=-1)  # [ix, iy, iz] grid
    return pts.transpose(2, 1, 0, 3).reshape(nn**3, 3)


def tensor_weights(rule: QuadratureRule1D) -> np.ndarray:
    """Tensorized quadrature weights matching `tensor_grid` ordering."""
    w = rule.weights
    return (w[None, None, :] * w[None, :, None] * w[:, None, None]).reshape(-1)


def tensor_eval(rule: QuadratureRule1D, index: tuple[int, int, int], point):
    """Value and gradient of a tensorized basis function at a reference point.

    `index` holds the per-axis 1D node indices; `point` is (xi, eta, zeta)
    in the reference cube [-1, 1]^3.
    """
    pt = np.asarray(point, dtype=float)
    vals = [lagrange_basis_at(rule, pt[d])[0, index[d]] for d in range(3)]
    ders = [lagrange_deriv_at(rule, pt[d])[0, index[d]] for d in range(3)]
    value = vals[0] * vals[1] * vals[2]
    grad = np.array(
        [
            ders[0] * vals[1] * vals[2],
            vals[0] * ders[1] * vals[2],
            vals[0] * vals[1] * ders[2],
        ]
    )
    return value, grad
