"""Explicit predictor-corrector Newmark integration of the coupled system.

One step advances the elastic field first, using the acoustic velocity
predictor in the interface term, then advances the acoustic field with
the freshly corrected elastic velocity.  With diagonal mass matrices
both solves are trivially explicit.  Dirichlet data is imposed strongly:
boundary dofs are overwritten with the prescribed values after each
predictor and corrector.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ElastowaveError


@dataclass
class SimState:
    """Coupled field state: displacement u, velocity v, potential phi
    and its rate psi, plus both accelerations."""

    t: float
    u: np.ndarray
    v: np.ndarray
    ae: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    aa: np.ndarray

    def copy(self) -> "SimState":
        return SimState(
            self.t, self.u.copy(), self.v.copy(), self.ae.copy(),
            self.phi.copy(), self.psi.copy(), self.aa.copy(),
        )


def _predict(u, v, a, dt):
    """Newmark predictors for a displacement-like/velocity-like pair."""
    return u + dt * v + (0.5 * dt * dt) * a, v + (0.5 * dt) * a


def _zero_bc(ndofs):
    z = np.zeros(ndofs)
    return lambda t: (z, z, z)


class NewmarkIntegrator:
    """Drives one coupled system at a fixed step size.

    f_e/f_a: load vectors as functions of time (None for unforced).
    bc_e/bc_a: Dirichlet data over the spaces' constrained dofs as
    functions of time returning (value, rate, acceleration) arrays;
    None means homogeneous.
    """

    def __init__(
        self,
        ops,
        dt: float,
        f_e=None,
        f_a=None,
        bc_e=None,
        bc_a=None,
        amplitude_limit: float = 1e12,
    ):
        if dt <= 0:
            raise ElastowaveError(f"step size must be positive, got {dt}")
        self.ops = ops
        self.dt = float(dt)
        m_e = np.asarray(ops.m_e, dtype=float)
        m_a = np.asarray(ops.m_a, dtype=float)
        if m_e.min() <= 0 or m_a.min() <= 0:
            raise ElastowaveError("mass matrix has a non-positive diagonal entry")
        self.inv_m_e = 1.0 / m_e
        self.inv_m_a = 1.0 / m_a
        self.coupling_t = ops.coupling.T.tocsr()
        self.e_dir = (
            ops.espace.dirichlet_dofs() if ops.espace is not None else np.empty(0, int)
        )
        self.a_dir = (
            ops.aspace.dirichlet_dofs() if ops.aspace is not None else np.empty(0, int)
        )
        self.f_e = f_e
        self.f_a = f_a
        self.bc_e = bc_e if bc_e is not None else _zero_bc(self.e_dir.size)
        self.bc_a = bc_a if bc_a is not None else _zero_bc(self.a_dir.size)
        self.amplitude_limit = amplitude_limit

    # -- state construction

    def initial_state(self, u, v, phi, psi, t0: float = 0.0) -> SimState:
        """Consistent accelerations from the semi-discrete equations."""
        s = SimState(
            t=t0,
            u=np.array(u, dtype=float),
            v=np.array(v, dtype=float),
            ae=np.zeros_like(self.inv_m_e),
            phi=np.array(phi, dtype=float),
            psi=np.array(psi, dtype=float),
            aa=np.zeros_like(self.inv_m_a),
        )
        if self.e_dir.size:
            ud, vd, ad = self.bc_e(t0)
            s.u[self.e_dir] = ud
            s.v[self.e_dir] = vd
        if self.a_dir.size:
            pd, sd, _ = self.bc_a(t0)
            s.phi[self.a_dir] = pd
            s.psi[self.a_dir] = sd
        r_e = -(self.ops.k_e @ s.u) - self.ops.coupling @ s.psi
        if self.f_e is not None:
            r_e += self.f_e(t0)
        if self.ops.s_e is not None:
            r_e -= self.ops.s_e @ s.v
        s.ae = self.inv_m_e * r_e
        r_a = -(self.ops.k_a @ s.phi) + self.coupling_t @ s.v
        if self.f_a is not None:
            r_a += self.f_a(t0)
        if self.ops.s_a is not None:
            r_a -= self.ops.s_a @ s.psi
        s.aa = self.inv_m_a * r_a
        if self.e_dir.size:
            s.ae[self.e_dir] = self.bc_e(t0)[2]
        if self.a_dir.size:
            s.aa[self.a_dir] = self.bc_a(t0)[2]
        return s

    def zero_state(self, t0: float = 0.0) -> SimState:
        n_e, n_a = self.inv_m_e.size, self.inv_m_a.size
        return self.initial_state(
            np.zeros(n_e), np.zeros(n_e), np.zeros(n_a), np.zeros(n_a), t0
        )

    # -- stepping

    def step(self, s: SimState) -> SimState:
        dt = self.dt
        t1 = s.t + dt
        u_p, v_p = _predict(s.u, s.v, s.ae, dt)
        phi_p, psi_p = _predict(s.phi, s.psi, s.aa, dt)
        if self.e_dir.size:
            e_val, e_rate, e_acc = self.bc_e(t1)
            u_p[self.e_dir] = e_val
            v_p[self.e_dir] = e_rate
        if self.a_dir.size:
            a_val, a_rate, a_acc = self.bc_a(t1)
            phi_p[self.a_dir] = a_val
            psi_p[self.a_dir] = a_rate

        # elastic corrector, acoustic quantities at predictor stage
        r_e = -(self.ops.k_e @ u_p) - self.ops.coupling @ psi_p
        if self.f_e is not None:
            r_e += self.f_e(t1)
        if self.ops.s_e is not None:
            r_e -= self.ops.s_e @ v_p
        ae1 = self.inv_m_e * r_e
        v1 = v_p + (0.5 * dt) * ae1
        if self.e_dir.size:
            v1[self.e_dir] = e_rate
            ae1[self.e_dir] = e_acc

        # acoustic corrector, driven by the corrected elastic velocity
        r_a = -(self.ops.k_a @ phi_p) + self.coupling_t @ v1
        if self.f_a is not None:
            r_a += self.f_a(t1)
        if self.ops.s_a is not None:
            r_a -= self.ops.s_a @ psi_p
        aa1 = self.inv_m_a * r_a
        psi1 = psi_p + (0.5 * dt) * aa1
        if self.a_dir.size:
            psi1[self.a_dir] = a_rate
            aa1[self.a_dir] = a_acc

        peak = max(
            np.abs(u_p).max(initial=0.0), np.abs(phi_p).max(initial=0.0)
        )
        if not np.isfinite(peak) or peak > self.amplitude_limit:
            raise DivergenceError(
                f"solution reached magnitude {peak:.3e} at t = {t1:.6g}; "
                "the time step is likely above the stability limit"
            )
        s.t, s.u, s.v, s.ae, s.phi, s.psi, s.aa = t1, u_p, v1, ae1, phi_p, psi1, aa1
        return s


def estimate_stable_dt(ops, safety: float = 0.5, maxit: int = 500, tol: float = 1e-4, seed: int = 0) -> float:
    """Step size from the largest generalized eigenvalue of the
    stiffness blocks, via power iteration: dt = safety * 2 / sqrt(lam).

    The coupling block is included symmetrically, which is a bound proxy
    for the staggered scheme; `safety` absorbs the slack.
    """
    m_e = np.asarray(ops.m_e, dtype=float)
    m_a = np.asarray(ops.m_a, dtype=float)
    ne = m_e.size
    m = np.concatenate([m_e, m_a])
    ct = ops.coupling.T.tocsr()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(ne + m_a.size)
    z /= np.linalg.norm(z)
    lam = 0.0
    for _ in range(maxit):
        w = np.concatenate(
            [
                (ops.k_e @ z[:ne] + ops.coupling @ z[ne:]) / m_e,
                (ct @ z[:ne] + ops.k_a @ z[ne:]) / m_a,
            ]
        )
        lam_new = float(z @ (m * w)) / float(z @ (m * z))
        nw = np.linalg.norm(w)
        if nw == 0:
            raise ElastowaveError("stiffness appears to be identically zero")
        z = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    else:
        warnings.warn(
            f"power iteration did not converge in {maxit} iterations; "
            "the step estimate may be loose",
            stacklevel=2,
        )
    if lam <= 0:
        raise ElastowaveError(f"nonpositive stiffness eigenvalue estimate {lam}")
    return safety * 2.0 / np.sqrt(lam)
