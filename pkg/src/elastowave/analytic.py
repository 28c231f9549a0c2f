"""Closed-form fields: a smooth coupled verification solution, Scholte
interface waves, and the Ricker source wavelet.

Conventions: the solid carries a displacement u, the fluid a velocity
potential phi with pressure rho_a * dphi/dt; transmission at an
interface reads sigma(u) n_e = -rho_a dphi/dt n_e and
dphi/dn_a = -du/dt . n_a.
"""

import numpy as np
from scipy.optimize import brentq

from .errors import ElastowaveError


def ricker(t, peak_frequency: float, delay: float, amplitude: float = 1.0):
    """Ricker wavelet a (1 - 2 q) exp(-q), q = (pi f_p (t - t0))^2."""
    q = (np.pi * peak_frequency * (np.asarray(t, dtype=float) - delay)) ** 2
    return amplitude * (1.0 - 2.0 * q) * np.exp(-q)


class VerificationSolution:
    """Unforced coupled solution on the solid half x < 0, fluid x > 0.

    u = (cos(w x / cP), cos(w x / cS), cos(w x / cS)) cos(w t) and
    phi = sin(w x / c) sin(w t) solve both wave equations with zero body
    load and meet the interface conditions at x = 0 exactly, so the only
    data a run needs is Dirichlet boundary values.
    """

    def __init__(self, cp: float = 6.2, cs: float = 3.12, c: float = 1.0,
                 omega: float = 4.0 * np.pi):
        self.cp = cp
        self.cs = cs
        self.c = c
        self.omega = omega

    # -- solid

    def _space_factors(self, x):
        w = self.omega
        xs = np.asarray(x, dtype=float)[..., 0]
        return np.stack(
            [np.cos(w * xs / self.cp), np.cos(w * xs / self.cs), np.cos(w * xs / self.cs)],
            axis=-1,
        )

    def displacement(self, x, t):
        return self._space_factors(x) * np.cos(self.omega * t)

    def velocity(self, x, t):
        return self._space_factors(x) * (-self.omega * np.sin(self.omega * t))

    def acceleration(self, x, t):
        return self._space_factors(x) * (-self.omega**2 * np.cos(self.omega * t))

    def displacement_gradient(self, x, t):
        """du_a/dx_d as (..., 3, 3); only the x-derivatives are nonzero."""
        w = self.omega
        xs = np.asarray(x, dtype=float)[..., 0]
        dx = np.stack(
            [
                -(w / self.cp) * np.sin(w * xs / self.cp),
                -(w / self.cs) * np.sin(w * xs / self.cs),
                -(w / self.cs) * np.sin(w * xs / self.cs),
            ],
            axis=-1,
        ) * np.cos(w * t)
        grad = np.zeros(dx.shape + (3,))
        grad[..., 0] = dx
        return grad

    # -- fluid

    def potential(self, x, t):
        xs = np.asarray(x, dtype=float)[..., 0]
        return np.sin(self.omega * xs / self.c) * np.sin(self.omega * t)

    def potential_rate(self, x, t):
        xs = np.asarray(x, dtype=float)[..., 0]
        return np.sin(self.omega * xs / self.c) * (self.omega * np.cos(self.omega * t))

    def potential_accel(self, x, t):
        return -self.omega**2 * self.potential(x, t)

    def potential_gradient(self, x, t):
        w = self.omega
        xs = np.asarray(x, dtype=float)[..., 0]
        grad = np.zeros(np.shape(xs) + (3,))
        grad[..., 0] = (w / self.c) * np.cos(w * xs / self.c) * np.sin(w * t)
        return grad


class ScholteWave:
    """Interface wave along z = 0: solid below, fluid above.

    The wave speed is the root of the 3x3 transmission determinant; the
    amplitudes span its kernel, normalized to B3 = 1.  Fields decay like
    exp(-k b |z|) away from the interface, so evaluating a side's
    expression outside its half-space grows exponentially: callers pick
    points per side.
    """

    def __init__(self, lam: float = 1.0, mu: float = 1.0, rho_e: float = 1.0,
                 c: float = 1.0, rho_a: float = 1.0, omega: float = 1.0):
        self.lam, self.mu, self.rho_e = lam, mu, rho_e
        self.c, self.rho_a, self.omega = c, rho_a, omega
        self.cp = np.sqrt((lam + 2 * mu) / rho_e)
        self.cs = np.sqrt(mu / rho_e)
        self.c_sch = self._solve_speed()
        self.k = omega / self.c_sch
        self.b1p, self.b2p, self.b2s = self._decay_rates(self.c_sch)
        # kernel of the transmission matrix with B3 = 1
        self.b3 = 1.0
        self.b2 = (1.0 + self.b2s**2) / (2.0 * self.b2p)
        self.b1 = (self.b3 - self.b2p * self.b2) / self.b1p

    def _decay_rates(self, speed):
        return (
            np.sqrt(1.0 - speed**2 / self.c**2),
            np.sqrt(1.0 - speed**2 / self.cp**2),
            np.sqrt(1.0 - speed**2 / self.cs**2),
        )

    def transmission_matrix(self, speed) -> np.ndarray:
        """Rows: zero shear traction, normal traction balance, normal
        velocity continuity, acting on (B1, B2, B3)."""
        b1p, b2p, b2s = self._decay_rates(speed)
        mu, c2 = self.mu, speed**2
        return np.array(
            [
                [0.0, 2.0 * b2p, -(1.0 + b2s**2)],
                [self.rho_a * c2, 2.0 * mu - self.rho_e * c2, -2.0 * mu * b2s],
                [b1p, b2p, -1.0],
            ]
        )

    def dispersion(self, speed) -> float:
        return float(np.linalg.det(self.transmission_matrix(speed)))

    def _solve_speed(self) -> float:
        c_max = min(self.c, self.cs)
        grid = np.linspace(0.01 * c_max, 0.999 * c_max, 200)
        vals = np.array([self.dispersion(s) for s in grid])
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        if sign_change.size == 0:
            raise ElastowaveError("no interface wave speed found below min(c, cS)")
        i = int(sign_change[0])
        return brentq(self.dispersion, grid[i], grid[i + 1], xtol=1e-14, rtol=8.9e-16)

    # -- solid side (z <= 0)

    def _solid_parts(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        e_p = np.exp(k * self.b2p * x[..., 2])
        e_s = np.exp(k * self.b2s * x[..., 2])
        amp1 = k * (self.b2 * e_p - self.b3 * self.b2s * e_s)
        amp3 = k * (self.b2 * self.b2p * e_p - self.b3 * e_s)
        return x, e_p, e_s, amp1, amp3

    def displacement(self, x, t):
        x, _, _, amp1, amp3 = self._solid_parts(x)
        th = self.k * x[..., 0] - self.omega * t
        out = np.zeros(x.shape)
        out[..., 0] = amp1 * np.cos(th)
        out[..., 2] = amp3 * np.sin(th)
        return out

    def velocity(self, x, t):
        x, _, _, amp1, amp3 = self._solid_parts(x)
        th = self.k * x[..., 0] - self.omega * t
        out = np.zeros(x.shape)
        out[..., 0] = self.omega * amp1 * np.sin(th)
        out[..., 2] = -self.omega * amp3 * np.cos(th)
        return out

    def acceleration(self, x, t):
        return -self.omega**2 * self.displacement(x, t)

    def displacement_gradient(self, x, t):
        x, e_p, e_s, amp1, amp3 = self._solid_parts(x)
        k, b2, b3, b2p, b2s = self.k, self.b2, self.b3, self.b2p, self.b2s
        th = k * x[..., 0] - self.omega * t
        sin, cos = np.sin(th), np.cos(th)
        grad = np.zeros(x.shape + (3,))
        grad[..., 0, 0] = -k * amp1 * sin
        grad[..., 0, 2] = k**2 * (b2 * b2p * e_p - b3 * b2s**2 * e_s) * cos
        grad[..., 2, 0] = k * amp3 * cos
        grad[..., 2, 2] = k**2 * (b2 * b2p**2 * e_p - b3 * b2s * e_s) * sin
        return grad

    # -- fluid side (z >= 0)

    def _fluid_parts(self, x):
        x = np.asarray(x, dtype=float)
        decay = np.exp(-self.k * self.b1p * x[..., 2])
        return x, decay

    def potential(self, x, t):
        x, decay = self._fluid_parts(x)
        th = self.k * x[..., 0] - self.omega * t
        return self.omega * self.b1 * decay * np.cos(th)

    def potential_rate(self, x, t):
        x, decay = self._fluid_parts(x)
        th = self.k * x[..., 0] - self.omega * t
        return self.omega**2 * self.b1 * decay * np.sin(th)

    def potential_accel(self, x, t):
        return -self.omega**2 * self.potential(x, t)

    def potential_gradient(self, x, t):
        x, decay = self._fluid_parts(x)
        th = self.k * x[..., 0] - self.omega * t
        w, k, b1, b1p = self.omega, self.k, self.b1, self.b1p
        grad = np.zeros(x.shape)
        grad[..., 0] = -w * k * b1 * decay * np.sin(th)
        grad[..., 2] = -w * k * b1p * b1 * decay * np.cos(th)
        return grad
