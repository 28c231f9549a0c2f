"""Closed-form field checks.

The PDE residual and transmission tests use 4th-order finite-difference
stencils as the oracle, so they do not reuse the module's own gradient
formulas.  Reference constants for the interface wave are frozen from an
independent solve of the 3x3 transmission system.
"""

import numpy as np
import pytest

from elastowave.analytic import ScholteWave, VerificationSolution, ricker

# frozen root of the fluid-solid transmission system for
# lam = mu = rho_e = 1, c = rho_a = 1 (so cP = sqrt(3), cS = 1)
SCHOLTE_SPEED = 0.7110017230197
SCHOLTE_B1 = 0.3594499773037
SCHOLTE_B2 = 0.8194642725978
SCHOLTE_K = 1.4064663525  # omega / speed at omega = 1

H_X = 1e-3
H_T = 2e-4


def fd1(g, s, h):
    return (-g(s + 2 * h) + 8 * g(s + h) - 8 * g(s - h) + g(s - 2 * h)) / (12 * h)


def fd2(g, s, h):
    return (
        -g(s + 2 * h) + 16 * g(s + h) - 30 * g(s) + 16 * g(s - h) - g(s - 2 * h)
    ) / (12 * h * h)


def fd_gradient(f, x, h=H_X):
    out = np.zeros(3)
    for d in range(3):
        def along(s, d=d):
            p = np.array(x, dtype=float)
            p[d] = s
            return f(p)
        out[d] = fd1(along, x[d], h)
    return out


def fd_hessian(f, x, h=H_X):
    hess = np.zeros((3, 3))
    for a in range(3):
        def along(s, a=a):
            p = np.array(x, dtype=float)
            p[a] = s
            return f(p)
        hess[a, a] = fd2(along, x[a], h)
    for a in range(3):
        for b in range(a):
            def outer(s, a=a, b=b):
                p = np.array(x, dtype=float)
                p[a] = s
                def inner(r, p=p, b=b):
                    q = p.copy()
                    q[b] = r
                    return f(q)
                return fd1(inner, p[b], h)
            hess[a, b] = hess[b, a] = fd1(outer, x[a], h)
    return hess


def elastic_residual(u_func, x, t, rho, lam, mu):
    """rho u_tt - (lam + mu) grad(div u) - mu lap(u), all by stencils."""
    utt = fd2(lambda s: u_func(x, s), t, H_T)
    hess = [fd_hessian(lambda p, c=c: u_func(p, t)[c], x) for c in range(3)]
    res = np.zeros(3)
    for a in range(3):
        grad_div = sum(hess[b][a, b] for b in range(3))
        res[a] = rho * utt[a] - (lam + mu) * grad_div - mu * np.trace(hess[a])
    return res


def acoustic_residual(phi_func, x, t, c):
    ptt = fd2(lambda s: phi_func(x, s), t, H_T)
    lap = np.trace(fd_hessian(lambda p: phi_func(p, t), x))
    return ptt / c**2 - lap


# -- verification solution


def test_verification_fields_solve_both_wave_equations_unforced():
    sol = VerificationSolution()
    rho, mu = 2.7, 2.7 * 3.12**2
    lam = 2.7 * 6.2**2 - 2 * mu
    rng = np.random.default_rng(3)
    for _ in range(8):
        xe = rng.uniform([-0.9, 0.1, 0.1], [-0.1, 0.9, 0.9])
        xa = rng.uniform([0.1, 0.1, 0.1], [0.9, 0.9, 0.9])
        t = rng.uniform(0.05, 0.6)
        res_e = elastic_residual(
            lambda p, s: sol.displacement(p, s), xe, t, rho, lam, mu
        )
        scale_e = rho * sol.omega**2 * np.abs(sol.displacement(xe, t)).max() + 1.0
        assert np.abs(res_e).max() <= 5e-6 * scale_e
        res_a = acoustic_residual(lambda p, s: sol.potential(p, s), xa, t, sol.c)
        scale_a = sol.omega**2 + 1.0
        assert abs(res_a) <= 5e-6 * scale_a


def test_verification_gradients_match_stencils():
    sol = VerificationSolution()
    rng = np.random.default_rng(4)
    for _ in range(6):
        x = rng.uniform(-0.9, 0.9, size=3)
        t = rng.uniform(0.0, 1.0)
        grad = sol.displacement_gradient(x, t)
        for c in range(3):
            fd = fd_gradient(lambda p, c=c: sol.displacement(p, t)[c], x)
            assert np.allclose(grad[c], fd, rtol=0, atol=1e-7 * sol.omega**2)
        fd_phi = fd_gradient(lambda p: sol.potential(p, t), x)
        assert np.allclose(sol.potential_gradient(x, t), fd_phi, atol=1e-7 * sol.omega**2)


def test_verification_rates_match_time_stencils():
    sol = VerificationSolution()
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.5, 0.5, size=(4, 3))
    for t in (0.13, 0.41):
        v_fd = fd1(lambda s: sol.displacement(x, s), t, H_T)
        a_fd = fd1(lambda s: sol.velocity(x, s), t, H_T)
        assert np.allclose(sol.velocity(x, t), v_fd, atol=1e-6 * sol.omega**2)
        assert np.allclose(sol.acceleration(x, t), a_fd, atol=1e-5 * sol.omega**3)
        p_fd = fd1(lambda s: sol.potential(x, s), t, H_T)
        pa_fd = fd1(lambda s: sol.potential_rate(x, s), t, H_T)
        assert np.allclose(sol.potential_rate(x, t), p_fd, atol=1e-6 * sol.omega**2)
        assert np.allclose(sol.potential_accel(x, t), pa_fd, atol=1e-5 * sol.omega**3)


def test_verification_interface_conditions_at_x_zero():
    sol = VerificationSolution()
    rho_a = 1.0
    mu = 2.7 * 3.12**2
    lam = 2.7 * 6.2**2 - 2 * mu
    rng = np.random.default_rng(6)
    pts = np.column_stack(
        [np.zeros(5), rng.uniform(0, 1, size=5), rng.uniform(0, 1, size=5)]
    )
    n_e = np.array([1.0, 0.0, 0.0])
    for t in (0.07, 0.33, 0.8):
        grad = sol.displacement_gradient(pts, t)
        eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        sig = 2 * mu * eps
        tr = np.trace(eps, axis1=-2, axis2=-1)
        sig[..., 0, 0] += lam * tr
        sig[..., 1, 1] += lam * tr
        sig[..., 2, 2] += lam * tr
        traction = sig @ n_e
        pressure_side = -rho_a * sol.potential_rate(pts, t)[:, None] * n_e
        assert np.allclose(traction, pressure_side, atol=1e-10 * sol.omega**2)
        # normal-velocity continuity, n_a = -n_e
        dphi_dn = -sol.potential_gradient(pts, t)[:, 0]
        u_dot_na = -sol.velocity(pts, t)[:, 0]
        assert np.allclose(dphi_dn, -u_dot_na, atol=1e-10 * sol.omega**2)


# -- interface wave


def test_scholte_constants_match_reference_values():
    wave = ScholteWave()
    assert abs(wave.c_sch - SCHOLTE_SPEED) < 1e-9
    assert abs(wave.k - SCHOLTE_K) < 1e-9
    assert abs(wave.b1 - SCHOLTE_B1) < 1e-9
    assert abs(wave.b2 - SCHOLTE_B2) < 1e-9
    assert wave.b3 == 1.0
    assert abs(wave.dispersion(wave.c_sch)) < 1e-10
    amps = np.array([wave.b1, wave.b2, wave.b3])
    assert np.abs(wave.transmission_matrix(wave.c_sch) @ amps).max() < 1e-10


def test_scholte_speed_below_both_bulk_speeds():
    wave = ScholteWave()
    assert 0 < wave.c_sch < min(wave.c, wave.cs)
    for b in (wave.b1p, wave.b2p, wave.b2s):
        assert 0 < b < 1


def test_scholte_fields_solve_both_wave_equations():
    wave = ScholteWave()
    rng = np.random.default_rng(7)
    for _ in range(6):
        xe = rng.uniform([-1.5, -1.0, -3.0], [1.5, 1.0, -0.4])
        xa = rng.uniform([-1.5, -1.0, 0.4], [1.5, 1.0, 3.0])
        t = rng.uniform(0.0, 4.0)
        res_e = elastic_residual(
            lambda p, s: wave.displacement(p, s), xe, t, wave.rho_e, wave.lam, wave.mu
        )
        scale = wave.rho_e * wave.omega**2 * np.abs(wave.displacement(xe, t)).max() + 0.1
        assert np.abs(res_e).max() <= 1e-6 * scale
        res_a = acoustic_residual(lambda p, s: wave.potential(p, s), xa, t, wave.c)
        assert abs(res_a) <= 1e-6


def test_scholte_gradients_and_rates_match_stencils():
    wave = ScholteWave()
    rng = np.random.default_rng(8)
    xe = rng.uniform([-1.0, 0.0, -2.0], [1.0, 0.0, -0.3])
    xa = rng.uniform([-1.0, 0.0, 0.3], [1.0, 0.0, 2.0])
    t = 1.7
    grad = wave.displacement_gradient(xe, t)
    for c in range(3):
        fd = fd_gradient(lambda p, c=c: wave.displacement(p, t)[c], xe)
        assert np.allclose(grad[c], fd, atol=1e-9)
    fd_phi = fd_gradient(lambda p: wave.potential(p, t), xa)
    assert np.allclose(wave.potential_gradient(xa, t), fd_phi, atol=1e-9)
    assert np.allclose(
        wave.velocity(xe, t), fd1(lambda s: wave.displacement(xe, s), t, H_T), atol=1e-9
    )
    assert np.allclose(
        wave.acceleration(xe, t), fd1(lambda s: wave.velocity(xe, s), t, H_T), atol=1e-9
    )
    assert np.allclose(
        wave.potential_rate(xa, t), fd1(lambda s: wave.potential(xa, s), t, H_T), atol=1e-9
    )
    assert np.allclose(
        wave.potential_accel(xa, t),
        fd1(lambda s: wave.potential_rate(xa, s), t, H_T),
        atol=1e-9,
    )


@pytest.mark.parametrize(
    "params",
    [
        dict(),
        dict(lam=2.0, mu=1.0, rho_e=2.0, c=1.2, rho_a=0.8),
    ],
)
def test_scholte_transmission_conditions_at_z_zero(params):
    wave = ScholteWave(**params)
    rng = np.random.default_rng(9)
    pts = np.column_stack(
        [rng.uniform(-2, 2, size=6), rng.uniform(-1, 1, size=6), np.zeros(6)]
    )
    for t in (0.0, 0.6, 2.9):
        grad = wave.displacement_gradient(pts, t)
        eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        tr = np.trace(eps, axis1=-2, axis2=-1)
        sig = 2 * wave.mu * eps
        for d in range(3):
            sig[..., d, d] += wave.lam * tr
        traction = sig @ np.array([0.0, 0.0, 1.0])
        want = -wave.rho_a * wave.potential_rate(pts, t)[:, None] * np.array(
            [0.0, 0.0, 1.0]
        )
        assert np.allclose(traction, want, atol=1e-11)
        dphi_dn = -wave.potential_gradient(pts, t)[:, 2]
        u_dot_na = -wave.velocity(pts, t)[:, 2]
        assert np.allclose(dphi_dn, -u_dot_na, atol=1e-11)


def test_scholte_fields_decay_away_from_interface():
    wave = ScholteWave()
    x_near = np.array([0.3, 0.0, -0.5])
    x_far = np.array([0.3, 0.0, -12.0])
    assert np.abs(wave.displacement(x_far, 0.4)).max() < 1e-2 * np.abs(
        wave.displacement(x_near, 0.4)
    ).max()
    assert abs(wave.potential(np.array([0.3, 0.0, 12.0]), 0.4)) < 1e-2 * abs(
        wave.potential(np.array([0.3, 0.0, 0.5]), 0.4)
    )


def test_scholte_speed_is_material_property_not_frequency():
    base = ScholteWave(omega=1.0)
    fast = ScholteWave(omega=2.5)
    assert abs(base.c_sch - fast.c_sch) < 1e-13
    assert abs(fast.k - 2.5 / fast.c_sch) < 1e-13


# -- source wavelet


def test_ricker_peak_and_zeros():
    f0, fp, t0 = 1e10, 22.0, 0.25
    assert ricker(t0, fp, t0, f0) == f0
    zero_off = 1.0 / (np.sqrt(2.0) * np.pi * fp)
    assert abs(zero_off - 0.0102309) < 5e-8
    assert abs(ricker(t0 + zero_off, fp, t0, f0)) < 1e-6 * f0
    assert abs(ricker(t0 - zero_off, fp, t0, f0)) < 1e-6 * f0
    t = np.linspace(0.0, 0.5, 201)
    vals = ricker(t, fp, t0, f0)
    assert np.allclose(vals, vals[::-1], rtol=1e-10, atol=0)
    assert abs(ricker(t0 + 5.0 / fp, fp, t0, f0)) < 1e-8 * f0
