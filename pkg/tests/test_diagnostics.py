"""Norm, energy, receiver, and rate-fit checks against hand values."""

from types import SimpleNamespace

import numpy as np
import pytest
import scipy.sparse as sp

from elastowave.analytic import VerificationSolution
from elastowave.diagnostics import (
    acoustic_error_norms,
    coupled_error,
    elastic_error_norms,
    fit_convergence_rate,
    make_receivers,
    split_energies,
    total_discrete_energy,
)
from elastowave.errors import ElastowaveError
from elastowave.mesh import build_box_mesh, classify_faces
from elastowave.spaces import (
    AcousticMaterial,
    ElasticMaterial,
    build_acoustic_space,
    build_elastic_space,
)

from tests.test_assembly import MAT_A, MAT_E, coupled_setup, two_box_mesh


def acoustic_unit_space(n=(3, 3, 3), degree=4):
    mesh = build_box_mesh([(0, 1), (0, 1), (0, 1)], n, 2, "acoustic", "DIR")
    space = build_acoustic_space(mesh, degree)
    return space, {2: AcousticMaterial(rho=1.0, c=1.0)}


def test_acoustic_energy_norm_of_exact_rate_field():
    # at t = 0 only the rate term survives: rho/c^2 * w^2 * int sin^2 = 8 pi^2
    space, mats = acoustic_unit_space()
    sol = VerificationSolution()
    zero = np.zeros(space.n_dofs)
    energy_sq, l2_sq = acoustic_error_norms(space, mats, zero, zero, sol, t=0.0)
    assert abs(energy_sq - 8 * np.pi**2) < 1e-4 * 8 * np.pi**2
    assert l2_sq < 1e-12


def test_elastic_energy_norm_of_linear_field():
    mesh = build_box_mesh([(0, 1), (0, 1), (0, 1)], (2, 2, 2), 1, "elastic", "DIR")
    space = build_elastic_space(mesh, 2)
    mats = {1: MAT_E}
    u = np.zeros(space.n_dofs)
    u[0::3] = space.node_coords[:, 0]
    v = np.zeros(space.n_dofs)
    v[1::3] = 0.5
    energy_sq, l2_sq = elastic_error_norms(space, mats, u, v)
    want = (MAT_E.lam + 2 * MAT_E.mu) + MAT_E.rho * 0.25
    assert abs(energy_sq - want) < 1e-10 * want
    # int of x^2 over the unit cube
    assert abs(l2_sq - 1.0 / 3.0) < 1e-12


def test_interpolated_exact_solution_has_small_error():
    mesh, ops = coupled_setup(n_e=(3, 3, 3), n_a=(3, 3, 3), deg_e=4, deg_a=4)
    sol = VerificationSolution()
    t = 0.15
    state = SimpleNamespace(
        t=t,
        u=sol.displacement(ops.espace.node_coords, t).reshape(-1),
        v=sol.velocity(ops.espace.node_coords, t).reshape(-1),
        phi=sol.potential(ops.aspace.node_coords, t),
        psi=sol.potential_rate(ops.aspace.node_coords, t),
    )
    mats = {1: MAT_E, 2: MAT_A}
    err = coupled_error(ops, state, sol, mats)
    zero_state = SimpleNamespace(
        t=t,
        u=np.zeros(ops.espace.n_dofs),
        v=np.zeros(ops.espace.n_dofs),
        phi=np.zeros(ops.aspace.n_dofs),
        psi=np.zeros(ops.aspace.n_dofs),
    )
    scale = coupled_error(ops, zero_state, sol, mats)
    assert set(err) == {"energy", "l2", "energy_elastic", "energy_acoustic"}
    assert err["energy"] < 2e-2 * scale["energy"]
    assert err["l2"] < 2e-2 * scale["l2"]
    assert err["energy"] >= np.hypot(err["energy_elastic"], err["energy_acoustic"]) * 0.999


def toy_ops():
    return SimpleNamespace(
        m_e=np.array([1.0]),
        m_a=np.array([2.0]),
        k_e=sp.csr_matrix(np.array([[2.0]])),
        k_a=sp.csr_matrix(np.array([[8.0]])),
    )


def test_discrete_energy_hand_value():
    state = SimpleNamespace(
        u=np.array([2.0]), v=np.array([1.0]), phi=np.array([0.5]), psi=np.array([3.0])
    )
    solid, fluid = split_energies(toy_ops(), state)
    # 0.5 (1 * 1 + 2 * 2 * 2) and 0.5 (2 * 9 + 8 * 0.25)
    assert abs(solid - 4.5) < 1e-14
    assert abs(fluid - 10.0) < 1e-14
    assert abs(total_discrete_energy(toy_ops(), state) - 14.5) < 1e-14


def test_rate_fit_recovers_exact_slopes():
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    rate, r2 = fit_convergence_rate(hs, 3.0 * hs**2, kind="h")
    assert abs(rate - 2.0) < 1e-12 and abs(r2 - 1.0) < 1e-12
    ns = np.array([2, 3, 4, 5])
    rate, r2 = fit_convergence_rate(ns, 7.0 * 10.0 ** (-ns.astype(float)), kind="N")
    assert abs(rate - np.log(10.0)) < 1e-12 and abs(r2 - 1.0) < 1e-12


def test_rate_fit_flags_bad_input():
    with pytest.raises(ElastowaveError):
        fit_convergence_rate([0.1], [0.5])
    with pytest.raises(ElastowaveError):
        fit_convergence_rate([0.1, 0.05], [1e-3, 0.0])


def test_rate_fit_r2_drops_for_noisy_data():
    hs = np.array([0.4, 0.2, 0.1, 0.05])
    errs = hs**2 * np.array([1.0, 5.0, 0.3, 2.0])
    _, r2 = fit_convergence_rate(hs, errs)
    assert r2 < 0.95


def test_receivers_sample_linear_fields_exactly():
    mesh, ops = coupled_setup()
    pts = np.array([[-0.37, 0.41, 0.73], [0.55, 0.21, 0.12]])
    recs = make_receivers(mesh, ops.espace, ops.aspace, pts)
    assert [r.kind for r in recs] == ["elastic", "acoustic"]
    assert recs[0].columns == ["ux", "uy", "uz"]
    assert recs[1].columns == ["phi"]

    xe = ops.espace.node_coords
    u = np.stack([xe[:, 0] + xe[:, 1], 2 * xe[:, 2], 0 * xe[:, 0]], axis=1).reshape(-1)
    xa = ops.aspace.node_coords
    phi = 3 * xa[:, 0] - xa[:, 1]
    state = SimpleNamespace(u=u, phi=phi)
    got_u = recs[0].sample(state)
    want_u = np.array([-0.37 + 0.41, 2 * 0.73, 0.0])
    assert np.allclose(got_u, want_u, atol=1e-13)
    got_phi = recs[1].sample(state)
    assert np.allclose(got_phi, [3 * 0.55 - 0.21], atol=1e-13)
