import numpy as np
import pytest

from jacscat.errors import PoleHit
from jacscat.gallery import random_window
from jacscat.jacobi import (JacobiOperator, WeylFunctions, dense_truncation,
                            has_off_interval_spectrum, interior_theta_nodes,
                            orthonormal_polys, resolvent_2x2,
                            spectral_density, szego_class_check,
                            trim_to_window, weyl_half_line)
from jacscat.harmonic import CircleGrid


def truncated_resolvent(J, zeta, half_size):
    z = zeta + 1.0 / zeta
    D = dense_truncation(J, half_size)
    n = D.shape[0]
    k = half_size
    rhs = np.zeros((n, 2), dtype=complex)
    rhs[k - 1, 0] = 1.0     # e_{-1}
    rhs[k, 1] = 1.0         # e_0
    sol = np.linalg.solve(D - z * np.eye(n), rhs)
    return np.array([[sol[k - 1, 0], sol[k - 1, 1]],
                     [sol[k, 0], sol[k, 1]]])


def test_p_must_be_positive():
    with pytest.raises(ValueError):
        JacobiOperator(0, [0.0], [0.1])


def test_free_weyl_is_fixed_point():
    J = JacobiOperator.free()
    # unique solution of r = 1/(-z - r) with r ~ -1/z
    for zeta in (0.3 + 0.4j, -0.2j, 0.8):
        r = weyl_half_line("plus", J, zeta)
        z = zeta + 1.0 / zeta
        assert abs(r - 1.0 / (-z - r)) < 1e-14
        assert abs(r + zeta) < 1e-14
        assert abs(weyl_half_line("minus", J, zeta) + zeta) < 1e-14


def test_single_site_weyl_closed_form_and_truncated_oracle():
    J = JacobiOperator(0, [1.0], [1.0])
    zeta = 0.4 - 0.2j
    r = weyl_half_line("plus", J, zeta)
    assert abs(r - zeta / (zeta - 1.0)) < 1e-13
    # dense half-line truncation of size 200
    z = zeta + 1.0 / zeta
    n = 200
    D = np.diag([1.0] + [0.0] * (n - 1)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    sol = np.linalg.solve(D - z * np.eye(n), rhs)
    assert abs(r - sol[0]) < 1e-10


def test_weyl_herglotz_on_random_windows():
    for seed in range(3):
        J = random_window(4, seed=seed)
        for z in (1j, 2j, 1 + 1j):
            zeta = (z - np.sqrt(z ** 2 - 4 + 0j)) / 2
            if abs(zeta) > 1:
                zeta = 1.0 / zeta
            for side in ("plus", "minus"):
                r = weyl_half_line(side, J, zeta)
                assert r.imag / z.imag > 0


def test_weyl_pole_hit_and_retry():
    # intermediate level vanishes at zeta = 1/q_1 when |q_1| > 1
    J = JacobiOperator(0, [1.0, 1.0], [0.0, 1.5])
    with pytest.raises(PoleHit):
        weyl_half_line("plus", J, 2.0 / 3.0, retry=False)
    val = weyl_half_line("plus", J, 2.0 / 3.0, retry=True)
    assert np.isfinite(val)


def test_resolvent_free_closed_form():
    J = JacobiOperator.free()
    for zeta in (0.3 + 0.4j, 0.25, -0.6j):
        R = resolvent_2x2(J, zeta)
        pref = zeta ** 2 / (1 - zeta ** 2)
        exact = pref * np.array([[-1 / zeta, -1], [-1, -1 / zeta]])
        assert np.max(np.abs(R - exact)) < 1e-13


def test_resolvent_conjugation_symmetry_and_herglotz():
    J = random_window(3, seed=5)
    zeta = 0.3 + 0.45j
    R = resolvent_2x2(J, zeta)
    Rc = resolvent_2x2(J, np.conj(zeta))
    assert np.max(np.abs(Rc - np.conj(R))) < 1e-12
    z = zeta + 1.0 / zeta
    imR = (R - np.conj(R.T)) / 2j
    sgn = np.sign(z.imag)
    assert np.min(np.linalg.eigvalsh(sgn * imR)) > -1e-12


def test_resolvent_matches_truncation():
    for seed in (0, 2):
        J = random_window(5, seed=seed)
        K = max(abs(J.n_min), abs(J.n_max)) + 40
        for zeta in (0.35 + 0.2j, -0.5j, 0.6):
            R = resolvent_2x2(J, zeta)
            Rd = truncated_resolvent(J, zeta, K)
            rel = np.max(np.abs(R - Rd)) / np.max(np.abs(Rd))
            assert rel < 1e-8


def test_density_free_determinant_identity():
    theta = interior_theta_nodes(256, guard=2)
    dens = spectral_density(JacobiOperator.free(), theta)
    det = np.real(np.linalg.det(2 * np.pi * 1.0 * dens.rho))
    assert np.max(np.abs(det - 1.0)) < 1e-10


def test_density_pointwise_formula_resolution_independent():
    # doubling the node count leaves shared nodal values unchanged
    J = random_window(3, seed=1)
    theta = interior_theta_nodes(128, guard=0)
    d1 = spectral_density(J, theta)
    d2 = spectral_density(J, theta[::2])
    assert np.max(np.abs(d1.rho[::2] - d2.rho)) < 1e-10


def test_density_mass_and_positivity():
    J = random_window(4, seed=7)
    theta = interior_theta_nodes(4096, guard=0)
    dens = spectral_density(J, theta)
    assert dens.min_eigenvalue() > -1e-10
    assert dens.hermiticity_residual() < 1e-12
    assert dens.trace_mass() <= 2.0 + 1e-6
    assert abs(dens.trace_mass() - 2.0) < 1e-4


def test_orthonormal_polys_chebyshev():
    theta = np.linspace(0.2, 2.9, 11)
    x = 2 * np.cos(theta)
    P, Q = orthonormal_polys("plus", JacobiOperator.free(), 10, x)
    for n in (1, 4, 10):
        exact = np.sin((n + 1) * theta) / np.sin(theta)
        assert np.max(np.abs(P[n] - exact)) < 1e-12 * (n + 1)


def test_second_kind_q1_from_defining_integral():
    # quadrature of the defining integral with the semicircle weight
    th = (np.arange(4000) + 0.5) * np.pi / 4000
    xq = 2 * np.cos(th)
    wq = (2 / np.pi) * np.sin(th) ** 2 * (np.pi / 4000)
    z = 0.5 + 0.7j
    q1 = np.sum(wq * (xq - z) / (xq - z))     # (P1(x) - P1(z))/(x - z), P1 = x
    _, Q = orthonormal_polys("plus", JacobiOperator.free(), 1, np.array([z]))
    assert abs(Q[1][0] - q1) < 1e-12


def test_second_kind_wronskian_identity():
    J = random_window(5, seed=9)
    x_spec = np.array([-1.7, -0.4, 0.3, 1.2, 1.9])       # bounded recurrence
    x_off = np.array([0.3 + 0.2j, 2.5])                   # exponential growth
    for side in ("plus", "minus"):
        coup = (lambda n: J.p_at(n)) if side == "plus" else (lambda n: J.p_at(-n))
        P, Q = orthonormal_polys(side, J, 65, x_spec)
        for n in range(0, 65):
            w = coup(n + 1) * (P[n] * Q[n + 1] - P[n + 1] * Q[n])
            assert np.max(np.abs(w - 1.0)) < 1e-12 * (n + 2)
        # off the spectrum the identity holds relative to the term size
        P, Q = orthonormal_polys(side, J, 65, x_off)
        for n in range(0, 65):
            w = coup(n + 1) * (P[n] * Q[n + 1] - P[n + 1] * Q[n])
            scale = 1.0 + np.abs(P[n] * Q[n + 1])
            assert np.max(np.abs(w - 1.0) / scale) < 1e-12


def test_poly_degree_and_leading_coefficient():
    J = random_window(4, seed=11)
    # leading coefficient of P_n is 1/(p_1 ... p_n) > 0, checked by growth at
    # a large argument
    big = 1e6
    P, _ = orthonormal_polys("plus", J, 6, np.array([big]))
    lead = 1.0
    for n in range(1, 7):
        lead /= J.p_at(n)
        assert abs(P[n][0] / big ** n - lead) < 1e-4 * lead


def test_szego_class_check_pass_fail_and_scaling():
    theta = interior_theta_nodes(512, guard=0)
    dens = spectral_density(JacobiOperator.free(), theta)
    chk = szego_class_check(dens, floor=5.0)
    assert chk["passed"]
    # scaling rho -> c rho shifts by 2 log c exactly
    chk2 = szego_class_check(dens.scaled(3.0), floor=5.0)
    assert abs(chk2["value"] - chk["value"] - 2 * np.log(3.0)) < 1e-10
    # an essential-singularity factor kills integrability
    theta0 = 212.0 * np.pi / 512.0   # coarse cell boundary, generic for both grids
    factor = np.exp(-1.0 / np.abs(theta - theta0))
    bad = dens.scaled(1.0)
    bad.rho = bad.rho * factor[:, None, None]
    chk_bad = szego_class_check(bad, floor=5.0)
    assert not chk_bad["passed"]
    # refinement trend: a weak essential factor keeps the density above the
    # double-precision underflow floor, so the quadrature estimate keeps
    # dropping as the nodes resolve the singularity
    theta_f = interior_theta_nodes(4096, guard=0)
    dens_f = spectral_density(JacobiOperator.free(), theta_f)
    coarse_d = dens.scaled(1.0)
    coarse_d.rho = coarse_d.rho * np.exp(-0.1 / np.abs(theta - theta0))[:, None, None]
    fine_d = dens_f.scaled(1.0)
    fine_d.rho = fine_d.rho * np.exp(-0.1 / np.abs(theta_f - theta0))[:, None, None]
    coarse = szego_class_check(coarse_d, floor=1e4)["value"]
    fine = szego_class_check(fine_d, floor=1e4)["value"]
    assert fine < coarse - 0.15


def test_weyl_functions_container():
    g = CircleGrid(256)
    J = random_window(3, seed=21)
    wf = WeylFunctions(g, J)
    assert wf.p0 == J.p_at(0)
    assert wf.herglotz_residual(J) >= 0
    # normalization r(z(zeta)) = -zeta + O(zeta^2)
    for side in ("plus", "minus"):
        small = 1e-5
        r = weyl_half_line(side, J, small)
        assert abs(r + small) < 5 * small ** 2


def test_reflection_involution_and_trim():
    J = JacobiOperator(-2, [0.9, 1.1, 0.8], [0.1, -0.2, 0.05])
    JR = J.reflected()
    back = JR.reflected()
    lo = min(J.n_min, back.n_min) - 1
    hi = max(J.n_max, back.n_max) + 1
    assert np.allclose(J.coefficients_on(lo, hi), back.coefficients_on(lo, hi))
    assert trim_to_window(JacobiOperator(0, [1.0, 1.0], [0.0, 0.0])).is_free


def test_off_interval_detection():
    assert has_off_interval_spectrum(JacobiOperator(0, [1.0], [0.5]))
    assert not has_off_interval_spectrum(JacobiOperator(0, [0.8], [0.0]))
