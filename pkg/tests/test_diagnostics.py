import numpy as np
import pytest

from jacscat.diagnostics import (MatrixWeight, a2_quotient,
                                 density_weight_from_operator, doubling_check,
                                 frak_h, identity_32_check,
                                 inequality_34_estimate, poisson_average,
                                 poisson_vs_interval_check, q2e,
                                 theorem04_panel, weighted_projection_norm)
from jacscat.gallery import example_nonunique, random_window
from jacscat.harmonic import CircleFunction, CircleGrid, from_coeff_dict
from jacscat.inverse import ReflectionInput
from jacscat.jacobi import (JacobiOperator, interior_theta_nodes,
                            spectral_density)


def test_frak_h_constant_closed_form():
    xs = np.linspace(-2, 2, 4001)
    g = np.ones((xs.size, 1), dtype=complex)
    for z in (3.0 + 0j, 1j, -0.7 + 1.5j):
        val = frak_h(xs, g, z)[0]
        assert abs(val - np.log((z + 2) / (z - 2))) < 1e-6


def test_frak_h_jump_and_linearity():
    xs = np.linspace(-2, 2, 2001)
    g = (np.exp(-xs ** 2) * (2 - xs ** 2))[:, None].astype(complex)
    i0 = 700
    below = frak_h(xs, g, xs[i0], side="-")[0]
    above = frak_h(xs, g, xs[i0], side="+")[0]
    assert abs(below - above - 2j * np.pi * g[i0, 0]) < 1e-12
    # linearity and conjugation symmetry for real g
    z = 0.4 + 0.8j
    assert abs(frak_h(xs, 2.5 * g, z)[0] - 2.5 * frak_h(xs, g, z)[0]) < 1e-12
    assert abs(frak_h(xs, g, np.conj(z))[0] - np.conj(frak_h(xs, g, z)[0])) < 1e-12


def test_identity_transform_free_and_random():
    theta = interior_theta_nodes(2048, guard=0)
    J0 = JacobiOperator.free()
    dens0 = spectral_density(J0, theta)
    assert identity_32_check(J0, dens0, {0: 1.0}) < 1e-8

    J = random_window(4, seed=2)
    dens = spectral_density(J, theta)
    for f in ({-1: 1.0}, {0: 1.0}, {2: 1.0}):
        assert identity_32_check(J, dens, f) < 1e-6
    # linearity in f
    a = identity_32_check(J, dens, {-1: 0.5, 2: 1.5})
    assert a < 1e-6


def test_inequality_ratio_stable_and_scale_invariant():
    theta = interior_theta_nodes(1024, guard=0)
    dens = spectral_density(JacobiOperator.free(), theta)
    est1 = inequality_34_estimate(dens, trials=8, seed=1)
    theta2 = interior_theta_nodes(2048, guard=0)
    dens2 = spectral_density(JacobiOperator.free(), theta2)
    est2 = inequality_34_estimate(dens2, trials=8, seed=1)
    assert est1["best_ratio"] > 1.0
    assert abs(est2["best_ratio"] - est1["best_ratio"]) < 0.05 * est1["best_ratio"]


def test_a2_quotient_identity_weight():
    W = MatrixWeight.from_scalar_callable(lambda x: np.ones_like(x))
    assert abs(a2_quotient(W, 0.3, 0.25) - 1.0) < 1e-10
    # boundary truncation only shrinks the quotient
    assert a2_quotient(W, 2.0, 0.5) <= 1.0 + 1e-10


def test_a2_quotient_sqrt_weight_closed_form():
    # interval averages of |x|^{1/2} and |x|^{-1/2} around the origin:
    # (2/3) sqrt(d) and 2/sqrt(d), so the quotient is sqrt(4/3)
    W = MatrixWeight.from_scalar_callable(lambda x: np.abs(x) ** 0.5)
    for d in (0.5, 0.125):
        q = a2_quotient(W, 0.0, d, n_quad=4096)
        assert abs(q - np.sqrt(4.0 / 3.0)) < 5e-3


def test_q2e_identity_and_divergence_verdicts():
    WI = MatrixWeight.from_scalar_callable(lambda x: np.ones_like(x))
    rep = q2e(WI, n_scales=5, base_quad=64)
    assert abs(rep.Q - 1.0) < 1e-9 and not rep.divergent

    Wh = MatrixWeight.from_scalar_callable(lambda x: np.abs(x) ** 0.5)
    rep_h = q2e(Wh, n_scales=6, base_quad=64)
    assert not rep_h.divergent
    assert rep_h.Q < 2.0

    Wsq = MatrixWeight.from_scalar_callable(lambda x: x ** 2)
    rep_sq = q2e(Wsq, n_scales=6, base_quad=64)
    assert rep_sq.divergent
    i0 = int(np.argmin(np.abs(rep_sq.centers)))
    ladder = rep_sq.table[-4:, i0]
    assert np.all(np.diff(ladder) > 0) and ladder[-1] >= 1.5 * ladder[0]


def test_q2e_diagonal_pair_weight():
    def W(x):
        w = np.abs(x - 0.5) ** 0.5 + 1e-12
        out = np.zeros((x.size, 2, 2), dtype=complex)
        out[:, 0, 0] = w
        out[:, 1, 1] = 1.0 / w
        return out
    rep = q2e(MatrixWeight.from_callable(W), n_scales=6, base_quad=64)
    assert not rep.divergent
    assert rep.Q < 3.0


def test_q2e_pinching_monotonicity():
    rng = np.random.default_rng(3)
    xs = np.linspace(-2, 2, 33)
    blocks = []
    for _ in range(33):
        A = rng.normal(size=(2, 2))
        blocks.append(A @ A.T + 0.5 * np.eye(2))
    W1 = MatrixWeight(xs, np.array(blocks, dtype=complex))
    c = 1.7
    W2 = MatrixWeight(xs, c * np.array(blocks, dtype=complex))
    q1 = q2e(W1, n_scales=4, base_quad=64).Q
    q2 = q2e(W2, n_scales=4, base_quad=64).Q
    assert q2 <= c * q1 + 1e-9


def test_weighted_projection_norms():
    WI = MatrixWeight.from_scalar_callable(lambda x: np.ones_like(x))
    rep = weighted_projection_norm(WI, grid_n=1024)
    assert rep["norm"] <= 1.0 + 1e-6

    Wh = MatrixWeight.from_scalar_callable(lambda x: np.abs(x) ** 0.5)
    n1 = weighted_projection_norm(Wh, grid_n=1024)["norm"]
    n2 = weighted_projection_norm(Wh, grid_n=2048)["norm"]
    assert abs(n2 - n1) <= 0.05 * n1

    Wsq = MatrixWeight.from_scalar_callable(lambda x: x ** 2)
    m1 = weighted_projection_norm(Wsq, grid_n=1024)["norm"]
    m2 = weighted_projection_norm(Wsq, grid_n=4096)["norm"]
    assert m2 >= 2.0 * m1


def test_doubling_identity_weight_exact_averages():
    WI = MatrixWeight.from_scalar_callable(lambda x: np.ones_like(x))
    rep = doubling_check(WI, 0.2, 0.3, lam=2.0, Q=1.0)
    # W(2I) = 2 W(I) >= 1.25 W(I)
    assert rep["holds"]
    assert abs(rep["min_gap"] - 0.75 * 0.6) < 1e-9


def test_doubling_random_psd_piecewise_weights():
    rng = np.random.default_rng(11)
    for trial in range(20):
        xs = np.linspace(-2, 2, 9)
        blocks = []
        for _ in range(9):
            A = rng.normal(size=(2, 2))
            blocks.append(A @ A.T + 0.2 * np.eye(2))
        W = MatrixWeight(xs, np.array(blocks, dtype=complex))
        Q = q2e(W, n_scales=4, base_quad=64).Q
        center = rng.uniform(-1.0, 1.0)
        rep = doubling_check(W, center, 0.4, lam=2.0, Q=Q)
        assert rep["holds"], f"trial {trial} gap {rep['min_gap']}"


def test_poisson_average_bound():
    rng = np.random.default_rng(4)
    xs = np.linspace(-2, 2, 9)
    blocks = []
    for _ in range(9):
        A = rng.normal(size=(2, 2))
        blocks.append(A @ A.T + 0.3 * np.eye(2))
    W = MatrixWeight(xs, np.array(blocks, dtype=complex))
    Q = q2e(W, n_scales=4, base_quad=64).Q
    for center, delta in ((0.0, 0.25), (0.8, 0.5)):
        rep = poisson_vs_interval_check(W, center, delta, Q=Q)
        assert rep["holds"]
    # the Poisson average itself is a psd matrix of sensible size
    avg = poisson_average(W, 0.1 + 0.3j)
    assert np.min(np.linalg.eigvalsh(avg)) > 0


def test_panel_free_and_example():
    pan = theorem04_panel(JacobiOperator.free())
    assert not pan["a2_divergent"] and pan["invertible"] and pan["unique"]
    assert pan["coherent"]

    ex = example_nonunique(0.5, 0.5, 2, grid=CircleGrid(1024))
    refl = ReflectionInput(ex.s_plus)
    pan = theorem04_panel(refl)
    assert pan["a2_divergent"]
    assert pan["invertible"]
    assert not pan["unique"]
    assert pan["defect_plus"] > 1e-3
    assert pan["coherent"]
    assert min(pan["min_singular_trends"]["plus"]) >= 0.4


def test_density_weight_from_operator_matches_direct():
    J = random_window(3, seed=6)
    W = density_weight_from_operator(J)
    xs = np.array([-1.2, 0.0, 1.5])
    direct = spectral_density(J, np.arccos(xs / 2.0)).rho
    assert np.max(np.abs(W.sample(xs) - direct)) < 1e-12
