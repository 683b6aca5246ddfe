import numpy as np
import pytest

from jacscat.errors import ValidationError
from jacscat.forward import forward_pipeline
from jacscat.gallery import (bernstein_szego, example_nonunique, free,
                             random_window, single_site, window_margin)
from jacscat.harmonic import CircleGrid
from jacscat.jacobi import (has_off_interval_spectrum, interior_theta_nodes,
                            spectral_density, szego_class_check)


def test_free_and_single_site():
    assert free().is_free
    J = single_site(0.6)
    assert J.p_at(0) == 0.6 and J.q_at(0) == 0.0
    with pytest.raises(ValidationError):
        single_site(1.2)
    with pytest.raises(ValidationError):
        single_site(-0.1)


def test_random_window_clean_and_seeded():
    J1 = random_window(5, seed=4)
    J2 = random_window(5, seed=4)
    assert np.allclose(J1.p, J2.p) and np.allclose(J1.q, J2.q)
    assert not has_off_interval_spectrum(J1)
    assert window_margin(J1) >= 1.05
    assert np.max(np.abs(J1.p - 1.0)) <= 0.3 and np.max(np.abs(J1.q)) <= 0.3


def test_bernstein_szego_head_is_eventually_free():
    J = bernstein_szego([1.0, 0.0, 0.3])
    assert not has_off_interval_spectrum(J)
    # the recurrence returns to the free values right after the head
    assert J.width <= 3
    theta = interior_theta_nodes(512, guard=2)
    chk = szego_class_check(spectral_density(J, theta))
    assert chk["passed"]


def test_bernstein_szego_rejects_binding_polynomials():
    with pytest.raises(ValidationError):
        bernstein_szego([1.0, -0.4])          # diagonal head always binds
    with pytest.raises(ValidationError):
        bernstein_szego([1.0, -1.2])          # root inside the disk


def test_example_closed_forms():
    ex = example_nonunique(0.5, 0.5, 2)
    rep = ex.invariant_report()
    assert rep["unitarity_plus"] < 1e-12
    assert rep["unitarity_minus"] < 1e-12
    assert rep["compatibility"] < 1e-12
    assert rep["min_abs_s"] < 1e-3
    assert np.max(np.abs(ex.s.values - ex.closed_form_s())) < 1e-12
    # leading reflection coefficients of the mixing construction
    assert abs(ex.s_plus.coeff(-1) + 0.5) < 1e-12
    assert abs(ex.s_plus.coeff(0) - 0.375) < 1e-12
    assert abs(ex.s_plus.coeff(1) - 0.1875) < 1e-12
    # transmission dies where the inner function equals one (t = +-1)
    n = ex.grid.n_samples
    assert abs(ex.s.values[0]) < 1e-12
    assert abs(ex.s.values[n // 2]) < 1e-12


def test_example_parameter_validation():
    with pytest.raises(ValidationError):
        example_nonunique(1.2, 0.5, 2)
    with pytest.raises(ValidationError):
        example_nonunique(0.5, 0.5, 1)


def test_example_asymmetric_amplitudes():
    ex = example_nonunique(0.4, 0.7, 3, grid=CircleGrid(512))
    rep = ex.invariant_report()
    assert rep["unitarity_plus"] < 1e-12
    assert rep["min_abs_s"] < 1e-3
    assert ex.s_plus.is_real_symmetric(1e-10)


def test_gallery_matrices_pass_forward_gates():
    g = CircleGrid(512)
    for J in (free(), single_site(0.8), bernstein_szego([1.0, 0.0, 0.3])):
        jost, sm = forward_pipeline(J, g)
        rep = sm.invariant_report()
        assert rep["unitarity_plus"] < 1e-10
