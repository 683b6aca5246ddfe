"""Test-case generators: the free matrix, single-bond perturbations, random
windows filtered for clean spectrum, weights with eventually-free recurrence
coefficients, and the closed-form scattering matrix whose reflection
coefficient fails to determine the operator uniquely.
"""

import numpy as np

from .errors import ValidationError
from .forward import (jost_solutions, transmission_denominator_roots)
from .harmonic import CircleFunction, CircleGrid
from .jacobi import JacobiOperator, has_off_interval_spectrum


def free():
    return JacobiOperator.free()


def single_site(c):
    """Single perturbed bond p_0 = c; 0 < c < 1 keeps the spectrum on the band."""
    if not (0.0 < c < 1.0):
        raise ValidationError("single-site coupling must satisfy 0 < c < 1")
    return JacobiOperator(0, [c], [0.0])


def window_margin(J, grid=None):
    """Distance of the nearest transmission-denominator zero to the circle."""
    grid = grid or CircleGrid(256)
    jost = jost_solutions(J, grid, check_spectrum=False)
    roots = transmission_denominator_roots(jost)
    keep = np.abs(np.abs(roots) - 1.0) > 1e-8     # drop the factor zeros at +-1
    roots = roots[keep]
    return float(np.min(np.abs(roots))) if roots.size else np.inf


def random_window(width, magnitude=0.25, seed=0, margin=1.05, max_tries=2000):
    """Random finite window with clean spectrum.

    p is biased below the free value and q kept small so that a useful
    fraction of samples avoids both off-interval eigenvalues and
    near-threshold resonances; candidates failing either filter are
    rejected and resampled.
    """
    if width < 1 or width > 8:
        raise ValidationError("width must be in 1..8")
    if magnitude <= 0 or magnitude > 0.3:
        raise ValidationError("magnitude must be in (0, 0.3]")
    rng = np.random.default_rng(seed)
    grid = CircleGrid(256)
    for _ in range(max_tries):
        p = 1.0 + rng.uniform(-magnitude, 0.2 * magnitude, width)
        q = rng.uniform(-0.3 * magnitude, 0.3 * magnitude, width)
        n_min = int(rng.integers(-width, 1))
        J = JacobiOperator(n_min, p, q)
        if has_off_interval_spectrum(J):
            continue
        if window_margin(J, grid) < margin:
            continue
        return J
    raise ValidationError("could not sample a clean random window")


def eventually_free_from_weight(poly_coeffs, degree_cap=None, quad_n=8192,
                                tail_tol=1e-9):
    """Half-line Jacobi coefficients of the weight sin^2(theta)/|P|^2.

    P is a polynomial in the uniformization variable, zero-free on the
    closed disk; the classical three-term recurrence of such a weight
    returns to the free values beyond deg P exactly.  Coefficients come out
    of the discrete Stieltjes procedure on an angular quadrature; the free
    tail is verified against ``tail_tol`` and trimmed.
    """
    c = np.asarray(poly_coeffs, dtype=float)
    if c.size == 0 or c[0] == 0:
        raise ValidationError("polynomial must have a nonzero constant term")
    if c.size > 1:
        roots = np.roots(c[::-1])
        if np.min(np.abs(roots)) <= 1.02:
            raise ValidationError("polynomial must be zero-free on the closed disk")
    deg = c.size - 1
    n_levels = (degree_cap or deg) + 4

    theta = (np.arange(quad_n) + 0.5) * np.pi / quad_n
    t = np.exp(1j * theta)
    pvals = np.polyval(c[::-1], t)
    wts = (2.0 / np.pi) * np.sin(theta) ** 2 / np.abs(pvals) ** 2 * (np.pi / quad_n)
    x = 2.0 * np.cos(theta)

    # discrete Stieltjes with monic polynomials
    pi_prev = np.zeros_like(x)
    pi_cur = np.ones_like(x)
    nrm_prev = 1.0
    a, b = [], []
    for _ in range(n_levels):
        nrm = float(np.sum(wts * pi_cur ** 2))
        an = float(np.sum(wts * x * pi_cur ** 2) / nrm)
        a.append(an)
        if len(a) > 1:
            b.append(np.sqrt(nrm / nrm_prev))
        pi_next = (x - an) * pi_cur - (b[-1] ** 2 if b else 0.0) * pi_prev
        pi_prev, pi_cur, nrm_prev = pi_cur, pi_next, nrm
    a = np.array(a)
    b = np.array(b)
    if np.max(np.abs(a[deg + 1:])) > tail_tol or np.max(np.abs(b[deg + 1:] - 1.0)) > tail_tol:
        raise ValidationError("recurrence tail did not return to free values")
    return a[:deg + 1], b[:deg + 1]


def bernstein_szego(poly_coeffs):
    """Jacobi matrix that is free except for a right half-line head window.

    The two-sided extension (free minus side) must keep the spectrum on the
    band; polynomials whose head window binds (for example any degree-one
    polynomial, which produces a single diagonal site) are rejected.
    """
    from .jacobi import trim_to_window
    a, b = eventually_free_from_weight(poly_coeffs)
    width = a.size
    p = np.concatenate([[1.0], b])[:width]
    q = a
    J = trim_to_window(JacobiOperator(0, np.maximum(p, 1e-12), q))
    if has_off_interval_spectrum(J):
        raise ValidationError(
            "two-sided extension of this weight has spectrum off the band; "
            "use an even or more strongly damped polynomial")
    return J


class ExampleScattering:
    """Closed-form scattering triple built from inner-function mixing."""

    def __init__(self, grid, s, s_plus, s_minus, a_plus, a_minus, delta_degree):
        self.grid = grid
        self.s = s
        self.s_plus = s_plus
        self.s_minus = s_minus
        self.a_plus = a_plus
        self.a_minus = a_minus
        self.delta_degree = delta_degree

    def min_abs_s(self):
        return float(np.min(np.abs(self.s.values)))

    def closed_form_s(self):
        t = self.grid.points
        ap, am, d = self.a_plus, self.a_minus, self.delta_degree
        up = np.sqrt(1 - ap ** 2)
        um = np.sqrt(1 - am ** 2)
        delta = t ** d
        den = 1 - (ap + am) * t * (1 + delta) / 2 + ap * am * t * t * delta
        return up * um * (1 - delta) / 2 / den

    def invariant_report(self):
        s, sp, smv = self.s.values, self.s_plus.values, self.s_minus.values
        return {
            "unitarity_plus": float(np.max(np.abs(np.abs(s) ** 2 + np.abs(sp) ** 2 - 1))),
            "unitarity_minus": float(np.max(np.abs(np.abs(s) ** 2 + np.abs(smv) ** 2 - 1))),
            "compatibility": float(np.max(np.abs(np.conj(sp) * s + np.conj(s) * smv))),
            "min_abs_s": self.min_abs_s(),
        }


def example_nonunique(a_plus=0.5, a_minus=0.5, delta_degree=2, grid=None):
    """Scattering matrix with invertible metric operators but no unique
    operator behind it: diagonal reflections mixed by the inner function
    t^degree.  The transmission vanishes where the inner function equals 1,
    so its reciprocal is unbounded."""
    if not (0 < a_plus < 1 and 0 < a_minus < 1):
        raise ValidationError("mixing amplitudes must lie in (0, 1)")
    if delta_degree < 2:
        raise ValidationError("inner-function degree must be >= 2")
    grid = grid or CircleGrid(1024)
    t = grid.points
    n = grid.n_samples

    up = np.sqrt(1 - a_plus ** 2)
    um = np.sqrt(1 - a_minus ** 2)
    vp, vm = a_plus * t, a_minus * t
    delta = t ** delta_degree
    E = np.empty((n, 2, 2), dtype=complex)
    E[:, 0, 0] = E[:, 1, 1] = (1 + delta) / 2
    E[:, 0, 1] = E[:, 1, 0] = (1 - delta) / 2
    V = np.zeros((n, 2, 2), dtype=complex)
    V[:, 0, 0] = vm
    V[:, 1, 1] = vp
    U = np.zeros((n, 2, 2), dtype=complex)
    U[:, 0, 0] = um
    U[:, 1, 1] = up

    # core = E (I - V E)^{-1}, solved from the right via the transpose
    A = np.tile(np.eye(2), (n, 1, 1)) - np.einsum("nij,njk->nik", V, E)
    core = np.swapaxes(np.linalg.solve(np.swapaxes(A, 1, 2),
                                       np.swapaxes(E, 1, 2)), 1, 2)
    S = np.einsum("nij,njk,nkl->nil", U, core, U)
    S[:, 0, 0] += -np.conj(vm) * um / np.conj(um)
    S[:, 1, 1] += -np.conj(vp) * up / np.conj(up)

    ex = ExampleScattering(
        grid,
        CircleFunction(grid, S[:, 0, 1]),
        CircleFunction(grid, S[:, 1, 1]),
        CircleFunction(grid, S[:, 0, 0]),
        a_plus, a_minus, delta_degree)
    gap = np.max(np.abs(S[:, 0, 1] - S[:, 1, 0]))
    if gap > 1e-10:
        raise ValidationError(f"scattering assembly lost symmetry ({gap:.2e})")
    return ex
