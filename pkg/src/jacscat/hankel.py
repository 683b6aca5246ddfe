"""Truncated Hankel matrices of shifted reflection symbols and the
regularized reproducing-kernel solve (eps + I + H)^{-1} e_0.

The matrix of the Hankel operator H f = P_+ [t^{-1} (sigma f)(t^{-1})] in the
monomial basis of H^2 is constant on anti-diagonals and built from the
negative Fourier coefficients of the symbol sigma.  Shifting the symbol by
t^{-2 m} moves the coefficient window: entry (j, k) = a_{2m - (j+k+1)} in
terms of the unshifted coefficients a of s_plus.  For trigonometric
polynomial symbols only finitely many anti-diagonals are nonzero, so the
truncated solve is exact once the truncation exceeds the band.
"""

import numpy as np

from .errors import NoConvergence, SymbolAsymmetry
from .harmonic import CircleFunction, riesz_project, star, synthesize


class HankelOperator:
    """M x M truncation of the Hankel matrix of s_plus shifted by n_shift."""

    def __init__(self, symbol_coeffs, k_min, n_shift, matrix):
        # symbol_coeffs[i] is the coefficient of t^(k_min + i) of s_plus
        self.symbol_coeffs = symbol_coeffs
        self.k_min = k_min
        self.n_shift = int(n_shift)
        self.matrix = matrix

    @property
    def trunc(self):
        return self.matrix.shape[0]

    def norm_upper_bound(self):
        return float(np.sum(np.abs(self.symbol_coeffs)))


def _coeff_lookup(coeffs, k_min, k):
    i = k - k_min
    if 0 <= i < coeffs.size:
        return coeffs[i]
    return 0.0


def build_hankel(s_plus, n_shift, trunc, sym_tol=1e-10):
    """Hankel truncation with entries a_{2 n_shift - (j+k+1)}.

    ``a`` are the two-sided coefficients of s_plus; the analytic part of the
    effective symbol never enters.  Raises SymbolAsymmetry when the
    coefficients carry imaginary parts beyond tolerance, since the metric
    construction needs a real-symmetric reflection coefficient.
    """
    coeffs = s_plus.coeffs
    scale = max(np.max(np.abs(coeffs)), 1.0)
    if np.max(np.abs(coeffs.imag)) > sym_tol * scale:
        raise SymbolAsymmetry("reflection symbol has non-real coefficients")
    n = s_plus.grid.n_samples
    if trunc > n // 4:
        raise ValueError("truncation must not exceed grid/4")
    a = coeffs.real.copy()
    k_min = -(n // 2)

    # entry (j, k) depends on j+k only
    diag_idx = 2 * n_shift - (np.arange(2 * trunc - 1) + 1)
    vals = np.array([_coeff_lookup(a, k_min, d) for d in diag_idx])
    jj, kk = np.indices((trunc, trunc))
    matrix = vals[jj + kk]
    return HankelOperator(a, k_min, n_shift, matrix)


def hankel_apply_reference(s_plus, n_shift, f):
    """Direct-definition action P_+ star(sigma f) for cross-checking.

    sigma is s_plus shifted by t^{-2 n_shift}; returns the coefficient array
    of the projection restricted to the analytic range.
    """
    g = s_plus.grid
    sigma_vals = s_plus.values * g.points ** (-2 * n_shift)
    sigma = CircleFunction(g, sigma_vals)
    proj = riesz_project(star(sigma * f))
    half = g.n_samples // 2
    return proj.coeffs[half:]


class ReproducingKernel:
    """Solution of the regularized kernel equation at the smallest epsilon."""

    def __init__(self, coeffs, eps_trace, converged):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.value_at_zero = float(self.coeffs[0])
        self.eps_trace = tuple(eps_trace)
        self.converged = bool(converged)

    def normalized_value_at_zero(self):
        """K(0) = k(0)/sqrt(k(0)) = sqrt(k(0))."""
        return float(np.sqrt(self.value_at_zero))

    def normalized_coeffs(self):
        return self.coeffs / np.sqrt(self.value_at_zero)

    def on_grid(self, grid):
        """Samples of the normalized kernel K on a circle grid."""
        carr = np.zeros(grid.n_samples, dtype=complex)
        half = grid.n_samples // 2
        m = min(self.coeffs.size, half)
        carr[half:half + m] = self.normalized_coeffs()[:m]
        return synthesize(grid, carr)


def _spd_solve(mat, rhs):
    try:
        c = np.linalg.cholesky(mat)
        y = np.linalg.solve(c, rhs)
        return np.linalg.solve(c.T, y)
    except np.linalg.LinAlgError:
        return np.linalg.solve(mat, rhs)


def reproducing_kernel(H, eps_ladder=(1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12), rel_tol=1e-7,
                       strict=True):
    """Regularized kernel ladder (eps + I + H)^{-1} e_0.

    The quadratic form of I + H is the squared reflection metric, hence psd;
    adding eps keeps every solve symmetric positive definite.  The value at
    the origin increases monotonically as eps decreases and is bounded by
    the true kernel value, so ladder stabilization certifies convergence.
    Raises NoConvergence (with the trace attached) when the last two rungs
    still move by more than ``rel_tol`` relatively; pass strict=False to get
    the flagged result instead.
    """
    m = H.trunc
    e0 = np.zeros(m)
    e0[0] = 1.0
    base = np.eye(m) + H.matrix
    trace = []
    x = None
    for eps in eps_ladder:
        x = _spd_solve(base + eps * np.eye(m), e0)
        trace.append((float(eps), float(x[0])))
    if len(trace) >= 2:
        prev, last = trace[-2][1], trace[-1][1]
        converged = abs(last - prev) <= rel_tol * max(abs(last), 1e-30)
    else:
        converged = False
    if not converged and strict:
        raise NoConvergence("kernel ladder did not stabilize", trace=trace)
    return ReproducingKernel(x, trace, converged)


def min_singular(H):
    """Smallest singular value of I + H at the stored truncation."""
    m = np.eye(H.trunc) + H.matrix
    return {"value": float(np.linalg.svd(m, compute_uv=False)[-1]),
            "trunc": H.trunc}


def min_singular_trend(s_plus, m_ladder=(64, 128, 256)):
    return [min_singular(build_hankel(s_plus, 0, m)) for m in m_ladder]
