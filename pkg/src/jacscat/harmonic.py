"""Harmonic analysis on a conjugation-symmetric uniform grid of the unit circle.

Functions live as sample arrays on the grid t_j = exp(2*pi*i*j/N); two-sided
Fourier coefficients c_k, k = -N/2 .. N/2-1, are the discrete analogue of the
Fourier series with respect to normalized Lebesgue measure dm.  The uniform
quadrature rule underlying every inner product here is exact for trigonometric
polynomials up to the grid degree.
"""

import numpy as np

from .errors import GridMismatch, SzegoViolation


class CircleGrid:
    """Uniform grid of N = 2^k points on the unit circle.

    The grid is closed under conjugation: conj(t_j) = t_{(N-j) mod N}, which
    makes the star involution exact on samples.
    """

    def __init__(self, n_samples=1024):
        n = int(n_samples)
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError("n_samples must be a power of two >= 16")
        self.n_samples = n
        self.theta = 2.0 * np.pi * np.arange(n) / n
        self.points = np.exp(1j * self.theta)
        self.conj_index = (-np.arange(n)) % n
        # k-values of the stored two-sided coefficient array
        self.k_values = np.arange(-n // 2, n // 2)

    def __eq__(self, other):
        return isinstance(other, CircleGrid) and other.n_samples == self.n_samples

    def __hash__(self):
        return hash(("CircleGrid", self.n_samples))

    def __repr__(self):
        return f"CircleGrid(n_samples={self.n_samples})"


class CircleFunction:
    """Complex function sampled on a CircleGrid, with cached coefficients."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n_samples,):
            raise ValueError("values must have length grid.n_samples")
        self.grid = grid
        self.values = values
        self._coeffs = None

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = analyze(self)
        return self._coeffs

    def coeff(self, k):
        """Coefficient c_k, zero outside the stored range."""
        n = self.grid.n_samples
        if k < -n // 2 or k >= n // 2:
            return 0.0 + 0.0j
        return self.coeffs[k + n // 2]

    def is_real_symmetric(self, tol=1e-12):
        """conj(f(conj t)) == f(t), i.e. all Fourier coefficients real."""
        scale = max(np.max(np.abs(self.values)), 1.0)
        return np.max(np.abs(self.coeffs.imag)) <= tol * scale

    def linf(self):
        return float(np.max(np.abs(self.values)))

    def l2(self):
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def _binop(self, other, op):
        if isinstance(other, CircleFunction):
            if other.grid != self.grid:
                raise GridMismatch("operands on different grids")
            return CircleFunction(self.grid, op(self.values, other.values))
        return CircleFunction(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __radd__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, other):
        return self._binop(other, np.multiply)

    def __rmul__(self, other):
        return self._binop(other, np.multiply)

    def __truediv__(self, other):
        return self._binop(other, np.divide)

    def __neg__(self):
        return CircleFunction(self.grid, -self.values)

    def conj(self):
        return CircleFunction(self.grid, np.conj(self.values))


def constant(grid, c=1.0):
    return CircleFunction(grid, np.full(grid.n_samples, c, dtype=complex))


def monomial(grid, k):
    """The function t^k on the grid."""
    return CircleFunction(grid, grid.points ** k)


def identity_z(grid):
    """z(t) = t + 1/t on the grid."""
    t = grid.points
    return CircleFunction(grid, t + 1.0 / t)


def z_prime(grid):
    """z'(t) = 1 - t^{-2} on the grid."""
    t = grid.points
    return CircleFunction(grid, 1.0 - t ** (-2))


def analyze(f):
    """Two-sided coefficients c_k = (1/N) sum_j f(t_j) t_j^{-k}, k=-N/2..N/2-1."""
    n = f.grid.n_samples
    return np.fft.fftshift(np.fft.fft(f.values)) / n


def synthesize(grid, coeffs):
    """Inverse of analyze: samples of sum_k c_k t^k on the grid."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = grid.n_samples
    if coeffs.shape != (n,):
        raise ValueError("coefficient array must have length n_samples")
    return CircleFunction(grid, n * np.fft.ifft(np.fft.ifftshift(coeffs)))


def from_coeff_dict(grid, pairs):
    """Build a function from sparse {k: c_k} coefficients."""
    carr = np.zeros(grid.n_samples, dtype=complex)
    half = grid.n_samples // 2
    for k, v in dict(pairs).items():
        k = int(k)
        if k < -half or k >= half:
            raise ValueError(f"coefficient index {k} outside grid range")
        carr[k + half] = v
    return synthesize(grid, carr)


class TrimmedCoeffs:
    """Compact two-sided coefficient table for off-grid evaluation."""

    def __init__(self, f, tol=1e-14):
        c = f.coeffs
        half = f.grid.n_samples // 2
        scale = max(np.max(np.abs(c)), 1.0)
        nz = np.nonzero(np.abs(c) > tol * scale)[0]
        if nz.size == 0:
            self.k_min, self.c = 0, np.zeros(1, dtype=complex)
        else:
            self.k_min = int(nz[0] - half)
            self.c = c[nz[0]:nz[-1] + 1]

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        acc = np.zeros_like(zeta)
        for ck in self.c[::-1]:
            acc = acc * zeta + ck
        return acc * zeta ** self.k_min


def riesz_project(f):
    """Keep coefficients with k >= 0, zero the rest."""
    carr = f.coeffs.copy()
    half = f.grid.n_samples // 2
    carr[:half] = 0.0
    return synthesize(f.grid, carr)


def star(f):
    """The involution f(t) -> conj-argument reflection t^{-1} f(t^{-1}).

    On coefficients this is c_k -> c_{-k-1}; on the grid it is exact because
    the grid is closed under conjugation.
    """
    g = f.grid
    vals = np.conj(g.points) * f.values[g.conj_index]
    return CircleFunction(g, vals)


def conj_reflect(f):
    """f(t) -> f(conj t) pointwise (grid reindexing, no conjugation)."""
    return CircleFunction(f.grid, f.values[f.grid.conj_index])


def mean(f):
    return complex(np.mean(f.values))


def inner(f, g):
    """L2 inner product <f, g> = int f conj(g) dm by the uniform rule."""
    if f.grid != g.grid:
        raise GridMismatch("inner product needs a common grid")
    return complex(np.mean(f.values * np.conj(g.values)))


def szego_inner(f, g, s_sym, mask=None):
    """Inner product of the reflection metric: <f + star(s_sym f), g>.

    ``mask`` marks nodes to exclude (True = keep); the quadrature weight is
    renormalized over the kept nodes.
    """
    if f.grid != g.grid or s_sym.grid != f.grid:
        raise GridMismatch("szego_inner needs a common grid")
    h = f + star(s_sym * f)
    prod = h.values * np.conj(g.values)
    if mask is None:
        return complex(np.mean(prod))
    mask = np.asarray(mask, dtype=bool)
    kept = np.count_nonzero(mask)
    if kept == 0:
        raise ValueError("mask excludes every node")
    return complex(np.sum(prod[mask]) / kept)


class OuterFunction:
    """Boundary samples of an outer function together with its value at 0."""

    def __init__(self, boundary, value_at_zero):
        self.boundary = boundary
        self.value_at_zero = float(value_at_zero)

    def validate(self, tol_analytic=1e-10, tol_mean=1e-8):
        """Check analyticity and the geometric-mean normalization at 0."""
        f = self.boundary
        half = f.grid.n_samples // 2
        neg = np.max(np.abs(f.coeffs[:half]))
        scale = max(f.linf(), 1.0)
        if neg > tol_analytic * scale:
            return False
        c0 = f.coeffs[half].real
        return abs(c0 - self.value_at_zero) <= tol_mean * max(abs(c0), 1.0)


def _fit_zero_orders(w, zero_idx):
    """Integer vanishing orders of w at isolated grid-node zeros.

    Returns None when the neighbor fit does not look like a clean integer
    power, in which case the caller falls back to plain clipping.
    """
    n = len(w)
    orders = []
    for j in zero_idx:
        ms = []
        for sgn in (+1, -1):
            w1 = w[(j + sgn) % n]
            w2 = w[(j + 2 * sgn) % n]
            if w1 <= 0 or w2 <= 0:
                return None
            d1 = 2.0 * np.sin(np.pi / n)
            d2 = 2.0 * np.sin(2.0 * np.pi / n)
            ms.append(np.log(w2 / w1) / np.log(d2 / d1))
        m = float(np.mean(ms))
        m_int = int(round(m))
        if not (1 <= m_int <= 4) or abs(m - m_int) > 0.05:
            return None
        orders.append(m_int)
    return orders


def _spectral_fill(values, fill_idx):
    """Fill a few nodes of a smooth periodic sample so the result has minimal
    high-frequency energy (least squares over the top half of the spectrum).

    Point defects at the fill nodes would otherwise leak into the conjugate
    function; for analytic data the residual fill error is at the level of
    the true spectral tail.
    """
    n = values.size
    # 4th-order starting guess
    out = values.copy()
    for j in fill_idx:
        nb = [(j - 2) % n, (j - 1) % n, (j + 1) % n, (j + 2) % n]
        out[j] = (4.0 * (out[nb[1]] + out[nb[2]]) - (out[nb[0]] + out[nb[3]])) / 6.0
    lam = np.fft.fft(out) / n
    kk = np.fft.fftfreq(n, d=1.0 / n)
    band = np.abs(kk) >= n // 4
    A = np.exp(-2j * np.pi * np.outer(kk[band], np.asarray(fill_idx)) / n) / n
    rows = np.vstack([A.real, A.imag])
    rhs = -np.concatenate([lam[band].real, lam[band].imag])
    dc, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    for j, c in zip(fill_idx, dc):
        out[j] += c
    return out


def outer_from_modulus(w, log_floor=50.0):
    """Outer function with prescribed boundary modulus.

    The boundary modulus is matched pointwise; the value at the origin is the
    geometric mean exp(int log w dm).  Isolated zeros sitting exactly on grid
    nodes are factored out as (1 - conj(t_z) t)^m before completing the
    logarithm, so the smooth remainder is integrated at spectral accuracy.

    Raises SzegoViolation when the clipped integral of log w drops below
    -log_floor/2, signaling log w outside L1 at this resolution.
    """
    grid = w.grid
    vals = np.real(w.values).copy()
    if np.min(vals) < -1e-12 * max(np.max(np.abs(vals)), 1.0):
        raise ValueError("modulus must be nonnegative")
    vals = np.maximum(vals, 0.0)
    scale = np.max(vals)
    if scale == 0.0:
        raise SzegoViolation("modulus vanishes identically")

    # computed moduli carry sqrt(eps)-scale noise at true zeros, so detect
    # deep isolated dips rather than exact zeros
    n = grid.n_samples
    small = vals <= 1e-6 * scale
    deep = np.zeros_like(small)
    for j in np.nonzero(small)[0]:
        nb = min(vals[(j - 1) % n], vals[(j + 1) % n])
        deep[j] = vals[j] <= 1e-3 * nb
    zero_idx = np.nonzero(deep)[0]
    orders = None
    if 0 < len(zero_idx) <= 8:
        orders = _fit_zero_orders(vals, zero_idx)
    if orders is not None:
        vals = vals.copy()
        vals[zero_idx] = 0.0

    t = grid.points
    factor = np.ones(grid.n_samples, dtype=complex)
    u = vals.copy()
    if orders is not None:
        for j, m in zip(zero_idx, orders):
            tz = t[j]
            factor *= (1.0 - np.conj(tz) * t) ** m
        afac = np.abs(factor)
        keep = afac > 0
        u = np.where(keep, vals / np.where(keep, afac, 1.0), 1.0)
        logu = np.log(np.maximum(u, 1e-300))
        logu = _spectral_fill(logu, zero_idx)
        u = np.exp(logu)

    logw_clipped = np.log(np.maximum(vals, 1e-300))
    logw_clipped = np.maximum(logw_clipped, -log_floor)
    if np.mean(logw_clipped) < -log_floor / 2.0:
        raise SzegoViolation("clipped mean of log w below -log_floor/2")

    ell = np.maximum(np.log(np.maximum(u, 1e-300)), -log_floor)
    lam = analyze(CircleFunction(grid, ell.astype(complex)))
    half = grid.n_samples // 2
    mu = np.zeros_like(lam)
    mu[half] = lam[half]
    mu[half + 1:] = 2.0 * lam[half + 1:]
    g = synthesize(grid, mu)
    boundary = CircleFunction(grid, np.exp(g.values) * factor)
    value_at_zero = float(np.exp(lam[half].real))
    out = OuterFunction(boundary, value_at_zero)
    out.zero_nodes = zero_idx
    out.zero_orders = orders
    return out
