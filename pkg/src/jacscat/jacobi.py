"""Two-sided Jacobi operators with finitely supported perturbation of the
free (Chebyshev) matrix, their half-line Weyl functions, the 2x2 resolvent,
the matrix spectral density on (-2, 2), and orthogonal polynomials of the
first and second kind.

Index conventions.  The operator acts as
    J e_n = p_n e_{n-1} + q_n e_n + p_{n+1} e_{n+1},
so p_n couples sites n-1 and n.  The minus half-line restriction uses the
basis order e_{-1}, e_{-2}, ... ; in mirrored coordinates k = 0, 1, ... its
diagonal is q_{-k-1} and its coupling between levels k and k+1 is p_{-k-1}.
"""

import numpy as np

from .errors import PoleHit, OffIntervalSpectrum
from .harmonic import CircleFunction

_FREE_VALUE_P = 1.0
_FREE_VALUE_Q = 0.0


class JacobiOperator:
    """Finite window of (p, q) values over indices n_min..n_max; free outside."""

    def __init__(self, n_min=0, p=(), q=()):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if p.shape != q.shape:
            raise ValueError("p and q must have equal length")
        if p.size and np.min(p) <= 0:
            raise ValueError("p must be positive")
        self.n_min = int(n_min)
        self.p = p
        self.q = q

    @classmethod
    def free(cls):
        return cls(0, (), ())

    @property
    def width(self):
        return self.p.size

    @property
    def n_max(self):
        return self.n_min + self.width - 1

    @property
    def is_free(self):
        return self.width == 0

    def p_at(self, n):
        if self.width and self.n_min <= n <= self.n_max:
            return float(self.p[n - self.n_min])
        return _FREE_VALUE_P

    def q_at(self, n):
        if self.width and self.n_min <= n <= self.n_max:
            return float(self.q[n - self.n_min])
        return _FREE_VALUE_Q

    def coefficients_on(self, n_lo, n_hi):
        ns = np.arange(n_lo, n_hi + 1)
        return (np.array([self.p_at(n) for n in ns]),
                np.array([self.q_at(n) for n in ns]))

    def reflected(self):
        """Image under the site reflection n -> -n-1 (bond p_n -> p_{-n},
        diagonal q_n -> q_{-n-1})."""
        if self.is_free:
            return JacobiOperator.free()
        ns = np.arange(-self.n_max - 1, -self.n_min + 1)
        p = np.array([self.p_at(-n) for n in ns])
        q = np.array([self.q_at(-n - 1) for n in ns])
        return trim_to_window(JacobiOperator(int(ns[0]), p, q))

    def __repr__(self):
        return (f"JacobiOperator(n_min={self.n_min}, "
                f"p={self.p.tolist()}, q={self.q.tolist()})")


def trim_to_window(J, tol=1e-11):
    """Drop leading/trailing free entries of the stored window."""
    if J.is_free:
        return J
    nontrivial = (np.abs(J.p - 1.0) > tol) | (np.abs(J.q) > tol)
    idx = np.nonzero(nontrivial)[0]
    if idx.size == 0:
        return JacobiOperator.free()
    lo, hi = idx[0], idx[-1]
    return JacobiOperator(J.n_min + lo, J.p[lo:hi + 1], J.q[lo:hi + 1])


def dense_truncation(J, half_size):
    """Dense symmetric truncation on sites -half_size..half_size."""
    ns = np.arange(-half_size, half_size + 1)
    diag = np.array([J.q_at(n) for n in ns])
    off = np.array([J.p_at(n) for n in ns[1:]])
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def has_off_interval_spectrum(J, pad=60, tol=1e-10):
    """True when a dense truncation shows spectrum outside [-2, 2].

    A truncation eigenvalue outside the interval certifies true spectrum
    there (variational argument); very shallow bound states can still hide
    within the truncation error and are caught downstream by the zero test
    of the extracted transmission denominator.
    """
    if J.is_free:
        return False
    half = max(abs(J.n_min), abs(J.n_max)) + pad
    evals = np.linalg.eigvalsh(dense_truncation(J, half))
    return bool(np.max(np.abs(evals)) > 2.0 + tol)


def _continued_fraction(zeta, diag, coup, retry):
    """Finite continued fraction r = 1/(q - z - p^2 r_next), free tail -zeta.

    ``diag`` and ``coup`` are listed from the innermost level (index 0)
    outward; the recursion runs from the far end inward.
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = zeta + 1.0 / zeta
    r = -zeta
    for qn, pn in zip(reversed(diag), reversed(coup)):
        den = qn - z - pn * pn * r
        bad = np.abs(den) < 1e-14
        if np.any(bad):
            if not retry:
                raise PoleHit("continued-fraction denominator vanished")
            zeta_in = np.where(bad, zeta * (1.0 - 1e-9), zeta)
            return _continued_fraction(zeta_in, diag, coup, retry=False)
        r = 1.0 / den
    return r


def weyl_half_line(side, J, zeta, retry=True):
    """Weyl function of the half-line restriction at points |zeta| <= 1.

    side "plus": r_+(z) = <(J_+ - z)^{-1} e_0, e_0> with J_+ acting on
    span{e_0, e_1, ...}; side "minus" mirrors onto span{e_-1, e_-2, ...}.
    The free matrix gives exactly -zeta.
    """
    scalar = np.isscalar(zeta) or np.asarray(zeta).ndim == 0
    if side == "plus":
        n_hi = J.n_max if not J.is_free else -1
        levels = range(0, max(n_hi, -1) + 1)
        diag = [J.q_at(n) for n in levels]
        coup = [J.p_at(n + 1) for n in levels]
    elif side == "minus":
        k_hi = (-J.n_min - 1) if (not J.is_free and J.n_min <= -1) else -1
        levels = range(0, max(k_hi, -1) + 1)
        diag = [J.q_at(-k - 1) for k in levels]
        coup = [J.p_at(-k - 1) for k in levels]
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    r = _continued_fraction(zeta, diag, coup, retry)
    return complex(r) if scalar else r


class WeylFunctions:
    """Boundary samples of r_-(z(t)), r_+(z(t)) together with p_0."""

    def __init__(self, grid, J, retry=True):
        t = grid.points
        self.grid = grid
        self.p0 = J.p_at(0)
        self.r_minus = CircleFunction(grid, weyl_half_line("minus", J, t, retry))
        self.r_plus = CircleFunction(grid, weyl_half_line("plus", J, t, retry))

    def herglotz_residual(self, J, samples=(0.5j, 0.25 + 0.5j, -0.3 + 0.2j)):
        """Most negative Im r / Im z over interior probe points (>= 0 expected)."""
        worst = np.inf
        for zeta in samples:
            z = zeta + 1.0 / zeta
            for side in ("plus", "minus"):
                r = weyl_half_line(side, J, zeta)
                worst = min(worst, (r.imag / z.imag) if z.imag else np.inf)
        return worst


def resolvent_2x2(J, zeta, retry=True):
    """R(z(zeta)) = [[1/r_-, p0], [p0, 1/r_+]]^{-1}, shape (..., 2, 2).

    Row/column order follows (e_{-1}, e_0).
    """
    zeta = np.asarray(zeta, dtype=complex)
    rm = weyl_half_line("minus", J, zeta, retry)
    rp = weyl_half_line("plus", J, zeta, retry)
    p0 = J.p_at(0)
    det = 1.0 / (np.asarray(rm) * np.asarray(rp)) - p0 * p0
    R = np.empty(zeta.shape + (2, 2), dtype=complex)
    R[..., 0, 0] = (1.0 / np.asarray(rp)) / det
    R[..., 1, 1] = (1.0 / np.asarray(rm)) / det
    R[..., 0, 1] = -p0 / det
    R[..., 1, 0] = -p0 / det
    return R


def interior_theta_nodes(n_nodes, guard=2):
    """Midpoint nodes in (0, pi) with a guard band at both band edges."""
    theta = (np.arange(n_nodes) + 0.5) * np.pi / n_nodes
    if guard:
        theta = theta[guard:-guard]
    return theta


class SpectralDensity:
    """Hermitian 2x2 density rho(x) at nodes x = 2 cos(theta)."""

    def __init__(self, theta, rho):
        self.theta = np.asarray(theta, dtype=float)
        self.x_nodes = 2.0 * np.cos(self.theta)
        self.rho = np.asarray(rho, dtype=complex)

    def trace_mass(self):
        """Quadrature of trace rho over (-2, 2) in the theta variable."""
        tr = np.real(np.trace(self.rho, axis1=-2, axis2=-1))
        w = 2.0 * np.sin(self.theta)
        return float(np.sum(tr * w) * np.pi / _theta_count(self.theta))

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(_hermitize(self.rho))))

    def hermiticity_residual(self):
        return float(np.max(np.abs(self.rho - np.conj(np.swapaxes(self.rho, -1, -2)))))

    def scaled(self, c):
        return SpectralDensity(self.theta, c * self.rho)


def _theta_count(theta):
    # effective node count of the midpoint rule the nodes came from
    if len(theta) < 2:
        return max(len(theta), 1)
    return int(round(np.pi / (theta[1] - theta[0])))


def _hermitize(rho):
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def spectral_density(J, theta):
    """Boundary spectral density rho(2 cos theta), theta in (0, pi).

    Evaluates the resolvent at zeta = exp(i theta); that boundary point sits
    on the x - i0 side of the cut, so rho = -Im R / pi is the psd density.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValueError("theta nodes must lie strictly inside (0, pi)")
    zeta = np.exp(1j * theta)
    R = resolvent_2x2(J, zeta)
    rho = -(R - np.conj(R)) / (2j * np.pi)
    return SpectralDensity(theta, _hermitize(rho))


def orthonormal_polys(side, J, n_max, x):
    """First- and second-kind orthonormal polynomials of the half-line measure.

    Returns arrays P, Q of shape (n_max+1, len(x)) satisfying the three-term
    recurrence of the chosen side with P_0 = 1, Q_0 = 0, Q_1 = 1/p_1 and the
    Wronskian normalization p_{n+1} (P_n Q_{n+1} - P_{n+1} Q_n) = 1.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if side == "plus":
        qs = lambda n: J.q_at(n)
        ps = lambda n: J.p_at(n)
    elif side == "minus":
        qs = lambda n: J.q_at(-n - 1)
        ps = lambda n: J.p_at(-n)
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    P = np.zeros((n_max + 1, x.size), dtype=complex)
    Q = np.zeros_like(P)
    P[0] = 1.0
    if n_max >= 1:
        P[1] = (x - qs(0)) / ps(1)
        Q[1] = 1.0 / ps(1)
    for n in range(1, n_max):
        P[n + 1] = ((x - qs(n)) * P[n] - ps(n) * P[n - 1]) / ps(n + 1)
        Q[n + 1] = ((x - qs(n)) * Q[n] - ps(n) * Q[n - 1]) / ps(n + 1)
    return P, Q


def szego_class_check(density, floor=25.0):
    """Clipped quadrature of log det rho(z(t)) dm; pass iff above -floor.

    dm-average over the circle equals the (1/pi) average over theta in (0, pi)
    by conjugation symmetry.
    """
    det = np.real(np.linalg.det(density.rho))
    det = np.maximum(det, 1e-300)
    logdet = np.maximum(np.log(det), -2.0 * floor)
    value = float(np.mean(logdet))
    return {"value": value, "passed": bool(value > -floor)}
