"""Direct scattering for finite-window Jacobi operators.

Jost solutions are built by exact backward recurrences seeded with monomials
t^n in the free region; the scattering triple (s, s_plus, s_minus) is read
off the left free region, where e_plus(n) = A t^n + B t^{-n}.  All algebra
is exact for finitely supported perturbations, so residual gates sit at
roundoff scale.
"""

import numpy as np

from .errors import OffIntervalSpectrum, DegenerateFreeSolve, ConsistencyFailure
from .harmonic import (CircleFunction, CircleGrid, OuterFunction, analyze,
                       constant, monomial, outer_from_modulus, star, synthesize)
from .jacobi import JacobiOperator, has_off_interval_spectrum, spectral_density


class JostFamily:
    """Generalized eigenvectors e_plus(n, .), e_minus(n, .) on a circle grid.

    e_plus rows cover n in [n_lo, n_hi]; e_minus rows cover the mirrored
    index range [m_lo, m_hi], where e_minus(m, .) solves the reflected
    recurrence and equals t^m in its own free region.
    """

    def __init__(self, grid, J, n_lo, n_hi, e_plus, m_lo, m_hi, e_minus):
        self.grid = grid
        self.J = J
        self.n_lo, self.n_hi = n_lo, n_hi
        self.m_lo, self.m_hi = m_lo, m_hi
        self._ep = e_plus
        self._em = e_minus

    def e_plus(self, n):
        if not (self.n_lo <= n <= self.n_hi):
            raise IndexError(f"e_plus index {n} outside [{self.n_lo}, {self.n_hi}]")
        return CircleFunction(self.grid, self._ep[n - self.n_lo])

    def e_minus(self, m):
        if not (self.m_lo <= m <= self.m_hi):
            raise IndexError(f"e_minus index {m} outside [{self.m_lo}, {self.m_hi}]")
        return CircleFunction(self.grid, self._em[m - self.m_lo])


def _backward_rows(vals_z, p_at, q_at, n_lo, n_hi):
    """Rows e(n) for n in [n_lo, n_hi], seeded e(n) = t^n at the top two."""
    t = vals_z["t"]
    z = vals_z["z"]
    count = n_hi - n_lo + 1
    rows = np.empty((count, t.size), dtype=complex)
    rows[-1] = t ** n_hi
    rows[-2] = t ** (n_hi - 1)
    for n in range(n_hi - 1, n_lo, -1):
        i = n - n_lo
        rows[i - 1] = ((z - q_at(n)) * rows[i] - p_at(n + 1) * rows[i + 1]) / p_at(n)
    return rows


def jost_solutions(J, grid, margin=2, check_spectrum=True):
    """Jost families for both spatial infinities.

    Raises OffIntervalSpectrum when a dense truncation certifies spectrum
    outside [-2, 2]; shallow states invisible to the truncation are caught
    later by the transmission-denominator zero test in extract_scattering.
    """
    if check_spectrum and has_off_interval_spectrum(J):
        raise OffIntervalSpectrum("operator has eigenvalues outside [-2, 2]")
    if J.is_free:
        w_lo, w_hi = 0, -1
    else:
        w_lo, w_hi = J.n_min, J.n_max

    t = grid.points
    vz = {"t": t, "z": t + 1.0 / t}

    n_hi = max(w_hi, -1) + margin
    n_lo = min(w_lo, 0) - margin
    ep = _backward_rows(vz, J.p_at, J.q_at, n_lo, n_hi)

    Jr = J.reflected()
    if Jr.is_free:
        r_lo, r_hi = 0, -1
    else:
        r_lo, r_hi = Jr.n_min, Jr.n_max
    m_hi = max(r_hi, -1) + margin
    m_lo = min(r_lo, 0) - margin
    em = _backward_rows(vz, Jr.p_at, Jr.q_at, m_lo, m_hi)

    return JostFamily(grid, J, n_lo, n_hi, ep, m_lo, m_hi, em)


def recurrence_residual(jost):
    """Max pointwise defect of the three-term recurrence over interior rows."""
    g = jost.grid
    z = g.points + 1.0 / g.points
    J = jost.J
    worst = 0.0
    for n in range(jost.n_lo + 1, jost.n_hi):
        lhs = z * jost.e_plus(n).values
        rhs = (J.p_at(n) * jost.e_plus(n - 1).values
               + J.q_at(n) * jost.e_plus(n).values
               + J.p_at(n + 1) * jost.e_plus(n + 1).values)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def wronskian_residual(jost):
    """Deviation of t^-1 p_n {e(n,t) e(n-1, conj t) - e(n-1,t) e(n, conj t)}
    from z'(t), uniformly over n and the grid."""
    g = jost.grid
    t = g.points
    zp = 1.0 - t ** (-2)
    ci = g.conj_index
    J = jost.J
    worst = 0.0
    for n in range(jost.n_lo + 1, jost.n_hi + 1):
        en = jost.e_plus(n).values
        em1 = jost.e_plus(n - 1).values
        w = (1.0 / t) * J.p_at(n) * (en * em1[ci] - em1 * en[ci])
        worst = max(worst, float(np.max(np.abs(w - zp))))
    return worst


class ScatteringMatrix:
    """The unitary triple (s, s_plus, s_minus) on the circle."""

    def __init__(self, s, s_plus, s_minus, flagged_nodes=()):
        self.s = s                  # OuterFunction
        self.s_plus = s_plus        # CircleFunction
        self.s_minus = s_minus      # CircleFunction
        self.flagged_nodes = tuple(flagged_nodes)

    def invariant_report(self):
        sb = self.s.boundary
        unit_plus = (np.abs(sb.values) ** 2 + np.abs(self.s_plus.values) ** 2) - 1.0
        unit_minus = (np.abs(sb.values) ** 2 + np.abs(self.s_minus.values) ** 2) - 1.0
        compat = (np.conj(self.s_plus.values) * sb.values
                  + np.conj(sb.values) * self.s_minus.values)
        sym = max(_symmetry_residual(sb), _symmetry_residual(self.s_plus),
                  _symmetry_residual(self.s_minus))
        return {
            "unitarity_plus": float(np.max(np.abs(unit_plus))),
            "unitarity_minus": float(np.max(np.abs(unit_minus))),
            "compatibility": float(np.max(np.abs(compat))),
            "symmetry": sym,
            "s_at_zero": self.s.value_at_zero,
        }

    def matrix_values(self):
        """S(t) = [[s_-, s], [s, s_+]](t), shape (N, 2, 2)."""
        n = self.s_plus.grid.n_samples
        S = np.empty((n, 2, 2), dtype=complex)
        S[:, 0, 0] = self.s_minus.values
        S[:, 0, 1] = self.s.boundary.values
        S[:, 1, 0] = self.s.boundary.values
        S[:, 1, 1] = self.s_plus.values
        return S


def _symmetry_residual(f):
    scale = max(f.linf(), 1.0)
    return float(np.max(np.abs(f.coeffs.imag)) / scale)


def _laurent_roots(f, tol=1e-11):
    """Roots of a grid function that is secretly a Laurent polynomial."""
    c = f.coeffs
    scale = np.max(np.abs(c))
    nz = np.nonzero(np.abs(c) > tol * scale)[0]
    lo, hi = nz[0], nz[-1]
    poly = c[lo:hi + 1]
    if poly.size <= 1:
        return np.array([], dtype=complex)
    return np.roots(poly[::-1])


def transmission_denominator_roots(jost):
    """Zeros of the Laurent polynomial D_A; zeros inside the disk mark
    bound states, zeros just outside mark near-threshold resonances."""
    n = jost.n_lo
    t = jost.grid.points
    da = (jost.e_plus(n).values * t ** (-(n + 1))
          - jost.e_plus(n + 1).values * t ** (-n))
    return _laurent_roots(CircleFunction(jost.grid, da))


def extract_scattering(jost, bound_state_margin=1e-6, check_roots=True):
    """Solve the left-free-region system for (s, s_minus) and derive s_plus.

    In the left free region e_plus(n) = A t^n + B t^{-n}; with the pair
    (n, n+1) the solve reduces to the exact rational forms
        s = (t^{-1} - t)/D_A,   s_minus = t D_B / D_A,
        s_plus = conj(t D_B)/D_A,
    where D_A, D_B are Laurent polynomials in the Jost values.  Nodes where
    D_A nearly vanishes (t near +-1 for free-like data) are filled by
    neighbor interpolation and flagged.
    """
    g = jost.grid
    t = g.points
    n = jost.n_lo
    ep_n = jost.e_plus(n).values
    ep_n1 = jost.e_plus(n + 1).values
    da = ep_n * t ** (-(n + 1)) - ep_n1 * t ** (-n)
    db = ep_n1 * t ** n - ep_n * t ** (n + 1)
    det = 1.0 / t - t

    if check_roots:
        roots = transmission_denominator_roots(jost)
        inside = np.abs(roots) < 1.0 - bound_state_margin
        if np.any(inside):
            raise OffIntervalSpectrum(
                f"transmission denominator has {int(np.sum(inside))} zero(s) "
                "inside the disk (bound states)")

    scale = np.max(np.abs(da))
    bad = np.abs(da) < 1e-12 * scale
    flagged = np.nonzero(bad)[0]
    if flagged.size > 4:
        raise DegenerateFreeSolve(f"{flagged.size} degenerate nodes in free solve")

    with np.errstate(divide="ignore", invalid="ignore"):
        s_vals = det / da
        sm_vals = t * db / da
        sp_vals = np.conj(t * db) / da
    for j in flagged:
        for arr in (s_vals, sm_vals, sp_vals):
            arr[j] = _interp_node(arr, j)

    s_plus = CircleFunction(g, sp_vals)
    s_minus = CircleFunction(g, sm_vals)
    boundary = CircleFunction(g, s_vals)
    half = g.n_samples // 2
    value_at_zero = float(boundary.coeffs[half].real)
    if value_at_zero <= 0:
        raise OffIntervalSpectrum("extracted transmission has s(0) <= 0")
    s = OuterFunction(boundary, value_at_zero)
    return ScatteringMatrix(s, s_plus, s_minus, flagged)


def _interp_node(arr, j):
    # 6-point central Lagrange fill, O(h^6) for smooth neighbors
    n = arr.size
    s1 = arr[(j - 1) % n] + arr[(j + 1) % n]
    s2 = arr[(j - 2) % n] + arr[(j + 2) % n]
    s3 = arr[(j - 3) % n] + arr[(j + 3) % n]
    return (15.0 * s1 - 6.0 * s2 + s3) / 20.0


def outer_agreement_residual(sm, log_floor=50.0):
    """Relative gap between extracted s and the outer function rebuilt from
    the modulus sqrt(1 - |s_plus|^2)."""
    g = sm.s_plus.grid
    w = CircleFunction(g, np.sqrt(np.maximum(1.0 - np.abs(sm.s_plus.values) ** 2, 0.0)))
    rebuilt = outer_from_modulus(w, log_floor=log_floor)
    ref = sm.s.boundary.values
    keep = np.abs(ref) > 1e-6
    rel = np.abs(rebuilt.boundary.values[keep] - ref[keep]) / np.abs(ref[keep])
    gap0 = abs(rebuilt.value_at_zero - sm.s.value_at_zero) / sm.s.value_at_zero
    return max(float(np.max(rel)), gap0)


def scattering_asymptotics_residual(jost, sm):
    """Exactness of s e_plus(n) = t^n + s_minus t^{-n-1} in the left free region."""
    g = jost.grid
    t = g.points
    s = sm.s.boundary.values
    worst = 0.0
    for n in range(jost.n_lo, min(jost.J.n_min if not jost.J.is_free else 0, 0)):
        resid = s * jost.e_plus(n).values - t ** n - sm.s_minus.values * t ** (-n - 1)
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def duality_residual(jost, sm):
    """Pointwise defect of s e_mp(0) = star-coupled e_pm(-1) relations."""
    g = jost.grid
    ci = g.conj_index
    t = g.points
    s = sm.s.boundary.values
    worst = 0.0
    pairs = [
        (jost.e_minus(0).values, jost.e_plus(-1).values, sm.s_plus.values),
        (jost.e_plus(0).values, jost.e_minus(-1).values, sm.s_minus.values),
        (jost.e_minus(-1).values, jost.e_plus(0).values, sm.s_plus.values),
        (jost.e_plus(-1).values, jost.e_minus(0).values, sm.s_minus.values),
    ]
    for lhs, rhs, refl in pairs:
        resid = s * lhs - (1.0 / t) * rhs[ci] - refl * rhs
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def _phi_matrix(jost, tilde=False):
    n = jost.grid.n_samples
    M = np.empty((n, 2, 2), dtype=complex)
    M[:, 0, 0] = jost.e_minus(-1).values
    M[:, 1, 1] = jost.e_plus(-1).values
    if tilde:
        M[:, 0, 1] = -jost.e_plus(0).values
        M[:, 1, 0] = -jost.e_minus(0).values
    else:
        M[:, 0, 1] = -jost.e_minus(0).values
        M[:, 1, 0] = -jost.e_plus(0).values
    return M


def jump_relation_check(jost, sm):
    """Residuals of the boundary jump t^-1 Phi(conj t) = -S(t) Phi(t) and of
    the conjugation symmetry Phi_tilde(conj t) = Phi(t)^*."""
    g = jost.grid
    ci = g.conj_index
    tbar = np.conj(g.points)
    phi = _phi_matrix(jost, tilde=False)
    phit = _phi_matrix(jost, tilde=True)
    S = sm.matrix_values()
    lhs = tbar[:, None, None] * phi[ci]
    rhs = -np.einsum("nij,njk->nik", S, phi)
    mask = np.ones(g.n_samples, dtype=bool)
    for j in sm.flagged_nodes:
        mask[j] = False
    jump = float(np.max(np.abs(lhs - rhs)[mask]))
    conj_sym = float(np.max(np.abs(phit[ci] - np.conj(np.swapaxes(phi, 1, 2)))))
    return {"jump": jump, "conjugation": conj_sym}


def density_scattering_consistency(J, jost, sm, guard=2, raise_on_fail=False,
                                   tol=1e-6):
    """Cross-check the Weyl-function density against the Jost-matrix forms.

    Verifies det{2 pi p0 rho(z(t))} = |s(t)|^2 and the matrix identity
    2 pi p0^2 rho = Phi_tilde^{-1*} Phi_tilde^{-1} |z'| at interior grid
    nodes; the two sides come from independent pipelines.
    """
    g = jost.grid
    N = g.n_samples
    idx = np.arange(guard + 1, N // 2 - guard)
    theta = g.theta[idx]
    dens = spectral_density(J, theta)
    p0 = J.p_at(0)

    det_lhs = np.real(np.linalg.det(2.0 * np.pi * p0 * dens.rho))
    s_abs2 = np.abs(sm.s.boundary.values[idx]) ** 2
    det_resid = float(np.max(np.abs(det_lhs - s_abs2) / np.maximum(s_abs2, 1e-12)))

    phit = _phi_matrix(jost, tilde=True)[idx]
    zp = np.abs(1.0 - g.points[idx] ** (-2))
    inv = np.linalg.inv(phit)
    rhs = np.einsum("nji,njk->nik", np.conj(inv), inv) * zp[:, None, None]
    lhs = 2.0 * np.pi * p0 * p0 * dens.rho
    scale = np.maximum(np.abs(lhs), 1e-12)
    mat_resid = float(np.max(np.abs(lhs - rhs) / scale))

    report = {"det_residual": det_resid, "matrix_residual": mat_resid,
              "nodes": len(idx), "passed": bool(det_resid <= tol and mat_resid <= tol)}
    if raise_on_fail and not report["passed"]:
        raise ConsistencyFailure("density/scattering mismatch", table=report)
    return report


def forward_pipeline(J, grid, **kwargs):
    """Convenience: jost_solutions + extract_scattering."""
    jost = jost_solutions(J, grid, **kwargs)
    return jost, extract_scattering(jost)
