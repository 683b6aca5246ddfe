"""Analytic characterizations of well-posedness: the Cauchy-type transform
on the band, the resolvent-of-the-band identity and norm inequality, the
matrix A2 quotient with its dyadic scale trend, the weighted Riesz
projection norm, doubling and Poisson-average estimates, and the
three-indicator equivalence panel.

Verdicts about finiteness of suprema are trend-based: a divergent weight is
reported through monotone growth of the quotient along dyadic scales, with
the interval quadrature refining alongside the scale index so that
cutoff-limited singular averages keep growing instead of saturating.
"""

import numpy as np

from .errors import EmptyIntersection, PowerIterationStall
from .harmonic import CircleFunction, CircleGrid
from .hankel import build_hankel, min_singular
from .inverse import (ReflectionInput, density_from_reflection,
                      uniqueness_defect)
from .jacobi import (interior_theta_nodes, orthonormal_polys,
                     spectral_density)

BAND = (-2.0, 2.0)


# ---------------------------------------------------------------------------
# the Cauchy-type transform on E


def frak_h(g_nodes, g_vals, z, side=None):
    """(H g)(z) = int_E g(x)/(z - x) dx by trapezoid over the node set.

    ``g_vals`` may be scalar- or vector-valued along its last axes; the
    quadrature runs over the first axis.  For boundary evaluation pass
    z = x0 real together with side "+"/"-" to get the principal value
    -/+ i pi g(x0); the principal value uses symmetric nodes with the
    singular cell replaced by the analytic value for the local linear
    interpolant.
    """
    x = np.asarray(g_nodes, dtype=float)
    g = np.asarray(g_vals, dtype=complex)
    h = x[1] - x[0]
    if side is None:
        kern = 1.0 / (z - x)
        wts = np.full(x.size, h)
        wts[0] = wts[-1] = h / 2.0
        return np.tensordot(wts * kern, g, axes=(0, 0))
    i0 = int(np.argmin(np.abs(x - z)))
    if abs(x[i0] - z) > 1e-9 * max(abs(z), 1.0):
        raise ValueError("principal-value evaluation requires z on a node")
    pv = _principal_value(x, g, i0, h)
    jump = -1j * np.pi * g[i0] if side == "+" else 1j * np.pi * g[i0]
    return pv + jump


def _principal_value(x, g, i0, h):
    n = x.size
    wts = np.full(n, h)
    wts[0] = wts[-1] = h / 2.0
    kern = np.zeros(n)
    sel = np.ones(n, dtype=bool)
    for j in (i0 - 1, i0, i0 + 1):
        if 0 <= j < n:
            sel[j] = False
    kern[sel] = 1.0 / (x[i0] - x[sel])
    pv = np.tensordot(wts * kern, g, axes=(0, 0))
    # PV over the singular cell of the linear interpolant through the
    # neighbors: the even part integrates to zero, the odd part to
    # -(g_{i+1} - g_{i-1})
    if 1 <= i0 < n - 1:
        pv = pv - (g[i0 + 1] - g[i0 - 1])
    return pv


def frak_h_density_theta(density, fvals, z):
    """(H (rho f))(z) through the angular variable at spectral accuracy.

    ``fvals`` has shape (nodes, 2); the endpoint root singularity of the
    density cancels against dx = -2 sin(theta) d(theta).
    """
    theta = density.theta
    x = density.x_nodes
    integ = np.einsum("nij,nj->ni", density.rho, fvals)
    w = 2.0 * np.sin(theta)
    count = np.pi / (theta[1] - theta[0])
    kern = 1.0 / (z - x)
    return np.tensordot(kern * w, integ, axes=(0, 0)) * np.pi / count


# ---------------------------------------------------------------------------
# identity of the transformed basis vectors and the norm inequality


def _interior_jost(J, zeta, n_need=2):
    """Jost rows at interior points by the same backward recurrences."""
    zeta = np.asarray(zeta, dtype=complex)
    z = zeta + 1.0 / zeta
    out = {}
    for tag, Jop in (("plus", J), ("minus", J.reflected())):
        if Jop.is_free:
            w_lo, w_hi = 0, -1
        else:
            w_lo, w_hi = Jop.n_min, Jop.n_max
        n_hi = max(w_hi, -1) + 2
        n_lo = min(w_lo, 0) - n_need
        rows = {n_hi: zeta ** n_hi, n_hi - 1: zeta ** (n_hi - 1)}
        for n in range(n_hi - 1, n_lo, -1):
            rows[n - 1] = ((z - Jop.q_at(n)) * rows[n]
                           - Jop.p_at(n + 1) * rows[n + 1]) / Jop.p_at(n)
        out[tag] = rows
    return out


def identity_32_check(J, density, f_support, zeta_samples=(0.35j, 0.25 - 0.3j, -0.4 + 0.1j)):
    """Residual of the resolvent-transform identity for a finite vector.

    ``f_support`` maps lattice index -> coefficient.  Both sides are
    evaluated at interior uniformization points: the left side through the
    interior recurrences, the right side as p0 Phi(zeta) applied to the
    Cauchy transform of rho f_hat.
    """
    p0 = J.p_at(0)
    n_pos = [n for n in f_support if n >= 0]
    n_neg = [n for n in f_support if n < 0]
    deg = max([n for n in f_support] + [-n - 1 for n in f_support]) + 1

    x = density.x_nodes
    Pp, Qp = orthonormal_polys("plus", J, deg, x)
    Pm, Qm = orthonormal_polys("minus", J, deg, x)
    fhat = np.zeros((x.size, 2), dtype=complex)
    for n, c in f_support.items():
        if n >= 0:
            fhat[:, 0] += c * (-p0 * Qp[n])
            fhat[:, 1] += c * Pp[n]
        else:
            m = -n - 1
            fhat[:, 0] += c * Pm[m]
            fhat[:, 1] += c * (-p0 * Qm[m])

    worst = 0.0
    for zeta in zeta_samples:
        rows = _interior_jost(J, np.asarray([zeta]))
        lhs = np.zeros(2, dtype=complex)
        for n, c in f_support.items():
            if n < 0:
                lhs[0] += c * rows["minus"][-n - 1][0]
            else:
                lhs[1] += c * rows["plus"][n][0]
        phi = np.array([
            [rows["minus"][-1][0], -rows["minus"][0][0]],
            [-rows["plus"][0][0], rows["plus"][-1][0]]])
        z = zeta + 1.0 / zeta
        hg = frak_h_density_theta(density, fhat, z)
        rhs = p0 * phi @ hg
        scale = max(np.max(np.abs(lhs)), 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst


def inequality_34_estimate(density, trials=20, seed=0, interior_margin=0.15):
    """Best observed constant of the two-sided boundary-value inequality.

    For random compactly supported 2-vector bumps g the ratio
      [int (Hg)* rho^{-1} (Hg)](x-i0) + same at x+i0] / int g* rho^{-1} g
    is sampled; the maximizing bump is retained.
    """
    x = density.x_nodes[::-1].copy()
    rho = density.rho[::-1].copy()
    # resample onto a uniform x grid for the PV rule
    xu = np.linspace(x[0] + interior_margin, x[-1] - interior_margin, 801)
    rho_u = np.empty((xu.size, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            rho_u[:, i, j] = np.interp(xu, x, rho[:, i, j])
    rho_inv = np.linalg.inv(rho_u)

    rng = np.random.default_rng(seed)
    h = xu[1] - xu[0]
    best, best_g = 0.0, None
    for _ in range(trials):
        c = rng.uniform(xu[40], xu[-40])
        wdt = rng.uniform(0.05, 0.4)
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        prof = np.exp(-((xu - c) / wdt) ** 2) * (np.abs(xu - c) < 4 * wdt)
        g = prof[:, None] * amp[None, :]
        denom = _weighted_mass(g, rho_inv, h)
        if denom < 1e-14:
            continue
        num = 0.0
        for side in ("-", "+"):
            hg = np.empty_like(g)
            for i, xi in enumerate(xu):
                hg[i] = frak_h(xu, g, xi, side=side)
            num += _weighted_mass(hg, rho_inv, h)
        ratio = num / denom
        if ratio > best:
            best, best_g = ratio, (c, wdt, amp)
    return {"best_ratio": float(best), "maximizer": best_g}


def _weighted_mass(g, winv, h):
    return float(np.real(np.einsum("ni,nij,nj->", np.conj(g), winv, g)) * h)


# ---------------------------------------------------------------------------
# matrix A2 machinery


class MatrixWeight:
    """Matrix-valued weight on the band.

    Either a node/value table (entrywise linear interpolation between nodes,
    clamped beyond them) or an exact callable x -> (len(x), d, d) array.
    Power-type zeros are only resolved faithfully by the callable form;
    tabulated weights flatten structure below their node spacing.
    """

    def __init__(self, x_nodes, W, band=BAND, func=None):
        self.func = func
        self.band = band
        if func is not None:
            probe = np.asarray(func(np.array([0.5 * sum(band)])))
            self.dim = 1 if probe.ndim == 1 else probe.shape[-1]
            self.x_nodes = None
            self.W = None
            return
        self.x_nodes = np.asarray(x_nodes, dtype=float)
        W = np.asarray(W, dtype=complex)
        if W.ndim == 1:
            W = W[:, None, None]
        self.W = W
        self.dim = W.shape[-1]

    @classmethod
    def from_scalar(cls, x_nodes, values, band=BAND):
        return cls(x_nodes, np.asarray(values, dtype=complex), band)

    @classmethod
    def from_callable(cls, func, band=BAND):
        return cls(None, None, band, func=func)

    @classmethod
    def from_scalar_callable(cls, f, band=BAND):
        return cls(None, None, band,
                   func=lambda x: np.asarray(f(x), dtype=complex)[:, None, None])

    @classmethod
    def from_density(cls, density):
        order = np.argsort(density.x_nodes)
        return cls(density.x_nodes[order], density.rho[order])

    def sample(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.func is not None:
            out = np.asarray(self.func(x), dtype=complex)
            if out.ndim == 1:
                out = out[:, None, None]
        else:
            out = np.empty((x.size, self.dim, self.dim), dtype=complex)
            for i in range(self.dim):
                for j in range(self.dim):
                    out[:, i, j] = np.interp(x, self.x_nodes, self.W[:, i, j])
        return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))

    def min_scale(self):
        """Finest meaningful dyadic scale for tabulated weights."""
        if self.func is not None:
            return 0.0
        return float(np.max(np.diff(self.x_nodes))) * 4.0

    def hermiticity_residual(self):
        if self.func is not None:
            return 0.0
        return float(np.max(np.abs(self.W - np.conj(np.swapaxes(self.W, 1, 2)))))


def _interval_averages(weight, x, delta, n_quad):
    lo = max(x - delta, weight.band[0])
    hi = min(x + delta, weight.band[1])
    if hi <= lo:
        raise EmptyIntersection(f"interval around {x} misses the band")
    mid = lo + (np.arange(n_quad) + 0.5) * (hi - lo) / n_quad
    Wv = weight.sample(mid)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ev, U = np.linalg.eigh(Wv)
        ev_inv = 1.0 / np.maximum(ev, 1e-280)
        Winv = np.einsum("nik,nk,njk->nij", U, ev_inv, np.conj(U))
    cell = (hi - lo) / n_quad
    avg_w = Wv.mean(axis=0) * (hi - lo) / (2.0 * delta)
    avg_winv = Winv.mean(axis=0) * (hi - lo) / (2.0 * delta)
    return avg_w, avg_winv, cell


def _sqrtm_psd(A):
    ev, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    ev = np.maximum(ev, 0.0)
    return (U * np.sqrt(ev)) @ U.conj().T


def a2_quotient(weight, x, delta, n_quad=512):
    """|| <W>^{1/2} <W^{-1}>^{1/2} || over the interval (x-delta, x+delta).

    Averages normalize by the full interval length but integrate only over
    the intersection with the band.
    """
    avg_w, avg_winv, _ = _interval_averages(weight, x, delta, n_quad)
    a = _sqrtm_psd(avg_w)
    b = _sqrtm_psd(avg_winv)
    return float(np.linalg.norm(a @ b, 2))


class A2Report:
    def __init__(self, Q, table, scale_trend, scales, centers, divergent):
        self.Q = float(Q)
        self.table = table
        self.scale_trend = scale_trend
        self.scales = scales
        self.centers = centers
        self.divergent = bool(divergent)


def q2e(weight, n_scales=7, centers=None, base_quad=128, growth_ratio=1.5):
    """Sup of the interval quotient over a (center, dyadic scale) lattice.

    scale_trend[k] is the sup at delta = 2^{-k}; the per-interval quadrature
    count doubles with k so that non-integrable pointwise inverses keep
    growing along the trend instead of saturating at a fixed cutoff.
    Divergence is judged center by center (the global max wanders between
    quadrature near-hits): some center must grow monotonically over the last
    four scales with total growth >= ``growth_ratio`` across the final three
    steps.
    """
    if centers is None:
        centers = np.linspace(weight.band[0], weight.band[1], 41)
    scales = [2.0 ** (-k) for k in range(n_scales)]
    table = np.zeros((len(scales), len(centers)))
    for k, delta in enumerate(scales):
        nq = base_quad * 2 ** k
        for i, c in enumerate(centers):
            table[k, i] = a2_quotient(weight, c, delta, n_quad=nq)
    trend = table.max(axis=1)
    divergent = False
    if len(scales) >= 4:
        for i in range(len(centers)):
            tail = table[-4:, i]
            # quotients still below the interior lower bound 1 are only
            # recovering from boundary truncation, not diverging
            if (tail[0] >= 1.0 and np.all(np.diff(tail) > 0)
                    and tail[-1] >= growth_ratio * tail[0]):
                divergent = True
                break
    return A2Report(trend.max(), table, trend, scales, np.asarray(centers), divergent)


def weighted_projection_norm(weight, window_half_width=4.0, grid_n=2048,
                             iters=30, stall_tol=1e-6, seed=0):
    """Operator norm estimate of chi_E W^{1/2} P_+ W^{-1/2} chi_E.

    P_+ is the positive-frequency projection realized by FFT on a periodized
    window; W is extended by the identity off the band.  Power iteration on
    T*T runs for ``iters`` steps or until the Rayleigh quotient stagnates;
    if it never stagnates the best estimate is returned with a flag.
    """
    L = float(window_half_width)
    xs = -L + (np.arange(grid_n) + 0.5) * (2 * L / grid_n)
    on_band = (xs >= weight.band[0]) & (xs <= weight.band[1])
    Wv = np.tile(np.eye(weight.dim, dtype=complex), (grid_n, 1, 1))
    Wv[on_band] = weight.sample(xs[on_band])
    ev, U = np.linalg.eigh(Wv)
    ev = np.maximum(ev.real, 1e-280)
    sq = np.einsum("nik,nk,njk->nij", U, np.sqrt(ev), np.conj(U))
    isq = np.einsum("nik,nk,njk->nij", U, 1.0 / np.sqrt(ev), np.conj(U))

    freqs = np.fft.fftfreq(grid_n)
    proj = (freqs > 0).astype(float)
    proj[0] = 0.5

    def P(v):
        return np.fft.ifft(proj[:, None] * np.fft.fft(v, axis=0), axis=0)

    chi = on_band[:, None]

    def T(v):
        u = np.einsum("nij,nj->ni", isq, v * chi)
        return chi * np.einsum("nij,nj->ni", sq, P(u))

    def Tstar(v):
        u = np.einsum("nij,nj->ni", sq, v * chi)
        return chi * np.einsum("nij,nj->ni", isq, P(u))

    rng = np.random.default_rng(seed)
    v = rng.normal(size=(grid_n, weight.dim)) + 1j * rng.normal(size=(grid_n, weight.dim))
    v *= chi
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    stalled = True
    for _ in range(iters):
        w = Tstar(T(v))
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return {"norm": 0.0, "stalled": False}
        v = w / lam
        if abs(lam - lam_prev) <= stall_tol * max(lam, 1e-30):
            stalled = False
            break
        lam_prev = lam
    return {"norm": float(np.sqrt(lam)), "stalled": stalled}


def interval_mass(weight, x, delta, n_quad=512):
    """Non-normalized integral of W over (x-delta, x+delta) intersected with E."""
    avg_w, _, _ = _interval_averages(weight, x, delta, n_quad)
    return avg_w * (2.0 * delta)


def doubling_check(weight, x, delta, lam=2.0, Q=None, eta=1.0, n_quad=512,
                   tol=1e-9):
    """psd inequality W(lam I) >= (1 + eta^2/(lam^2 Q^2)) W(I)."""
    if Q is None:
        Q = q2e(weight, n_scales=4).Q
    big = interval_mass(weight, x, lam * delta, n_quad)
    small = interval_mass(weight, x, delta, n_quad)
    c = 1.0 + eta ** 2 / (lam ** 2 * Q ** 2)
    gap = np.linalg.eigvalsh(big - c * small)
    return {"holds": bool(gap.min() >= -tol * max(1.0, np.abs(big).max())),
            "min_gap": float(gap.min()), "Q": float(Q)}


def poisson_average(weight, z0, n_quad=4096):
    """<W>_{z0} = (1/pi) int_E W(x) Im z0 / |x - z0|^2 dx."""
    lo, hi = weight.band
    xs = lo + (np.arange(n_quad) + 0.5) * (hi - lo) / n_quad
    Wv = weight.sample(xs)
    kern = (z0.imag / np.abs(xs - z0) ** 2) / np.pi
    return np.einsum("n,nij->ij", kern, Wv) * (hi - lo) / n_quad


def poisson_vs_interval_check(weight, x, delta, Q=None, eta=1.0, lam=2.0,
                              tol=1e-9):
    """Poisson average at the square center against the interval average,
    with the constant from the dyadic geometric-series bound:
    C = (2 lam^2 Q^2 / pi) (1 + lam^2 Q^2 / eta^2)."""
    if Q is None:
        Q = q2e(weight, n_scales=4).Q
    z0 = x + 1j * delta
    pavg = poisson_average(weight, z0)
    iavg = interval_mass(weight, x, delta) / (2.0 * delta)
    C = (2.0 * lam ** 2 * Q ** 2 / np.pi) * (1.0 + lam ** 2 * Q ** 2 / eta ** 2)
    gap = np.linalg.eigvalsh(C * iavg - pavg)
    return {"holds": bool(gap.min() >= -tol * max(1.0, np.abs(pavg).max())),
            "min_gap": float(gap.min()), "C": float(C), "Q": float(Q)}


def density_weight_from_operator(J, edge_eps=1e-9):
    """Spectral density of a Jacobi operator as an exact callable weight."""
    def rho_at(x):
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)),
                    -2.0 + edge_eps, 2.0 - edge_eps)
        theta = np.arccos(x / 2.0)
        return spectral_density(J, theta).rho
    return MatrixWeight.from_callable(rho_at)


# ---------------------------------------------------------------------------
# the equivalence panel


def theorem04_panel(source, grid=None, trunc=256, m_ladder=(64, 128, 256),
                    eps_ladder=(1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12), tol_defect=1e-6,
                    n_scales=7, minsing_floor=0.01):
    """Three-indicator panel: A2 trend of the spectral density, invertibility
    trend of both metric operators, and the uniqueness defects.

    ``source`` is either a Jacobi operator (forward pipeline) or a
    ReflectionInput (inverse pipeline).  The verdict compares the A2 side
    against (unique AND invertible); disagreement is flagged as a numerical
    resolution warning, never reconciled.
    """
    from .forward import forward_pipeline  # local import avoids a cycle
    from .inverse import density_weight_callable

    if grid is None:
        grid = CircleGrid(1024)

    if isinstance(source, ReflectionInput):
        refl = source
        rho_at, _ = density_weight_callable(refl, trunc=trunc, eps_ladder=eps_ladder)
        weight = MatrixWeight.from_callable(rho_at)
    else:
        jost, sm = forward_pipeline(source, grid)
        refl = ReflectionInput(sm.s_plus)
        weight = density_weight_from_operator(source)

    a2 = q2e(weight, n_scales=n_scales)

    trends = {}
    invertible = True
    for tag, sym in (("plus", refl.s_plus), ("minus", refl.s_minus)):
        # strip tiny imaginary parts before the symmetry gate
        symr = CircleFunction(sym.grid, sym.values)
        ladder = [min_singular(build_hankel(symr, 0, m, sym_tol=1e-6)) for m in m_ladder]
        vals = [entry["value"] for entry in ladder]
        trends[tag] = vals
        invertible = invertible and (min(vals) >= minsing_floor
                                     and vals[-1] >= 0.5 * vals[0])

    defects = uniqueness_defect(refl, trunc=trunc, m_ladder=m_ladder,
                                eps_ladder=eps_ladder, tol=tol_defect)
    unique = defects["unique"]
    a2_finite = not a2.divergent
    coherent = a2_finite == (unique and invertible)
    return {
        "a2_trend": [float(v) for v in a2.scale_trend],
        "a2_divergent": a2.divergent,
        "min_singular_trends": trends,
        "invertible": bool(invertible),
        "defect_plus": defects["defect_plus"],
        "defect_minus": defects["defect_minus"],
        "unique": bool(unique),
        "coherent": bool(coherent),
        "warning": None if coherent else "indicators disagree at this resolution",
    }
