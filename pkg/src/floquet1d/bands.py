"""Band structure: the intervals where a multiplier branch stays on the
unit circle, with refined edges and a quasimomentum parametrization.

A band of branch k is a maximal closed mu-interval with |rho_k(mu)| = 1.
On its interior rho_k(mu) = e^{it} defines a strictly monotone map
mu(t); generic edges carry rho = +-1 with Delta = dDelta/drho = 0.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, least_squares

from .errors import ComputationError
from .monodromy import char_poly, monodromy

TWO_PI = 2.0 * np.pi


@dataclass
class EdgePoint:
    mu: float
    rho: complex
    t: float
    degenerate: bool          # dDelta/drho = 0 confirmed (true edge)
    truncated: bool = False   # artifact of the computed mu-range


@dataclass
class Band:
    k: int                    # branch index, 0-based
    j: int                    # ordinal along the branch, 0-based
    mu_interval: tuple
    t_interval: tuple         # subset of [0, pi] or of [pi, 2 pi]
    orientation: int          # sign of d mu / d t on the interior
    edge_points: tuple        # (left, right) in mu
    degenerate: bool = False  # single-point band
    truncated: bool = False   # clipped by the computed mu-range

    @property
    def width(self):
        return self.mu_interval[1] - self.mu_interval[0]

    def contains(self, mu, pad=0.0):
        return self.mu_interval[0] - pad <= mu <= self.mu_interval[1] + pad


@dataclass
class BandMesh:
    band: Band
    t: np.ndarray             # Gauss-Legendre nodes in the t-interval
    mu: np.ndarray
    dmu_dt: np.ndarray
    gl_weights: np.ndarray    # already scaled by the interval half-width


@dataclass
class BandAtlas:
    bands: list
    exceptional_t: np.ndarray
    spectrum: list            # merged (lo, hi) intervals

    def bands_of_branch(self, k):
        return [b for b in self.bands if b.k == k]

    def covering(self, mu, pad=0.0):
        return [b for b in self.bands if b.contains(mu, pad)]


class _DeltaCache:
    """Characteristic polynomial of U(mu) with memoized ODE solves."""

    def __init__(self, sf, tol):
        self.sf = sf
        self.tol = tol
        self._store = {}

    def at(self, mu):
        mu = float(mu)
        cp = self._store.get(mu)
        if cp is None:
            cp = char_poly(monodromy(self.sf, mu, tol=self.tol))
            self._store[mu] = cp
        return cp

    def delta(self, mu, rho):
        return self.at(mu).delta(rho)

    def delta_mu(self, mu, rho):
        return self.at(mu).delta_mu(rho)

    def delta_rho(self, mu, rho):
        return self.at(mu).delta_rho(rho)

    def scale(self, mu):
        return max(1.0, np.max(np.abs(self.at(mu).A)))


def _expanding_bracket(f, x0, h0, hmax, side):
    """Search for a sign change of f on [x0, x0 + side*h] with growing h."""
    f0 = f(x0)
    h = h0
    while h <= hmax * 1.0001:
        x1 = x0 + side * h
        f1 = f(x1)
        if f0 * f1 < 0:
            return (x0, x1) if x1 > x0 else (x1, x0)
        h *= 2.0
    return None


def _refine_pm1_edge(dc, bracket, s, inner_sign=0):
    """Polish an edge where the multiplier meets s = +-1.

    Tries a plain root of Delta(mu, s) on the bracket; if the sign does
    not change (double root: bands touching, or a gap narrower than the
    sampling), locates the extremum via dDelta/dmu and then looks for a
    micro-gap around it.

    Returns (mu_left, mu_right): equal when the edge is a touching
    point, distinct when a narrow open gap was resolved.
    """
    a, b = bracket
    f = lambda m: float(np.real(dc.delta(m, s)))
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a, a
    if fb == 0.0:
        return b, b
    if fa * fb < 0:
        mu = brentq(f, a, b, xtol=1e-13, rtol=8.9e-16)
        return mu, mu
    # no sign change: Delta(., s) has an extremum grazing zero inside
    g = lambda m: float(np.real(dc.delta_mu(m, s)))
    ga, gb = g(a), g(b)
    if ga * gb < 0:
        mu0 = brentq(g, a, b, xtol=1e-13, rtol=8.9e-16)
    else:
        # fall back to a scan for the extremum
        ms = np.linspace(a, b, 17)
        mu0 = ms[np.argmin([abs(f(m)) for m in ms])]
    h0 = max(1e-12, 1e-9 * max(abs(mu0), 1.0))
    left = _expanding_bracket(f, mu0, h0, mu0 - a, -1.0)
    right = _expanding_bracket(f, mu0, h0, b - mu0, +1.0)
    if left and right:
        lo = brentq(f, *left, xtol=1e-13, rtol=8.9e-16)
        hi = brentq(f, *right, xtol=1e-13, rtol=8.9e-16)
        return lo, hi
    return mu0, mu0


def _refine_free_edge(dc, mu_guess, t_guess):
    """Edge with |rho| = 1 but rho != +-1: solve Delta = Delta'_rho = 0."""
    def resid(z):
        mu, t = z
        rho = np.exp(1j * t)
        d = dc.delta(mu, rho)
        dr = dc.delta_rho(mu, rho)
        return [d.real, d.imag, dr.real, dr.imag]
    sol = least_squares(resid, [mu_guess, t_guess], xtol=1e-14, ftol=1e-14)
    if not sol.success:
        raise ComputationError(
            f"edge refinement failed near mu={mu_guess}")
    return float(sol.x[0]), float(sol.x[1])


def _edge_is_genuine(dc, mu, rho, scale_tol=1e-6):
    cp = dc.at(mu)
    sc = dc.scale(mu)
    return (abs(cp.delta(rho)) <= scale_tol * sc
            and abs(cp.delta_rho(rho)) <= 1e-4 * sc)


def _nearest_pm1(rho):
    return 1.0 if abs(rho - 1.0) <= abs(rho + 1.0) else -1.0


def detect_bands(table, sf, tol=1e-7, edge_tol=1e-10, ode_tol=None):
    """Assemble the band atlas from a tracked BranchTable.

    Scans | |rho_k| - 1 | < tol for candidate runs, splits runs at
    interior multiples of pi of the unwrapped phase (touching bands or
    unresolved narrow gaps), and refines every edge.
    """
    if table.log_rho is None:
        raise ValueError("BranchTable must carry unwrapped log_rho")
    mu = table.mu_grid
    n2 = table.rho.shape[0]
    dc = _DeltaCache(sf, ode_tol or 1e-11)
    bands = []
    exc_t = {0.0, np.pi, TWO_PI}

    for k in range(n2):
        logmod = table.log_rho[k].real
        phase = table.log_rho[k].imag
        inside = np.abs(logmod) < tol
        runs = _runs(inside)
        segments = []   # (mu_lo, mu_hi, phi_lo, phi_hi, trunc_lo, trunc_hi)
        for i0, i1 in runs:
            if i0 == i1:
                # isolated point with |rho| = 1: a single-point band
                segments.append((mu[i0], mu[i0], phase[i0], phase[i0],
                                 False, False))
                continue
            # edge refinement at both ends of the run
            lo_cut = _resolve_end(dc, table, k, i0, -1, tol)
            hi_cut = _resolve_end(dc, table, k, i1, +1, tol)
            # interior splits where the phase crosses a multiple of pi
            cuts = [lo_cut]
            for i in range(i0, i1):
                pa, pb = phase[i], phase[i + 1]
                lo_m = int(np.ceil(min(pa, pb) / np.pi - 1e-12))
                hi_m = int(np.floor(max(pa, pb) / np.pi + 1e-12))
                for m in range(lo_m, hi_m + 1):
                    tgt = m * np.pi
                    if not (min(pa, pb) < tgt < max(pa, pb)):
                        continue
                    s = 1.0 if m % 2 == 0 else -1.0
                    ml, mr = _refine_pm1_edge(dc, (mu[i], mu[i + 1]), s)
                    cuts.append((ml, mr, tgt, False))
            cuts.append(hi_cut)
            cuts.sort(key=lambda c: c[0])
            for (cl, cr, pl, tl), (nl, nr, pr, tr) in zip(cuts, cuts[1:]):
                if nl <= cr:
                    continue
                segments.append((cr, nl, pl, pr, tl, tr))
        j = 0
        for mu_lo, mu_hi, phi_lo, phi_hi, tr_lo, tr_hi in segments:
            band = _assemble_band(dc, table, k, j, mu_lo, mu_hi,
                                  phi_lo, phi_hi, tr_lo, tr_hi)
            bands.append(band)
            for ep in band.edge_points:
                if not ep.truncated:
                    exc_t.add(float(ep.t))
            j += 1

    bands.sort(key=lambda b: (b.k, b.mu_interval[0]))
    spectrum = spectrum_union_intervals([b.mu_interval for b in bands])
    uniq = []
    for t in sorted(exc_t):
        if not uniq or t - uniq[-1] > 1e-9:
            uniq.append(t)
    return BandAtlas(bands, np.array(uniq), spectrum)


def _runs(mask):
    runs = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def _resolve_end(dc, table, k, idx, side, tol):
    """Refine the outer edge of a run; side = -1 left, +1 right.

    Returns (mu_l, mu_r, phase, truncated) with mu_l = mu_r at the edge.
    """
    mu = table.mu_grid
    phase = table.log_rho[k].imag
    logmod = table.log_rho[k].real
    last = len(mu) - 1
    nb = idx + side
    if nb < 0 or nb > last:
        # run touches the computed range: genuine edge only if the
        # characteristic conditions already hold at the boundary
        rho_b = table.rho[k, idx]
        s = _nearest_pm1(rho_b)
        genuine = abs(rho_b - s) < 1e-6 and _edge_is_genuine(dc, mu[idx], s)
        ph = np.pi * round(phase[idx] / np.pi) if genuine else phase[idx]
        return (mu[idx], mu[idx], ph, not genuine)
    # bracket between the last inside point and the first outside one
    a, b = (mu[nb], mu[idx]) if side < 0 else (mu[idx], mu[nb])
    # generic edge: the phase terminates at the next multiple of pi in
    # the direction it was moving
    p_in = phase[idx]
    p_nb = phase[idx - side]   # neighbor inside the run
    if p_in >= p_nb:
        m = int(np.ceil(p_in / np.pi - 1e-6))
    else:
        m = int(np.floor(p_in / np.pi + 1e-6))
    s = 1.0 if m % 2 == 0 else -1.0
    ml, mr = _refine_pm1_edge(dc, (a, b), s)
    edge_mu = mr if side < 0 else ml
    if abs(dc.delta(edge_mu, s)) <= 1e-6 * dc.scale(edge_mu):
        return (edge_mu, edge_mu, m * np.pi, False)
    # non-generic: the branch leaves the circle away from +-1
    mu_e, t_e = _refine_free_edge(dc, 0.5 * (a + b), p_in)
    if abs(dc.delta(mu_e, np.exp(1j * t_e))) > 1e-6 * dc.scale(mu_e):
        raise ComputationError(
            f"band edge refinement failed on bracket [{a}, {b}] "
            f"(branch {k})")
    return (mu_e, mu_e, t_e, False)


def _assemble_band(dc, table, k, j, mu_lo, mu_hi, phi_lo, phi_hi,
                   tr_lo, tr_hi):
    degenerate = (mu_hi - mu_lo) <= 1e-12 * max(1.0, abs(mu_lo))
    # shift the phase interval by a multiple of 2 pi into [0, 2 pi]
    lo_p, hi_p = min(phi_lo, phi_hi), max(phi_lo, phi_hi)
    if degenerate:
        shift = TWO_PI * np.floor(lo_p / TWO_PI + 1e-12)
    else:
        mid = 0.5 * (lo_p + hi_p)
        shift = TWO_PI * np.floor(mid / TWO_PI)
    t_lo, t_hi = lo_p - shift, hi_p - shift
    orientation = 0
    if not degenerate:
        # mu runs from mu_lo to mu_hi while the phase goes phi_lo -> phi_hi
        orientation = 1 if phi_hi > phi_lo else -1
    eps = [
        _make_edge(dc, mu_lo, phi_lo - shift, tr_lo),
        _make_edge(dc, mu_hi, phi_hi - shift, tr_hi),
    ]
    return Band(k, j, (float(mu_lo), float(mu_hi)),
                (float(t_lo), float(t_hi)), orientation, tuple(eps),
                degenerate=degenerate, truncated=(tr_lo or tr_hi))


def _make_edge(dc, mu_e, t_e, truncated):
    rho_e = np.exp(1j * t_e)
    if abs(rho_e.real) > 1 - 1e-9:
        rho_e = complex(np.sign(rho_e.real))
    degen = False
    if not truncated:
        sc = dc.scale(mu_e)
        degen = abs(dc.delta_rho(mu_e, rho_e)) <= 1e-6 * sc
    return EdgePoint(float(mu_e), rho_e, float(t_e), degen, truncated)


def parametrize_band(sf, band, N, ode_tol=1e-11):
    """Gauss-Legendre mesh in t with mu(t) from Newton on Delta = 0.

    mu'(t) = -i e^{it} Delta'_rho / Delta'_mu; asserted real of constant
    sign across the mesh.
    """
    if band.degenerate:
        raise ValueError("degenerate band has no interior mesh")
    if N < 2:
        raise ValueError("need at least 2 mesh nodes")
    t_lo, t_hi = band.t_interval
    xg, wg = leggauss(N)
    half = 0.5 * (t_hi - t_lo)
    ts = 0.5 * (t_lo + t_hi) + half * xg
    ws = wg * abs(half)
    mu_lo, mu_hi = band.mu_interval

    mus = np.empty(N)
    dmus = np.empty(N)
    # traverse so each node is seeded by its neighbor
    idx_order = np.argsort(ts) if band.orientation > 0 else \
        np.argsort(ts)[::-1]
    mu_seed = None
    for pos, i in enumerate(idx_order):
        t = ts[i]
        if mu_seed is None:
            frac = (t - t_lo) / (t_hi - t_lo)
            if band.orientation < 0:
                frac = 1.0 - frac
            mu_seed = mu_lo + frac * (mu_hi - mu_lo)
        rho = np.exp(1j * t)
        mu_r = _solve_band_mu(sf, band, t, rho, mu_seed, ode_tol)
        cp = char_poly(monodromy(sf, mu_r, tol=ode_tol))
        dmu = -1j * rho * cp.delta_rho(rho) / cp.delta_mu(rho)
        if abs(dmu.imag) > 1e-8 * max(1.0, abs(dmu)):
            raise ComputationError(
                f"mu'(t) not real at t={t}: {dmu}")
        mus[i] = mu_r
        dmus[i] = dmu.real
        mu_seed = mu_r
    if np.any(dmus == 0) or (np.sign(dmus) != np.sign(dmus[0])).any():
        raise ComputationError(
            f"mu'(t) changes sign inside band k={band.k}, j={band.j}: "
            "a band edge was missed")
    return BandMesh(band, ts, mus, dmus, ws)


def _solve_band_mu(sf, band, t, rho, mu_seed, ode_tol):
    """Real root of Delta(mu, e^{it}) inside the band interval.

    Damped Newton with steps clipped into the interval; if that stalls,
    a bracketed solve on the angle of the unit-circle root of the
    characteristic polynomial (monotone across the band) takes over.
    """
    mu_lo, mu_hi = band.mu_interval
    width = mu_hi - mu_lo
    mu_r = float(np.clip(mu_seed, mu_lo, mu_hi))
    for _ in range(40):
        cp = char_poly(monodromy(sf, mu_r, tol=ode_tol))
        d = cp.delta(rho)
        dm = cp.delta_mu(rho)
        if dm == 0:
            break
        step = d / dm
        nxt = float(np.clip(mu_r - step.real, mu_lo, mu_hi))
        moved = abs(nxt - mu_r)
        mu_r = nxt
        if moved < 1e-13 * max(1.0, abs(mu_r)):
            if abs(d) <= 1e-7 * max(1.0, np.max(np.abs(cp.A))):
                return mu_r
            break   # pinned at the interval boundary away from the root
    # bracketed fallback: signed angle gap of the nearest circle root
    def angle_gap(m):
        cp = char_poly(monodromy(sf, m, tol=ode_tol, want_dmu=False))
        roots = cp.roots
        circ = roots[np.abs(np.abs(roots) - 1.0) < 1e-6]
        if circ.size == 0:
            circ = roots[[np.argmin(np.abs(np.abs(roots) - 1.0))]]
        g = np.angle(circ / rho)
        return float(g[np.argmin(np.abs(g))])
    eps = 1e-9 * max(1.0, width)
    a, b = mu_lo + eps, mu_hi - eps
    ga, gb = angle_gap(a), angle_gap(b)
    if ga * gb > 0:
        raise ComputationError(
            f"cannot bracket mu(t) at t={t} in band k={band.k}, "
            f"j={band.j}")
    mu_r = brentq(angle_gap, a, b, xtol=1e-12, rtol=8.9e-16)
    # two Newton polish steps
    for _ in range(3):
        cp = char_poly(monodromy(sf, mu_r, tol=ode_tol))
        dm = cp.delta_mu(rho)
        if dm == 0:
            break
        mu_r = float(np.clip(mu_r - (cp.delta(rho) / dm).real,
                             mu_lo, mu_hi))
    return mu_r


def spectrum_union_intervals(intervals):
    """Sorted union of closed intervals, overlaps and touching merged."""
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + 1e-12 * max(1.0, abs(out[-1][1])):
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((float(lo), float(hi)))
    return out


def spectrum_union(atlas):
    return spectrum_union_intervals([b.mu_interval for b in atlas.bands])
