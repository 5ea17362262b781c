"""Floquet solutions, the spectral transform pair, Bloch eigenproblems,
the Gel'fand transform and the spectral matrix.

The kernel E(x; mu, rho) = sum_q v_q u_q(x, mu) is built from cofactors
of U(mu) - rho I.  The transform
    Phi(mu, rho_k; f) = int f(y) E(y; mu, rho_k^{-1}) dy
with the weight p = |2 pi E(0; mu, rho^{-1}) Delta'_rho|^{-1} inverts to
f and satisfies Parseval; all band integrals are done in the
quasimomentum t, which absorbs the edge singularity of p.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ComputationError, RangeRefusal
from .monodromy import char_poly, monodromy, spectral_decomposition
from .multipliers import eigen_multipliers
from .bands import parametrize_band

TWO_PI = 2.0 * np.pi


def cofactor_vector(U, rho):
    """v_q = (-1)^q det of the minor deleting column q from the first
    2n-1 rows of U - rho*I (0-based q).

    Direct minor evaluation; fine while ||U|| is moderate but loses all
    accuracy once the entries span many orders of magnitude.  Kept as
    the reference definition; floquet_vector computes the same vector
    stably from the eigen decomposition.
    """
    d = U.shape[0]
    R = (U - rho * np.eye(d))[: d - 1]
    v = np.empty(d, dtype=complex)
    for q in range(d):
        v[q] = (-1) ** q * np.linalg.det(np.delete(R, q, axis=1))
    return v


@dataclass
class FloquetSolution:
    mu: complex
    rho: complex
    v: np.ndarray
    E0: complex
    _fund: object = field(default=None, repr=False)


def floquet_vector(md, rho, check_tol=1e-6):
    """FloquetSolution coefficients at a root rho of Delta(mu, .).

    The cofactor vector equals the last adjugate column of U - rho*I,
    which at a simple multiplier rho_j factors as
        v = Delta'_rho(rho_j) * x_j * (X^{-1})[j, 2n-1]
    with x_j the right eigenvector; this form stays accurate when the
    direct minors cancel catastrophically.
    """
    cp = char_poly(md)
    scale = max(1.0, np.max(np.abs(cp.A)))
    if abs(cp.delta(rho)) > check_tol * scale:
        raise ComputationError(
            f"rho={rho} is not a multiplier at mu={md.mu}: "
            f"|Delta| = {abs(cp.delta(rho)):.2e}")
    sd = spectral_decomposition(md)
    j = int(np.argmin(np.abs(sd.vals - rho)))
    lam = sd.vals[j]
    v = cp.delta_rho(lam) * sd.X[:, j] * sd.Xinv[j, -1]
    if np.max(np.abs(v)) < 1e-12 * scale:
        raise ComputationError(
            f"all cofactors vanish at mu={md.mu}, rho={rho} "
            "(ramification point)")
    return FloquetSolution(md.mu, rho, v, v[0], _fund=md.fundsol)


def _fund_of(sf, fs, ode_tol=1e-10):
    if fs._fund is None:
        md = monodromy(sf, fs.mu, tol=ode_tol, want_dmu=False, dense=True)
        fs._fund = md.fundsol
    return fs._fund


def eval_E(sf, fs, x, ode_tol=1e-10):
    """E(x; mu, rho) extended by E(x + pi) = rho E(x)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    r = np.floor(xs / np.pi)
    x0 = xs - np.pi * r
    lr = np.log(abs(fs.rho)) if fs.rho != 0 else 0.0
    if np.max(np.abs(r)) * abs(lr) > 300.0:
        raise RangeRefusal(
            f"|rho|^r overflows: |log rho| = {lr:.3g}, "
            f"max |r| = {int(np.max(np.abs(r)))}")
    fund = _fund_of(sf, fs, ode_tol)
    out = np.array([fund(xx)[0, :] @ fs.v for xx in x0], dtype=complex)
    out *= fs.rho ** r
    return out[0] if np.isscalar(x) or np.ndim(x) == 0 else out


def weights(md, rho):
    """Normalizing weights (p, w) of the transform at (mu, rho)."""
    cp = char_poly(md)
    E0inv = floquet_vector(md, 1.0 / rho).E0
    dr = cp.delta_rho(rho)
    dm = cp.delta_mu(rho)
    den_p = abs(TWO_PI * E0inv * dr)
    den_w = abs(dm * E0inv)
    if den_p < 1e-12 or den_w < 1e-12:
        raise ComputationError(
            f"singular weight at mu={md.mu}, rho={rho}: band edge or "
            "exceptional point")
    return 1.0 / den_p, 1.0 / den_w


class BandNodes:
    """Floquet data at the Gauss-Legendre nodes of one band."""

    def __init__(self, sf, mesh, ode_tol=1e-10, conj_tol=1e-8):
        self.band = mesh.band
        self.mesh = mesh
        self.mu = mesh.mu
        self.t = mesh.t
        self.rho = np.exp(1j * mesh.t)
        self.glw = mesh.gl_weights
        self.dmu = mesh.dmu_dt
        N = mesh.t.size
        d = 2 * sf.n
        self.fund = []
        self.U = np.empty((N, d, d), dtype=complex)
        self.v = np.empty((N, d), dtype=complex)
        self.v_inv = np.empty((N, d), dtype=complex)
        self.p = np.empty(N)
        self.w = np.empty(N)
        for i in range(N):
            md = monodromy(sf, self.mu[i], tol=ode_tol, dense=True)
            rho = self.rho[i]
            fs = floquet_vector(md, rho)
            fsi = floquet_vector(md, 1.0 / rho)
            vmax = np.max(np.abs(fs.v))
            if np.max(np.abs(fsi.v - np.conj(fs.v))) > conj_tol * vmax:
                raise ComputationError(
                    f"conjugacy v(1/rho) = conj v(rho) violated at "
                    f"mu={self.mu[i]}")
            self.fund.append(md.fundsol)
            self.U[i] = md.U
            self.v[i] = fs.v
            self.v_inv[i] = fsi.v
            self.p[i], self.w[i] = weights(md, rho)

    def E_at(self, i, x0s):
        """First-row values sum_q v_q u_q(x0) at node i, x0 in [0, pi)."""
        rows = np.array([self.fund[i](x)[0, :] for x in x0s])
        return rows @ self.v[i], rows @ self.v_inv[i]


@dataclass
class BandTransform:
    nodes: BandNodes
    phi: np.ndarray


@dataclass
class TransformVector:
    parts: list

    def weighted_norm_sq(self):
        """Quadrature of the Parseval right side: sum int dmu p |phi|^2."""
        total = 0.0
        for part in self.parts:
            bn = part.nodes
            total += np.sum(bn.glw * np.abs(bn.dmu) * bn.p
                            * np.abs(part.phi) ** 2)
        return total


def band_nodes(sf, atlas, N, ode_tol=1e-10):
    """Quadrature-ready node data for every full band of the atlas."""
    out = []
    for band in atlas.bands:
        if band.degenerate or band.truncated:
            continue
        mesh = parametrize_band(sf, band, N, ode_tol=ode_tol)
        out.append(BandNodes(sf, mesh, ode_tol=ode_tol))
    return out


def _support_cells(support):
    a, b = support
    r_lo = int(np.floor(a / np.pi))
    r_hi = int(np.ceil(b / np.pi))
    return range(r_lo, r_hi)


def forward_transform(sf, nodes, f, support, cell_nodes=64):
    """Phi at every band node: int f(y) E(y; mu, rho^{-1}) dy.

    nodes is the list returned by band_nodes (or a BandAtlas, in which
    case a default mesh is built); f is a vectorized callable supported
    in the interval `support`.
    """
    nodes = _ensure_nodes(sf, nodes)
    xq, wq = leggauss(cell_nodes)
    xq = 0.5 * np.pi * (xq + 1.0)
    wq = wq * 0.5 * np.pi
    cells = list(_support_cells(support))
    fvals = {r: np.asarray(f(xq + np.pi * r), dtype=complex) for r in cells}
    parts = []
    for bn in nodes:
        N = bn.mu.size
        phi = np.zeros(N, dtype=complex)
        for i in range(N):
            _, Einv = bn.E_at(i, xq)
            rinv = 1.0 / bn.rho[i]
            acc = 0.0 + 0.0j
            for r in cells:
                acc += rinv ** r * np.sum(wq * fvals[r] * Einv)
            phi[i] = acc
        parts.append(BandTransform(bn, phi))
    return TransformVector(parts)


def inverse_transform(sf, tv, xs):
    """f(x) = sum_bands (1/2pi) sum_i gl_i w_i phi_i E(x; mu_i, e^{it_i})."""
    xs = np.asarray(xs, dtype=float)
    r = np.floor(xs / np.pi)
    x0 = xs - np.pi * r
    out = np.zeros(xs.shape, dtype=complex)
    for part in tv.parts:
        bn = part.nodes
        for i in range(bn.mu.size):
            E, _ = bn.E_at(i, x0)
            E = E * bn.rho[i] ** r
            out += (bn.glw[i] * bn.w[i] * part.phi[i] / TWO_PI) * E
    return out


def parseval(sf, nodes, f, support, cell_nodes=96):
    """(lhs, rhs, rel_err) of the Parseval identity for f."""
    nodes = _ensure_nodes(sf, nodes)
    xq, wq = leggauss(cell_nodes)
    xq = 0.5 * np.pi * (xq + 1.0)
    wq = wq * 0.5 * np.pi
    lhs = 0.0
    for rr in _support_cells(support):
        fv = np.asarray(f(xq + np.pi * rr), dtype=complex)
        lhs += np.sum(wq * np.abs(fv) ** 2)
    tv = forward_transform(sf, nodes, f, support, cell_nodes=cell_nodes)
    rhs = tv.weighted_norm_sq()
    if lhs == 0.0:
        return 0.0, float(rhs), 0.0
    return float(lhs), float(rhs), abs(lhs - rhs) / lhs


def _ensure_nodes(sf, nodes, N=16):
    from .bands import BandAtlas
    if isinstance(nodes, BandAtlas):
        return band_nodes(sf, nodes, N)
    return nodes


def _newton_mu(sf, mu0, rho, ode_tol, maxit=60):
    mu_c = complex(mu0)
    for _ in range(maxit):
        cp = char_poly(monodromy(sf, mu_c, tol=ode_tol))
        step = cp.delta(rho) / cp.delta_mu(rho)
        mu_c = mu_c - step
        if abs(step) < 1e-12 * max(1.0, abs(mu_c)):
            return mu_c
    raise ComputationError(f"Newton for Delta(mu, rho)=0 stalled near {mu0}")


def bloch_eigs(sf, t, mu_window, atlas, ode_tol=1e-10, verify_count=True):
    """Eigenvalues of the operator with y^(j)(pi) = e^{it} y^(j)(0).

    Returns a list of (mu, FloquetSolution, norm_rel_err) where the norm
    check compares the L^2[0,pi] norm of E against
    (-1)^{n+1} e^{-it} Delta'_mu(mu, e^{it}) E(0; mu, e^{-it}).
    """
    t = float(t) % TWO_PI
    gap = np.min(np.abs(atlas.exceptional_t - t))
    if gap < 1e-6:
        raise RangeRefusal(
            f"t={t} is within 1e-6 of an exceptional value; eigenvalue "
            "simpleness is not guaranteed there")
    rho = np.exp(1j * t)
    lo, hi = mu_window
    roots = []
    for band in atlas.bands:
        if band.degenerate:
            continue
        t_lo, t_hi = band.t_interval
        if not (t_lo < t < t_hi):
            continue
        frac = (t - t_lo) / (t_hi - t_lo)
        if band.orientation < 0:
            frac = 1.0 - frac
        mu_lo, mu_hi = band.mu_interval
        seed = mu_lo + frac * (mu_hi - mu_lo)
        mu_c = _newton_mu(sf, seed, rho, ode_tol)
        if abs(mu_c.imag) > 1e-7 * max(1.0, abs(mu_c)):
            raise ComputationError(f"Bloch root left the real axis: {mu_c}")
        mu_r = float(mu_c.real)
        if lo <= mu_r <= hi and all(abs(mu_r - m) > 1e-8 * max(1, abs(m))
                                    for m, _, _ in roots):
            roots.append((mu_r, None, None))
    if verify_count:
        count = _winding_count(sf, rho, mu_window, ode_tol,
                               anchors=[m for m, _, _ in roots])
        if count != len(roots):
            raise ComputationError(
                f"argument principle counts {count} Bloch eigenvalues in "
                f"{mu_window} but {len(roots)} were found from the atlas")
    out = []
    xq, wq = leggauss(96)
    xq = 0.5 * np.pi * (xq + 1.0)
    wq = wq * 0.5 * np.pi
    n = sf.n
    for mu_r, _, _ in sorted(roots):
        md = monodromy(sf, mu_r, tol=ode_tol, dense=True)
        fs = floquet_vector(md, rho)
        Evals = np.array([md.fundsol(x)[0, :] @ fs.v for x in xq])
        norm_sq = float(np.sum(wq * np.abs(Evals) ** 2))
        cp = char_poly(md)
        E0inv = floquet_vector(md, 1.0 / rho).E0
        rhs = (-1) ** (n + 1) * np.exp(-1j * t) * cp.delta_mu(rho) * E0inv
        rel = abs(norm_sq - rhs) / abs(rhs)
        out.append((mu_r, fs, rel))
    return out


def _winding_count(sf, rho, mu_window, ode_tol, h=1e-2, init_samples=32,
                   anchors=None):
    """Zeros of Delta(., rho) inside a thin rectangle around the window.

    Each zero flips the phase by pi within O(h) of its real part along the
    horizontal edges, so uniform sampling can alias a pair of zeros inside
    one coarse segment to zero net phase.  Candidate locations (anchors)
    get extra samples at a +- 2h, a +- 8h to pin the swings down; the
    adaptive bisection then resolves anything between them.
    """
    lo, hi = mu_window
    corners = [complex(lo, -h), complex(hi, -h),
               complex(hi, h), complex(lo, h), complex(lo, -h)]
    cache = {}

    def val(z):
        v = cache.get(z)
        if v is None:
            cp = char_poly(monodromy(sf, z, tol=ode_tol, want_dmu=False))
            v = cp.delta(rho)
            cache[z] = v
        return v

    total = 0.0

    def walk(za, zb, va, vb, depth=0):
        nonlocal total
        dphi = np.angle(vb / va)
        if abs(dphi) < 1.0 or depth >= 40:
            if depth >= 40:
                raise ComputationError(
                    f"winding integration stalled near mu={za}")
            total += dphi
            return
        zm = 0.5 * (za + zb)
        vm = val(zm)
        walk(za, zm, va, vm, depth + 1)
        walk(zm, zb, vm, vb, depth + 1)

    for ca, cb in zip(corners, corners[1:]):
        fr = np.linspace(0, 1, init_samples + 1)
        if anchors is not None and abs(cb.real - ca.real) > 0:
            span = cb.real - ca.real
            extra = [(a + s - ca.real) / span for a in anchors
                     for s in (-8 * h, -2 * h, 0.0, 2 * h, 8 * h)]
            fr = np.unique(np.concatenate(
                [fr, [f for f in extra if 0.0 < f < 1.0]]))
        zs = ca + (cb - ca) * fr
        vs = [val(z) for z in zs]
        for i in range(len(zs) - 1):
            walk(zs[i], zs[i + 1], vs[i], vs[i + 1])
    return int(round(total / TWO_PI))


def gelfand_forward(f, R, xs, nt):
    """F(x, t) = sum_{|r| <= R} e^{-i r t} f(x + pi r) on a product grid.

    Returns (F, ts) with F of shape (len(xs), nt) and ts uniform on
    [0, 2 pi).
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.linspace(0.0, TWO_PI, nt, endpoint=False)
    F = np.zeros((xs.size, nt), dtype=complex)
    for r in range(-R, R + 1):
        fv = np.asarray(f(xs + np.pi * r), dtype=complex)
        F += np.outer(fv, np.exp(-1j * r * ts))
    return F, ts


def gelfand_inverse(F, ts, r_range):
    """f(x + pi r) = (1/2pi) int e^{i r t} F(x, t) dt by trapezoid.

    Returns an array of shape (len(r_range), nx).
    """
    F = np.asarray(F)
    out = np.empty((len(r_range), F.shape[0]), dtype=complex)
    for i, r in enumerate(r_range):
        out[i] = F @ np.exp(1j * r * ts) / ts.size
    return out


@dataclass
class SpectralMatrixSample:
    mu: float
    M: np.ndarray
    contributing: list     # branch indices k with mu inside their band


def spectral_matrix(sf, atlas, mu, ode_tol=1e-10, edge_pad=1e-8):
    """M(mu) = sum over unit multipliers of p * v(rho) v(rho^{-1})^T."""
    mu = float(mu)
    covering = [b for b in atlas.bands
                if not b.degenerate
                and b.mu_interval[0] + edge_pad < mu
                < b.mu_interval[1] - edge_pad]
    if not covering:
        raise ComputationError(
            f"mu={mu} is not an interior point of any band")
    md = monodromy(sf, mu, tol=ode_tol)
    vals = eigen_multipliers(md)
    unit = [v for v in vals if abs(abs(v) - 1.0) < 1e-8]
    if len(unit) != len(covering):
        raise ComputationError(
            f"{len(unit)} unit multipliers at mu={mu} but atlas lists "
            f"{len(covering)} covering bands")
    d = 2 * sf.n
    M = np.zeros((d, d), dtype=complex)
    for rho in unit:
        fs = floquet_vector(md, rho)
        vi = floquet_vector(md, 1.0 / rho).v
        vmax = np.max(np.abs(fs.v))
        if np.max(np.abs(vi - np.conj(fs.v))) > 1e-8 * vmax:
            raise ComputationError(
                f"conjugacy v(1/rho) = conj v(rho) fails at mu={mu}")
        p, _ = weights(md, rho)
        M += p * np.outer(fs.v, vi)
    return SpectralMatrixSample(mu, M, [b.k for b in covering])


def reconstruct_U(sf, mu, ode_tol=1e-10, min_gap=1e-6):
    """Recover U(mu) from the rank-one spectral factors.

    Returns (U_reconstructed, U_direct, rel_error).
    """
    md = monodromy(sf, mu, tol=ode_tol)
    vals = eigen_multipliers(md)
    d = vals.size
    gaps = [abs(vals[i] - vals[j]) for i in range(d) for j in range(i)]
    if min(gaps) < min_gap:
        raise ComputationError(
            f"multipliers collide at mu={mu} (gap {min(gaps):.2e}); "
            "reconstruction needs distinct eigenvalues")
    V = np.empty((d, d), dtype=complex)      # columns: cofactor vectors
    Vi = np.empty((d, d), dtype=complex)
    for k, rho in enumerate(vals):
        V[:, k] = floquet_vector(md, rho).v
        Vi[:, k] = floquet_vector(md, 1.0 / rho).v
    # the paper extracts column q' of each rank-one factor v(rho) v(1/rho)^T;
    # pick the q' keeping every column well away from zero
    best_q, best_score = None, -np.inf
    for q in range(d):
        score = np.min(np.abs(Vi[q, :]) * np.max(np.abs(V), axis=0))
        if score > best_score:
            best_q, best_score = q, score
    C = V * Vi[best_q, :]
    if np.linalg.cond(C) > 1e10:
        raise ComputationError(
            f"eigenvector matrix is degenerate at mu={mu} "
            f"(cond {np.linalg.cond(C):.2e})")
    U_rec = C @ np.diag(vals) @ np.linalg.inv(C)
    err = np.linalg.norm(U_rec - md.U) / np.linalg.norm(md.U)
    return U_rec, md.U, err


def hill_compare(sf, nodes, f, xs, support, cell_nodes=64):
    """Max pointwise gap between the general inversion formula and the
    classical complex Hill expansion (n = 1 only)."""
    if sf.n != 1:
        raise ValueError("the Hill formula applies to n = 1 only")
    nodes = _ensure_nodes(sf, nodes)
    xs = np.asarray(xs, dtype=float)
    tv = forward_transform(sf, nodes, f, support, cell_nodes=cell_nodes)
    general = inverse_transform(sf, tv, xs)

    xq, wq = leggauss(cell_nodes)
    xq = 0.5 * np.pi * (xq + 1.0)
    wq = wq * 0.5 * np.pi
    cells = list(_support_cells(support))
    fvals = {r: np.asarray(f(xq + np.pi * r), dtype=complex) for r in cells}
    rx = np.floor(xs / np.pi)
    x0 = xs - np.pi * rx

    hill = np.zeros(xs.shape, dtype=complex)
    seen = set()
    for bn in nodes:
        key = (round(bn.band.mu_interval[0], 9),
               round(bn.band.mu_interval[1], 9))
        if key in seen:
            continue        # each mu-interval is carried by two branches
        seen.add(key)
        for i in range(bn.mu.size):
            U = bn.U[i]
            theta_pi, phi_pi = U[0, 0], U[0, 1]
            u_p = 0.5 * (theta_pi + U[1, 1])
            u_m = 0.5 * (theta_pi - U[1, 1])
            s = np.sqrt(max(0.0, 1.0 - float(u_p.real) ** 2))
            if s < 1e-10 or abs(phi_pi) < 1e-12:
                raise ComputationError(
                    f"Hill formula singular at mu={bn.mu[i]}")
            cs = [(u_m + 1j * s) / phi_pi, (u_m - 1j * s) / phi_pi]
            coef = [np.array([1.0, -c], dtype=complex) for c in cs]
            # multiplier of each Y: U c = rho c
            rhos = [(U @ c)[0] / c[0] for c in coef]
            # values of Y_+- on the quadrature nodes and at the x targets
            Yq = [np.array([bn.fund[i](x)[0, :] @ c for x in xq])
                  for c in coef]
            F = [sum(rho ** r * np.sum(wq * fvals[r] * Y)
                     for r in cells)
                 for Y, rho in zip(Yq, rhos)]
            Yx = [np.array([bn.fund[i](x)[0, :] @ c for x in x0])
                  * rho ** rx
                  for c, rho in zip(coef, rhos)]
            wt = abs(phi_pi) / (4.0 * np.pi * s)
            hill += (bn.glw[i] * abs(bn.dmu[i]) * wt
                     * (Yx[0] * F[1] + Yx[1] * F[0]))
    return float(np.max(np.abs(general - hill)))
