"""Monodromy matrix, its mu-derivative and the characteristic polynomial.

The fundamental system Y' = A(x,mu) Y, Y(0) = I is integrated over one
period [0, pi] with an adaptive 8th-order Runge-Kutta pair.  A is the
companion matrix of y^(2n) = (-1)^n (mu*y - sum a_m y^(m)); its trace is
zero (no y^(2n-1) term), so det Y(pi) = 1 by Liouville.

For large |mu| the fundamental matrix is dominated by the growing
Floquet modes e^{Re(omega*lambda)*pi} and small eigenvalues of the
assembled product are numerically unrecoverable.  The period is
therefore split into segments short enough that each partial propagator
has moderate norm; the segment list is kept on MonodromyData so that
multiplier extraction can work on the unassembled product.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .errors import RangeRefusal, StiffFailure

# growth bound per segment: segment propagator norms stay near e^SEG_GROWTH
SEG_GROWTH = 4.0
# refuse when the full-period growth exponent exceeds this
MAX_GROWTH = 350.0

TOL_MIN, TOL_MAX = 1e-14, 1e-4


def growth_exponent(sf, mu):
    """Estimate of the largest Floquet exponent real part times pi."""
    lam = complex(mu) ** (1.0 / (2 * sf.n))
    # omega runs over the 2n-th roots of (-1)^n
    n = sf.n
    ks = np.arange(2 * n)
    omega = np.exp(1j * np.pi * (n + 2 * ks) / (2 * n))
    return float(np.pi * np.max((omega * lam).real))


class FundamentalSolution:
    """Dense evaluation of the normalized fundamental matrix on [0, pi]."""

    def __init__(self, n, breakpoints, dense_sols, cum_products):
        self.n = n
        self.breakpoints = breakpoints
        self._sols = dense_sols
        self._cum = cum_products  # cum[i] = M_{i-1}...M_1 (cum[0] = I)

    def __call__(self, x):
        """Y(x) with columns u_1..u_2n; x in [0, pi]."""
        d = 2 * self.n
        i = int(np.searchsorted(self.breakpoints, x, side="right") - 1)
        i = min(max(i, 0), len(self._sols) - 1)
        local = self._sols[i](x)[: d * d].reshape(d, d)
        return local @ self._cum[i]

    def columns(self, xs):
        """Stack Y(x) for an array of x values: shape (len(xs), 2n, 2n)."""
        return np.array([self(x) for x in np.atleast_1d(xs)])


class MonodromyData:
    """U(mu), dU/dmu and the segment factorization of U."""

    def __init__(self, mu, U, dU_dmu, local_error_estimate, n,
                 segments=None, fundsol=None):
        self.mu = mu
        self.U = U
        self.dU_dmu = dU_dmu
        self.local_error_estimate = local_error_estimate
        self.n = n
        self.segments = segments  # list of (M_i, dM_i/dmu) or None
        self.fundsol = fundsol
        self._charpoly = None
        self._specdata = None


def _rhs_factory(sf, mu, want_dmu):
    n = sf.n
    d = 2 * n
    sgn = (-1) ** n
    tables = sf._tables
    ms = [t[0] for t in tables]
    cs = [t[1] for t in tables]

    def coeff_row(x):
        """Bottom row of the companion matrix at x."""
        row = np.zeros(d, dtype=complex)
        row[0] = sgn * mu
        for m_idx in range(d - 1):
            mm, cc = ms[m_idx], cs[m_idx]
            if mm.size:
                row[m_idx] -= sgn * np.sum(cc * np.exp(2j * mm * x))
        return row

    if want_dmu:
        def rhs(x, y):
            Y = y[: d * d].reshape(d, d)
            V = y[d * d :].reshape(d, d)
            row = coeff_row(x)
            dY = np.empty((d, d), dtype=complex)
            dY[:-1] = Y[1:]
            dY[-1] = row @ Y
            dV = np.empty((d, d), dtype=complex)
            dV[:-1] = V[1:]
            dV[-1] = row @ V + sgn * Y[0]
            return np.concatenate([dY.ravel(), dV.ravel()])
    else:
        def rhs(x, y):
            Y = y.reshape(d, d)
            row = coeff_row(x)
            dY = np.empty((d, d), dtype=complex)
            dY[:-1] = Y[1:]
            dY[-1] = row @ Y
            return dY.ravel()

    return rhs


def monodromy(sf, mu, tol=1e-10, want_dmu=True, dense=False):
    """Integrate the fundamental system across one period.

    Returns MonodromyData with U = Y(pi) and, if want_dmu, dU/dmu from
    the variational system Y_mu' = A Y_mu + (dA/dmu) Y, Y_mu(0) = 0.
    """
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tol must be in [{TOL_MIN}, {TOL_MAX}], got {tol}")
    mu = complex(mu)
    growth = growth_exponent(sf, mu)
    if growth > MAX_GROWTH:
        raise RangeRefusal(
            f"growth exponent {growth:.1f} exceeds {MAX_GROWTH}; "
            "mu is out of the supported numeric range"
        )
    n = sf.n
    d = 2 * n
    nseg = max(1, int(np.ceil(growth / SEG_GROWTH)))
    breakpoints = np.linspace(0.0, np.pi, nseg + 1)
    rhs = _rhs_factory(sf, mu, want_dmu)

    eye = np.eye(d, dtype=complex)
    segs = []
    dense_sols = []
    for i in range(nseg):
        if want_dmu:
            y0 = np.concatenate([eye.ravel(), np.zeros(d * d, dtype=complex)])
        else:
            y0 = eye.ravel().copy()
        sol = solve_ivp(rhs, (breakpoints[i], breakpoints[i + 1]), y0,
                        method="DOP853", rtol=tol, atol=tol,
                        dense_output=dense)
        if not sol.success:
            raise StiffFailure(
                f"integration failed on [{breakpoints[i]:.4f}, "
                f"{breakpoints[i+1]:.4f}] at mu={mu}: {sol.message}",
                x=sol.t[-1] if sol.t.size else breakpoints[i],
            )
        yf = sol.y[:, -1]
        M = yf[: d * d].reshape(d, d)
        V = yf[d * d :].reshape(d, d) if want_dmu else None
        segs.append((M, V))
        if dense:
            dense_sols.append(sol.sol)

    # assemble U = M_K ... M_1 and dU by the product rule
    U = eye
    cum = [eye]
    for M, _ in segs:
        U = M @ U
        cum.append(U)
    dU = None
    if want_dmu:
        dU = np.zeros((d, d), dtype=complex)
        # suffix[i] = M_K ... M_{i+2} (product of segments after i)
        suffix = eye
        for i in range(nseg - 1, -1, -1):
            M, V = segs[i]
            dU = dU + suffix @ V @ cum[i]
            suffix = suffix @ M

    # Liouville defect of the segment dets as a cheap error proxy
    err = abs(np.prod([np.linalg.det(M) for M, _ in segs]) - 1.0)

    fundsol = None
    if dense:
        fundsol = FundamentalSolution(n, breakpoints, dense_sols, cum[:-1])
    return MonodromyData(mu, U, dU, err, n, segments=segs, fundsol=fundsol)


def _log_dist(a, b):
    """Distance in log-multiplier space with wrapped argument."""
    dm = abs(np.log(abs(a)) - np.log(abs(b)))
    da = abs(np.angle(a / b))
    return dm + da


class SpectralData:
    """Eigen data of U recovered at full relative accuracy.

    vals[j]   multipliers (eigenvalues of U)
    X[:, j]   unit right eigenvector for vals[j]
    Xinv      inverse of X; row j is the matching left eigenvector,
              normalized so that y_j . x_j = 1
    dvals[j]  d vals[j] / d mu (None if the monodromy lacks dU/dmu)
    """

    def __init__(self, vals, X, Xinv, dvals):
        self.vals = vals
        self.X = X
        self.Xinv = Xinv
        self.dvals = dvals


def spectral_decomposition(md):
    """Eigenvalues and eigenvectors of U via the block-cyclic embedding.

    Eigenvalues of the assembled product U are ruined by roundoff once
    ||U|| is large: unit and decaying multipliers then carry absolute
    errors of order ||U|| * eps.  The block-cyclic companion of the
    segment factors (M_1, ..., M_K) is well scaled (each block has norm
    near e^SEG_GROWTH), so its eigenpairs are accurate; eigenvalues of U
    are K-th powers and eigenvectors of U are the segment-0 blocks.
    """
    if md._specdata is not None:
        return md._specdata
    d = md.U.shape[0]
    segs = md.segments
    if not segs or len(segs) == 1:
        w, Z = np.linalg.eig(md.U)
        vals = w
        X = Z / np.linalg.norm(Z, axis=0, keepdims=True)
    else:
        K = len(segs)
        B = np.zeros((d * K, d * K), dtype=complex)
        for i, (M, _) in enumerate(segs):
            j = (i + 1) % K
            B[d * j : d * j + d, d * i : d * i + d] = M
        w, Z = np.linalg.eig(B)
        vals_all = w ** K
        # each true multiplier appears K times; group the families using
        # the (possibly crude) eigenvalues of U as anchors, average the
        # values, and keep the best-resolved eigenvector of each family
        anchors = np.linalg.eigvals(md.U)
        cost = np.empty((vals_all.size, d * K))
        for i, v in enumerate(vals_all):
            for j, a in enumerate(anchors):
                cost[i, j * K : (j + 1) * K] = _log_dist(v, a)
        rows, cols = linear_sum_assignment(cost)
        vals = np.zeros(d, dtype=complex)
        cnt = np.zeros(d)
        best = np.full(d, -1, dtype=int)
        best_nrm = np.zeros(d)
        for r, c in zip(rows, cols):
            fam = c // K
            vals[fam] += vals_all[r]
            cnt[fam] += 1
            nrm = float(np.linalg.norm(Z[:d, r]))
            if nrm > best_nrm[fam]:
                best_nrm[fam] = nrm
                best[fam] = r
        vals /= cnt
        X = Z[:d, best]
        X = X / np.linalg.norm(X, axis=0, keepdims=True)
    Xinv = np.linalg.inv(X)
    dvals = None
    if md.dU_dmu is not None:
        dvals = np.einsum("ij,jk,ki->i", Xinv, md.dU_dmu, X)
    sd = SpectralData(vals, X, Xinv, dvals)
    md._specdata = sd
    return sd


class CharPoly:
    """Delta(mu, rho) = det(rho*I - U) in factored form.

    Stored as the multiplier set {rho_j} with mu-derivatives, which keeps
    Delta and its derivatives accurate near the unit circle even when the
    coefficients span many orders of magnitude.  The coefficient views A
    (ascending in rho, A[-1] = 1, A[0] = det U) and dA_dmu are assembled
    on demand.
    """

    def __init__(self, roots, droots=None):
        self.roots = np.asarray(roots, dtype=complex)
        self.droots = (np.asarray(droots, dtype=complex)
                       if droots is not None else None)
        self._A = None
        self._dA = None

    @property
    def degree(self):
        return self.roots.size

    @property
    def A(self):
        if self._A is None:
            self._A = np.poly(self.roots)[::-1].astype(complex)
        return self._A

    @property
    def dA_dmu(self):
        if self.droots is None:
            return None
        if self._dA is None:
            d = self.roots.size
            out = np.zeros(d + 1, dtype=complex)
            for j in range(d):
                pj = np.poly(np.delete(self.roots, j))[::-1]
                out[: d] -= self.droots[j] * pj
            self._dA = out
        return self._dA

    def delta(self, rho):
        return complex(np.prod(rho - self.roots))

    def delta_rho(self, rho):
        acc = 0j
        for j in range(self.roots.size):
            acc += np.prod(rho - np.delete(self.roots, j))
        return complex(acc)

    def delta_mu(self, rho):
        if self.droots is None:
            raise ValueError("mu-derivative unavailable: monodromy was "
                             "computed with want_dmu=False")
        acc = 0j
        for j in range(self.roots.size):
            acc -= self.droots[j] * np.prod(rho - np.delete(self.roots, j))
        return complex(acc)


def char_poly(md):
    """Characteristic polynomial of U in factored (multiplier) form."""
    if md._charpoly is not None:
        return md._charpoly
    sd = spectral_decomposition(md)
    cp = CharPoly(sd.vals, sd.dvals)
    md._charpoly = cp
    return cp


def delta_eval(md, rho):
    """(Delta, dDelta/drho, dDelta/dmu) at (md.mu, rho)."""
    cp = char_poly(md)
    d_mu = cp.delta_mu(rho) if cp.dA_dmu is not None else None
    return cp.delta(rho), cp.delta_rho(rho), d_mu


def poly_scale(cp, rho):
    """Magnitude scale of Delta(mu, .) near rho, for residual tests."""
    r = max(1.0, abs(rho))
    return float(np.sum(np.abs(cp.A) * r ** np.arange(cp.A.size)))


def discriminant(sf, mu, tol=1e-10):
    """Sylvester resultant of Delta(mu,.) and its rho-derivative."""
    md = monodromy(sf, mu, tol=tol, want_dmu=False)
    cp = char_poly(md)
    a = cp.A[::-1]                      # descending
    k = np.arange(1, cp.A.size)
    b = (cp.A[1:] * k)[::-1]            # descending, degree 2n-1
    return _resultant(a, b)


def _resultant(a, b):
    """Resultant of two polynomials given by descending coefficients."""
    m = len(a) - 1
    n = len(b) - 1
    size = m + n
    S = np.zeros((size, size), dtype=complex)
    for i in range(n):
        S[i, i : i + m + 1] = a
    for i in range(m):
        S[n + i, i : i + n + 1] = b
    return np.linalg.det(S)
