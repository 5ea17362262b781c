"""Floquet multiplier branches rho_k(mu) tracked along the real axis.

Branch labels are anchored at large mu, where |rho_k| = e^{Re(omega_k)
lambda pi} (1 + o(1)) separates the branches, and propagated downward by
minimal-distance matching in log-multiplier space.  Collisions of
branches (discriminant points) are recorded as events; inside a
collision the pair's labels are only meaningful through the symmetric
functions of the pair.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import AmbiguousLabeling, ComputationError
from .monodromy import (char_poly, monodromy, discriminant,
                        spectral_decomposition, _log_dist)

TWO_PI = 2.0 * np.pi


def omega_order(n):
    """The 2n-th roots of (-1)^n, ordered by non-increasing real part with
    the positive-imaginary member of each conjugate pair first.

    With this ordering omega_n = i (1-based) for both parities.
    """
    ks = np.arange(2 * n)
    omega = np.exp(1j * np.pi * (n + 2 * ks) / (2 * n))
    # snap near-real/near-imaginary parts so sorting ties are exact
    re = np.round(omega.real, 12)
    im = np.round(omega.imag, 12)
    idx = np.lexsort((-im, -re))
    return omega[idx]


class OmegaOrder:
    def __init__(self, n):
        self.n = n
        self.omega = omega_order(n)

    def __iter__(self):
        return iter(self.omega)


@dataclass
class CollisionEvent:
    mu_interval: tuple
    branch_pair: tuple
    on_unit_circle: bool
    discriminant_value: complex


@dataclass
class BranchTable:
    mu_grid: np.ndarray          # ascending
    rho: np.ndarray              # (2n, N), row k = rho_k(mu_i)
    log_rho: np.ndarray = None   # (2n, N), continuously unwrapped log rho_k
    collisions: list = field(default_factory=list)

    @property
    def n_branches(self):
        return self.rho.shape[0]


def eigen_multipliers(md):
    """The 2n Floquet multipliers at md.mu.

    For a single-segment monodromy these are plain eigenvalues of U.
    With K > 1 segments the eigenvalues of the block-cyclic embedding
    of (M_1, ..., M_K) are computed instead and raised to the K-th
    power: unit and decaying multipliers of products with huge norm are
    then recovered at full relative accuracy.
    """
    return spectral_decomposition(md).vals


def label_asymptotic(values, mu, order, amb_tol=1e-2):
    """Permutation assigning each computed multiplier to a branch index.

    values[perm[k]] is the multiplier of branch k; the assignment
    minimizes total log-modulus plus wrapped-argument discrepancy
    against exp(omega_k * mu^{1/2n} * pi).
    """
    values = np.asarray(values, dtype=complex)
    omega = np.asarray(order.omega if isinstance(order, OmegaOrder) else order)
    d = omega.size
    if values.size != d:
        raise ValueError("need exactly 2n multiplier values")
    lam = float(mu) ** (1.0 / d)
    zeta = omega * lam * np.pi
    logv = np.log(np.abs(values))
    argv = np.angle(values)
    cost = np.empty((d, d))
    for k in range(d):
        dm = np.abs(logv - zeta[k].real)
        da = np.abs(np.angle(np.exp(1j * (argv - zeta[k].imag))))
        cost[k] = dm + da
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(d, dtype=int)
    perm[rows] = cols
    base = cost[rows, cols].sum()
    # swap test: an assignment is ambiguous when exchanging two labels
    # changes the cost by less than amb_tol while the values differ
    for k in range(d):
        for kp in range(k + 1, d):
            swap = (cost[k, perm[kp]] + cost[kp, perm[k]]
                    - cost[k, perm[k]] - cost[kp, perm[kp]])
            vk, vkp = values[perm[k]], values[perm[kp]]
            if swap < amb_tol and abs(vk - vkp) > 1e-8 * max(1.0, abs(vk)):
                raise AmbiguousLabeling(
                    f"branch labels {k} and {kp} are ambiguous at mu={mu}: "
                    f"swap cost {swap:.2e}"
                )
    del base
    return perm


@dataclass
class TrackOptions:
    ode_tol: float = 1e-11
    collision_tol: float = 1e-6
    max_halvings: int = 40
    match_cost_limit: float = 0.35
    detect_gap: float = 0.75     # pairwise-gap level that triggers refinement
    refine_collisions: bool = True


def _roots_at(sf, mu, tol):
    return eigen_multipliers(monodromy(sf, mu, tol=tol, want_dmu=False))


def track_branches(sf, mu_min, mu_max, opts=None, grid=None, num_points=200):
    """Track the 2n multiplier branches from mu_max down to mu_min.

    Labels are seeded by the asymptotic ordering at mu_max and carried
    down by optimal assignment against a linear prediction of log rho
    in lambda = mu^{1/2n}; the step is subdivided (up to max_halvings
    times) whenever the matched cost is too large to be trusted.
    """
    opts = opts or TrackOptions()
    n2 = 2 * sf.n
    if grid is None:
        if mu_min > 0:
            grid = np.geomspace(mu_min, mu_max, num_points)
        else:
            grid = np.linspace(mu_min, mu_max, num_points)
    grid = np.asarray(sorted(set(float(g) for g in grid)))
    if grid[-1] != mu_max or grid[0] != mu_min:
        raise ValueError("grid must span [mu_min, mu_max]")

    order = OmegaOrder(sf.n)
    # the top grid point may sit exactly on a multiplier collision, where
    # asymptotic labels are degenerate; back off until labeling is clean
    span = mu_max - mu_min
    seed_mu = None
    for delta in (0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1):
        cand = mu_max - delta * min(span, abs(mu_max) or span)
        try:
            vals = _roots_at(sf, cand, opts.ode_tol)
            perm = label_asymptotic(vals, cand, order)
            seed_mu = cand
            break
        except AmbiguousLabeling:
            continue
    if seed_mu is None:
        raise AmbiguousLabeling(
            f"could not find an unambiguous labeling point near mu={mu_max}"
        )

    # state: unwrapped log rho per branch at the last two accepted points
    def unwrapped_log(v, ref_imag):
        L = np.log(abs(v)) + 1j * np.angle(v)
        k = np.round((ref_imag - L.imag) / TWO_PI)
        return L + 1j * TWO_PI * k

    mu_prev = seed_mu
    log_prev = np.array([np.log(vals[perm[k]]) for k in range(n2)])
    mu_prev2 = None
    log_prev2 = None

    out_mu = [seed_mu]
    out_rho = [np.exp(log_prev).copy()]
    out_log = [log_prev.copy()]

    def predict(mu_new):
        if mu_prev2 is None:
            return log_prev
        t = (mu_new - mu_prev) / (mu_prev2 - mu_prev)
        return log_prev + t * (log_prev2 - log_prev)

    def advance(mu_new, depth=0):
        nonlocal mu_prev, log_prev, mu_prev2, log_prev2
        pred = predict(mu_new)
        roots = _roots_at(sf, mu_new, opts.ode_tol)
        cost = np.empty((n2, n2))
        for k in range(n2):
            p = np.exp(pred[k])
            for i in range(n2):
                cost[k, i] = _log_dist(roots[i], p) if roots[i] != 0 else np.inf
        rows, cols = linear_sum_assignment(cost)
        matched = cost[rows, cols]
        gaps = [abs(a - b) for ii, a in enumerate(roots)
                for b in roots[ii + 1 :]]
        min_gap = min(gaps) if gaps else np.inf
        ok = matched.max() <= max(opts.match_cost_limit,
                                  0.5 * min(min_gap, 1.0))
        if not ok and depth < opts.max_halvings:
            mid = np.sqrt(mu_prev * mu_new) if (mu_prev > 0 and mu_new > 0) \
                else 0.5 * (mu_prev + mu_new)
            if mid != mu_prev and mid != mu_new:
                advance(mid, depth + 1)
                advance(mu_new, depth + 1)
                return
        if not ok and matched.max() > 1.0:
            raise ComputationError(
                f"branch matching unresolved at mu={mu_new} "
                f"(cost {matched.max():.3f} after {depth} halvings)"
            )
        newlog = np.empty(n2, dtype=complex)
        for k in range(n2):
            v = roots[cols[list(rows).index(k)]]
            newlog[k] = unwrapped_log(v, pred[k].imag)
        mu_prev2, log_prev2 = mu_prev, log_prev
        mu_prev, log_prev = mu_new, newlog
        out_mu.append(mu_new)
        out_rho.append(np.exp(newlog))
        out_log.append(newlog)

    seed_log = log_prev.copy()
    if seed_mu < mu_max:
        advance(mu_max)
        mu_prev, log_prev = seed_mu, seed_log
        mu_prev2 = log_prev2 = None
    for mu_new in grid[::-1]:
        if mu_new < seed_mu:
            advance(float(mu_new))

    idx = np.argsort(out_mu)
    mu_arr = np.asarray(out_mu)[idx]
    rho_arr = np.asarray(out_rho)[idx].T  # (2n, N)
    log_arr = np.asarray(out_log)[idx].T
    table = BranchTable(mu_arr, rho_arr, log_arr)
    table.collisions = _find_collisions(sf, table, opts)
    return table


def _find_collisions(sf, table, opts):
    """Locate near-coincidences of branch pairs and refine them."""
    mu, rho = table.mu_grid, table.rho
    n2 = rho.shape[0]
    events = []
    for k in range(n2):
        for kp in range(k + 1, n2):
            g = np.abs(rho[k] - rho[kp])
            # local minima of the sampled gap below the detection level
            cand = [i for i in range(len(mu))
                    if g[i] < opts.detect_gap
                    and (i == 0 or g[i] <= g[i - 1])
                    and (i == len(mu) - 1 or g[i] <= g[i + 1])]
            for i in cand:
                lo = mu[max(i - 1, 0)]
                hi = mu[min(i + 1, len(mu) - 1)]
                g_min, mu_star = g[i], mu[i]
                if opts.refine_collisions and hi > lo:
                    def gap_at(m):
                        vals = _roots_at(sf, m, opts.ode_tol)
                        d = np.abs(vals[:, None] - vals[None, :])
                        np.fill_diagonal(d, np.inf)
                        return d.min()
                    res = minimize_scalar(gap_at, bounds=(lo, hi),
                                          method="bounded",
                                          options={"xatol": 1e-10})
                    if res.fun < g_min:
                        g_min, mu_star = res.fun, float(res.x)
                if g_min < opts.collision_tol:
                    vals = _roots_at(sf, mu_star, opts.ode_tol)
                    d = np.abs(vals[:, None] - vals[None, :])
                    np.fill_diagonal(d, np.inf)
                    ii, jj = np.unravel_index(np.argmin(d), d.shape)
                    on_circle = (abs(abs(vals[ii]) - 1) < opts.collision_tol
                                 and abs(abs(vals[jj]) - 1) < opts.collision_tol)
                    events.append(CollisionEvent(
                        mu_interval=(float(lo), float(hi)),
                        branch_pair=(k, kp),
                        on_unit_circle=bool(on_circle),
                        discriminant_value=complex(
                            discriminant(sf, mu_star, tol=opts.ode_tol)),
                    ))
    # merge duplicates from overlapping pairs
    merged = []
    for ev in sorted(events, key=lambda e: e.mu_interval):
        if merged and ev.branch_pair == merged[-1].branch_pair and \
                ev.mu_interval[0] <= merged[-1].mu_interval[1]:
            prev = merged[-1]
            merged[-1] = CollisionEvent(
                (prev.mu_interval[0], max(prev.mu_interval[1],
                                          ev.mu_interval[1])),
                prev.branch_pair, prev.on_unit_circle or ev.on_unit_circle,
                prev.discriminant_value)
        else:
            merged.append(ev)
    return merged


def involution_check(table):
    """Max Hausdorff defect of {rho_k} against {1/rho_k} and {conj rho_k}."""
    worst = 0.0
    for i in range(table.mu_grid.size):
        vals = table.rho[:, i]
        for target in (1.0 / vals, np.conj(vals)):
            for t in target:
                worst = max(worst, np.min(np.abs(vals - t)))
    return worst
