"""Independent references used by the acceptance checks.

Nothing here touches the ODE pipeline: the Mathieu edges come from a
dense truncated-Fourier eigenproblem, the free-operator quantities from
closed forms.  Agreement between the two routes is the point.
"""

import numpy as np

from .errors import ConfigError


def mathieu_fourier_edges(amplitude=1.0, count=6, half_size=20):
    """First band edges of -y'' + 2*amplitude*cos(2x) y via dense matrices.

    Periodic eigenfunctions live on e^{2imx}, m = -M..M: matrix
    diag((2m)^2) with `amplitude` on the off-diagonals.  Antiperiodic
    ones live on e^{i(2m+1)x}.  The sorted union of both spectra lists
    the band edges from below.  half_size=20 gives 41x41 periodic
    matrices, converged far beyond 1e-10 for the low edges.
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    M = int(half_size)
    m = np.arange(-M, M + 1)
    P = np.diag((2.0 * m) ** 2) + amplitude * (np.eye(2 * M + 1, k=1)
                                               + np.eye(2 * M + 1, k=-1))
    A = np.diag((2.0 * m + 1.0) ** 2) + amplitude * (np.eye(2 * M + 1, k=1)
                                                     + np.eye(2 * M + 1, k=-1))
    ev = np.concatenate([np.linalg.eigvalsh(P), np.linalg.eigvalsh(A)])
    return np.sort(ev)[:count]


def free_multiplier(n, mu, k_index):
    """rho_k(mu) = exp(omega_k mu^{1/2n} pi) for the free operator.

    Branch order matches multipliers.omega_order: the 2n-th roots of
    (-1)^n sorted by non-increasing real part, positive-imaginary member
    of each conjugate pair first.
    """
    from .multipliers import omega_order
    omega = omega_order(n)
    lam = complex(mu) ** (1.0 / (2 * n))
    return np.exp(omega[k_index] * lam * np.pi)


def free_band_edges(count):
    """Edges of the free Hill spectrum [0, inf): 0, 1, 1, 4, 4, 9, ..."""
    out = [0.0]
    m = 1
    while len(out) < count:
        out.extend([float(m * m), float(m * m)])
        m += 1
    return np.array(out[:count])


def free_hill_mu_of_t(t, band_j):
    """mu(t) on band j (0-based) of the free Hill operator.

    Band j covers mu in [j^2, (j+1)^2]; the unwrapped phase of the
    upper branch is sqrt(mu) pi, so mu = ((t + shift)/pi)^2 with the
    shift folding t back into the band's sheet.
    """
    t = float(t)
    # phase runs from j*pi to (j+1)*pi across band j
    lo, hi = band_j * np.pi, (band_j + 1) * np.pi
    for k in range(-2, max(3, band_j + 3)):
        phase = t + 2.0 * np.pi * k
        if lo - 1e-12 <= phase <= hi + 1e-12:
            return (phase / np.pi) ** 2
    raise ConfigError(f"t={t} does not fold into band {band_j}")


def fourier_line_norm_sq(f, support, nodes=4096):
    """||f||^2 over the line by plain high-order quadrature on the support."""
    lo, hi = support
    xs = np.linspace(lo, hi, nodes)
    fv = np.abs(np.asarray(f(xs), dtype=complex)) ** 2
    return float(np.trapezoid(fv, xs))
