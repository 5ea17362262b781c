#!/usr/bin/env python3
# Bloch eigenvalues and the spectral matrix of a fourth-order operator.
#
# Uses L = y'''' + (cos(2x) y')' + cos(2x) y, whose spectrum has up to two
# overlapping bands.  For a fixed quasi-momentum phase e^{it} it lists the
# eigenvalues of the boundary-value problem y^(j)(pi) = e^{it} y^(j)(0),
# then samples the 4x4 spectral matrix M(mu) inside the bands and reports
# hermiticity, positivity, and rank (the number of branch bands covering
# mu; branches come in conjugate pairs, so overlaps show up as rank 4).

import numpy as np

from floquet1d import (TrigPoly, OperatorSpec, expand_standard_form,
                       track_branches, detect_bands, bloch_eigs,
                       spectral_matrix)

cos2x = TrigPoly({1: 0.5, -1: 0.5})
sf = expand_standard_form(OperatorSpec(2, (cos2x, cos2x)))

mu_lo, mu_hi = -2.0, 300.0
table = track_branches(sf, mu_lo, mu_hi,
                       grid=np.linspace(mu_lo, mu_hi, 300))
atlas = detect_bands(table, sf)
print("bands of the order-4 operator on [%g, %g]:" % (mu_lo, mu_hi))
for b in atlas.bands:
    flag = " (truncated)" if b.truncated else ""
    print("  k=%d j=%d  [%12.6f, %12.6f]%s"
          % (b.k, b.j, b.mu_interval[0], b.mu_interval[1], flag))
print()

t = 1.1
print("Bloch eigenvalues at t = %.3f (norm identity rel err per root):" % t)
for mu_r, _, rel in bloch_eigs(sf, t, (mu_lo, mu_hi), atlas):
    print("  mu = %16.10f   rel err %.2e" % (mu_r, rel))
print()

print("spectral matrix samples:")
for mu in (-0.06, 5.0, 40.0, 150.0):
    try:
        M = spectral_matrix(sf, atlas, mu).M
    except Exception as exc:
        print("  mu = %8.3f   skipped: %s" % (mu, exc))
        continue
    herm = np.max(np.abs(M - M.conj().T))
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    rank = int(np.sum(ev > 1e-10 * max(ev.max(), 1e-30)))
    print("  mu = %8.3f   rank %d   min eig %10.3e   herm defect %.2e"
          % (mu, rank, ev.min(), herm))
