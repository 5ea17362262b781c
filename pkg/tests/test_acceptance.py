"""Acceptance gate: one test per criterion, run with pytest -v.

Each test prints a single summary line (visible with -s or on failure);
the pytest verdict line itself is the pass/fail record.
"""

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.optimize import linear_sum_assignment

from floquet1d import (expand_standard_form, free_spec, monodromy,
                       char_poly, eigen_multipliers, band_nodes, parseval,
                       forward_transform, inverse_transform, bloch_eigs,
                       spectral_matrix, reconstruct_U, hill_compare,
                       gelfand_forward, gelfand_inverse, eval_E)
from floquet1d.multipliers import _log_dist
from floquet1d.oracles import free_multiplier, mathieu_fourier_edges
from floquet1d.profiles import bump

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def mathieu_nodes_pair(mathieu_sf, mathieu_atlas):
    return {N: band_nodes(mathieu_sf, mathieu_atlas, N) for N in (3, 6, 12)}


@pytest.fixture(scope="module")
def n2_nodes_pair(n2_sf, n2_atlas):
    return {N: band_nodes(n2_sf, n2_atlas, N) for N in (4, 8)}


def test_criterion_01_free_multipliers():
    worst = 0.0
    for n in (1, 2):
        sf = expand_standard_form(free_spec(n))
        for mu in np.geomspace(1.0, 1e4, 200):
            vals = eigen_multipliers(
                monodromy(sf, mu, tol=1e-9, want_dmu=False))
            refs = np.array([free_multiplier(n, mu, k) for k in range(2 * n)])
            cost = np.array([[_log_dist(v, r) for v in vals] for r in refs])
            rows, cols = linear_sum_assignment(cost)
            for k, i in zip(rows, cols):
                dev = (abs(np.log(abs(vals[i])) - np.log(abs(refs[k])))
                       + abs(np.angle(vals[i] / refs[k])))
                worst = max(worst,
                            dev / max(1.0, abs(np.log(abs(refs[k])))))
    print(f"criterion 1: free multiplier max rel dev {worst:.2e} (<= 1e-6)")
    assert worst <= 1e-6


def test_criterion_02_det_and_palindromy(mathieu_sf, n2_sf):
    worst_det = worst_pal = 0.0
    for sf in (mathieu_sf, n2_sf):
        for mu in np.linspace(-2.0, 100.0, 200):
            cp = char_poly(monodromy(sf, mu, tol=1e-10, want_dmu=False))
            worst_det = max(worst_det, abs(np.prod(cp.roots) - 1.0))
            A = cp.A
            scale = np.max(np.abs(A))
            worst_pal = max(worst_pal,
                            float(np.max(np.abs(A - A[::-1]))) / scale)
    print(f"criterion 2: |det U - 1| {worst_det:.2e} (<= 1e-9), "
          f"palindromy {worst_pal:.2e} (<= 1e-8)")
    assert worst_det <= 1e-9
    assert worst_pal <= 1e-8


def test_criterion_03_mathieu_edges(mathieu_atlas):
    got = sorted({e for b in mathieu_atlas.bands if not b.truncated
                  for e in b.mu_interval})
    ref = mathieu_fourier_edges(1.0, count=6)
    worst = max(min(abs(g - r) for g in got) for r in ref)
    print(f"criterion 3: Mathieu edge max abs dev {worst:.2e} (<= 1e-6)")
    assert worst <= 1e-6


def test_criterion_04_weight_identity(mathieu_sf, mathieu_nodes_pair):
    worst_id = worst_res = 0.0
    for bn in mathieu_nodes_pair[6]:
        for i in range(bn.t.size):
            lhs = bn.p[i] * abs(bn.dmu[i])
            rhs = bn.w[i] / TWO_PI
            worst_id = max(worst_id, abs(lhs - rhs) / rhs)
            cp = char_poly(monodromy(mathieu_sf, bn.mu[i], tol=1e-11))
            rho = bn.rho[i]
            term1 = cp.delta_mu(rho) * bn.dmu[i]
            term2 = 1j * rho * cp.delta_rho(rho)
            scale = max(abs(term1), abs(term2))
            worst_res = max(worst_res, abs(term1 + term2) / scale)
    print(f"criterion 4: weight identity {worst_id:.2e} (<= 1e-8), "
          f"(mu' defining identity) residual {worst_res:.2e} (<= 1e-8)")
    assert worst_id <= 1e-8
    assert worst_res <= 1e-8


def test_criterion_05_bloch_norm_and_orthogonality(mathieu_sf, mathieu_atlas):
    cands = [0.7, 1.3, np.pi / 2, 2.0, 2.6, 0.9, 1.9]
    ts = [t for t in cands
          if np.min(np.abs(mathieu_atlas.exceptional_t - t)) > 1e-4][:5]
    assert len(ts) == 5
    xq, wq = leggauss(96)
    xq = 0.5 * np.pi * (xq + 1.0)
    wq = wq * 0.5 * np.pi
    total = 0
    worst_norm = worst_orth = 0.0
    for t in ts:
        out = bloch_eigs(mathieu_sf, t, (-2.0, 105.0), mathieu_atlas)
        total += len(out)
        for _, _, rel in out:
            worst_norm = max(worst_norm, rel)
        E = []
        for _, fs, _ in out:
            vals = eval_E(mathieu_sf, fs, xq)
            E.append(vals / np.sqrt(np.sum(wq * np.abs(vals) ** 2)))
        for a in range(len(E)):
            for b in range(a):
                worst_orth = max(worst_orth,
                                 abs(np.sum(wq * E[a] * np.conj(E[b]))))
    print(f"criterion 5: {total} Bloch pairs, norm identity max rel "
          f"{worst_norm:.2e} (<= 1e-6), orthogonality {worst_orth:.2e} "
          f"(<= 1e-8)")
    assert total >= 50
    assert worst_norm <= 1e-6
    assert worst_orth <= 1e-8


def test_criterion_06_parseval(mathieu_sf, mathieu_nodes_pair,
                               n2_sf, n2_nodes_pair):
    f, supp = bump(0.3, 1.0, 4.0)
    f2, supp2 = bump(0.3, 1.2, 4.5)
    report = []
    for sf, pair, ff, ss in ((mathieu_sf, mathieu_nodes_pair, f, supp),
                             (n2_sf, n2_nodes_pair, f2, supp2)):
        rels = []
        for N in sorted(pair)[:2]:
            _, _, rel = parseval(sf, pair[N], ff, ss)
            rels.append(rel)
        report.append(rels)
        assert rels[-1] <= 1e-3
        assert rels[1] < rels[0]
    print(f"criterion 6: Parseval defects n=1 {report[0]}, n=2 {report[1]} "
          "(<= 1e-3, decreasing)")


def test_criterion_07_roundtrip(mathieu_sf, mathieu_nodes_pair,
                                n2_sf, n2_nodes_pair):
    xs = np.linspace(-4 * np.pi, 4 * np.pi, 401)
    f, supp = bump(0.3, 1.0, 4.0)
    f2, supp2 = bump(0.3, 1.2, 4.5)
    errs = []
    for sf, nodes, ff, ss in ((mathieu_sf, mathieu_nodes_pair[12], f, supp),
                              (n2_sf, n2_nodes_pair[8], f2, supp2)):
        tv = forward_transform(sf, nodes, ff, ss)
        rec = inverse_transform(sf, tv, xs)
        ref = ff(xs)
        err = np.sqrt(np.trapezoid(np.abs(rec - ref) ** 2, xs)
                      / np.trapezoid(np.abs(ref) ** 2, xs))
        errs.append(float(err))
    print(f"criterion 7: roundtrip L2 rel errors {errs} (<= 1e-3)")
    assert max(errs) <= 1e-3


def test_criterion_08_spectral_matrix(mathieu_sf, mathieu_atlas):
    rng = np.random.default_rng(0)
    ivs = [iv for iv in mathieu_atlas.spectrum if iv[1] - iv[0] > 1e-3]
    lens = np.array([iv[1] - iv[0] for iv in ivs])
    worst_herm, worst_eig = 0.0, np.inf
    for _ in range(100):
        iv = ivs[rng.choice(len(ivs), p=lens / lens.sum())]
        pad = 1e-3 * (iv[1] - iv[0])
        mu = rng.uniform(iv[0] + pad, iv[1] - pad)
        sm = spectral_matrix(mathieu_sf, mathieu_atlas, mu)
        worst_herm = max(worst_herm,
                         float(np.max(np.abs(sm.M - sm.M.conj().T))))
        ev = np.linalg.eigvalsh(0.5 * (sm.M + sm.M.conj().T))
        worst_eig = min(worst_eig, float(ev.min()))
        rank = int(np.sum(ev > 1e-10 * max(1.0, ev.max())))
        assert rank == len(sm.contributing)
    print(f"criterion 8: hermiticity {worst_herm:.2e} (<= 1e-10), "
          f"min eigenvalue {worst_eig:.2e} (>= -1e-10), ranks match")
    assert worst_herm <= 1e-10
    assert worst_eig >= -1e-10


def test_criterion_09_reconstruction(mathieu_sf, mathieu_atlas):
    mus = []
    for b in mathieu_atlas.bands:
        if b.degenerate or b.truncated or b.k != 0:
            continue
        lo, hi = b.mu_interval
        mus.extend(lo + f * (hi - lo) for f in (0.3, 0.7))
    worst = 0.0
    for mu in sorted(mus)[:20]:
        _, _, err = reconstruct_U(mathieu_sf, mu)
        worst = max(worst, float(err))
    print(f"criterion 9: reconstruction max rel err {worst:.2e} (<= 1e-6) "
          f"at {min(20, len(mus))} points")
    assert len(mus) >= 20
    assert worst <= 1e-6


def test_criterion_10_hill_cross_check(mathieu_sf, mathieu_nodes_pair):
    f, supp = bump(0.3, 1.0, 4.0)
    xs = np.linspace(-2 * np.pi, 2 * np.pi, 101)
    gap = hill_compare(mathieu_sf, mathieu_nodes_pair[6], f, xs, supp)
    print(f"criterion 10: Hill formula max pointwise gap {gap:.2e} (<= 1e-6)")
    assert gap <= 1e-6


def test_criterion_11_gelfand():
    f, supp = bump(0.3, 1.0, 4.0)
    xs = np.linspace(0.0, np.pi, 128, endpoint=False)
    F, ts = gelfand_forward(f, 5, xs, 128)
    back = gelfand_inverse(F, ts, range(-5, 6))
    round_err = max(np.max(np.abs(back[i] - f(xs + np.pi * r)))
                    for i, r in enumerate(range(-5, 6)))
    dx = np.pi / xs.size
    lhs = np.sum(np.abs(F) ** 2) * dx / ts.size
    rhs = sum(np.sum(np.abs(f(xs + np.pi * r)) ** 2) * dx
              for r in range(-6, 7))
    iso = abs(lhs - rhs) / rhs
    print(f"criterion 11: Gelfand isometry rel {iso:.2e} (<= 1e-8), "
          f"roundtrip {round_err:.2e} (<= 1e-10)")
    assert iso <= 1e-8
    assert round_err <= 1e-10
