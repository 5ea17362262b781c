import numpy as np
import pytest

from floquet1d import parametrize_band, spectrum_union
from floquet1d.oracles import (free_band_edges, free_hill_mu_of_t,
                               mathieu_fourier_edges)


def _edges(atlas):
    return sorted({e for b in atlas.bands if not b.truncated
                   for e in b.mu_interval})


def test_free_hill_edges(free1_atlas):
    got = _edges(free1_atlas)
    # spectrum [0, inf): double edges at m^2 merge into single points
    ref = [0.0, 1.0, 4.0, 9.0, 16.0, 25.0]
    for r in ref:
        assert min(abs(g - r) for g in got) < 1e-8


def test_free_hill_band_sheets(free1_atlas):
    # band j of branch 0 alternates between the [0,pi] and [pi,2pi] sheets
    bands = sorted(free1_atlas.bands_of_branch(0), key=lambda b: b.j)
    for b in bands:
        lo, hi = b.t_interval
        # each interval sits inside one sheet, [0,pi] or [pi,2pi]
        assert hi <= np.pi + 1e-9 or lo >= np.pi - 1e-9
        assert b.orientation in (-1, 1)


def test_free_hill_mu_of_t(free1_sf, free1_atlas):
    band = next(b for b in free1_atlas.bands
                if not b.truncated and b.mu_interval[0] > 0.5
                and b.mu_interval[1] < 4.5)
    mesh = parametrize_band(free1_sf, band, 6)
    for t, mu in zip(mesh.t, mesh.mu):
        assert mu == pytest.approx(free_hill_mu_of_t(t, 1), abs=1e-8)
    # d mu/dt = 2 sqrt(mu) * orientation / pi... check against FD instead
    tm = 0.5 * (mesh.t[0] + mesh.t[1])
    h = 1e-5
    # finite difference along the band using the closed form
    fd = (free_hill_mu_of_t(tm + h, 1) - free_hill_mu_of_t(tm - h, 1)) / (2 * h)
    i = 0
    assert np.sign(mesh.dmu_dt[i]) == np.sign(fd)


def test_mathieu_edges_match_fourier_oracle(mathieu_atlas):
    got = _edges(mathieu_atlas)
    ref = mathieu_fourier_edges(1.0, count=6)
    for r in ref:
        assert min(abs(g - r) for g in got) < 1e-7


def test_mathieu_micro_gap_resolved(mathieu_atlas):
    # the second gap is ~3e-2 wide near mu = 9; both edges must be present
    ref = mathieu_fourier_edges(1.0, count=8)
    got = _edges(mathieu_atlas)
    for r in ref[3:7]:
        assert min(abs(g - r) for g in got) < 1e-7


def test_spectrum_union_sorted_disjoint(mathieu_atlas):
    ivs = spectrum_union(mathieu_atlas)
    for (a, b), (c, d) in zip(ivs, ivs[1:]):
        assert a < b <= c < d


def test_exceptional_t_contains_edges(mathieu_atlas):
    # 0, pi, 2pi are always exceptional (rho = +-1 edges live there)
    for t in (0.0, np.pi, 2 * np.pi):
        assert np.min(np.abs(mathieu_atlas.exceptional_t - t)) < 1e-12


def test_mesh_nodes_interior(mathieu_sf, mathieu_atlas):
    band = next(b for b in mathieu_atlas.bands
                if not (b.degenerate or b.truncated))
    mesh = parametrize_band(mathieu_sf, band, 8)
    t_lo, t_hi = band.t_interval
    assert np.all(mesh.t > t_lo) and np.all(mesh.t < t_hi)
    mu_lo, mu_hi = band.mu_interval
    assert np.all(mesh.mu > mu_lo - 1e-12) and np.all(mesh.mu < mu_hi + 1e-12)
    assert np.all(np.sign(mesh.dmu_dt) == band.orientation)


def test_free_band_edges_oracle():
    assert list(free_band_edges(5)) == [0.0, 1.0, 1.0, 4.0, 4.0]
