import numpy as np
import pytest

from floquet1d import (expand_standard_form, free_spec, mathieu_spec,
                       monodromy, eigen_multipliers, omega_order,
                       label_asymptotic, track_branches, involution_check,
                       AmbiguousLabeling)
from floquet1d.multipliers import OmegaOrder


def test_omega_order_properties():
    for n in (1, 2, 3):
        om = omega_order(n)
        assert om.size == 2 * n
        # roots of (-1)^n
        assert np.max(np.abs(om ** (2 * n) - (-1.0) ** n)) < 1e-12
        # non-increasing real parts, omega_n = i (1-based)
        assert np.all(np.diff(om.real) < 1e-9)
        assert om[n - 1] == pytest.approx(1j, abs=1e-12)


def test_eigen_multipliers_match_closed_form():
    sf = expand_standard_form(free_spec(1))
    mu = 50.0
    vals = eigen_multipliers(monodromy(sf, mu, tol=1e-11, want_dmu=False))
    lam = np.sqrt(mu)
    refs = np.array([np.exp(1j * lam * np.pi), np.exp(-1j * lam * np.pi)])
    for r in refs:
        assert np.min(np.abs(vals - r)) < 1e-9


def test_label_ambiguity_at_collision():
    # mu = 4: both free multipliers equal 1; labels cannot be trusted
    sf = expand_standard_form(free_spec(1))
    vals = eigen_multipliers(monodromy(sf, 4.0, tol=1e-11, want_dmu=False))
    with pytest.raises(AmbiguousLabeling):
        label_asymptotic(vals + np.array([1e-5, -1e-5]), 4.0, OmegaOrder(1))


def test_track_free_branch_phases():
    # upper free branch: log rho = i sqrt(mu) pi, continuously unwrapped
    sf = expand_standard_form(free_spec(1))
    table = track_branches(sf, 0.5, 30.0, num_points=120)
    k_up = 0
    ref = 1j * np.sqrt(table.mu_grid) * np.pi
    # unwrapping is continuous but anchored at the seed: allow one global
    # 2 pi multiple
    diff = table.log_rho[k_up] - ref
    shift = np.round(diff[0].imag / (2 * np.pi))
    err = np.abs(diff - 2j * np.pi * shift)
    # at mu = m^2 the pair collides with a defective Jordan block and the
    # computed eigenvalues split like sqrt(eps); judge away from there
    lam = np.sqrt(table.mu_grid)
    clear = np.abs(lam - np.round(lam)) > 1e-2
    assert np.max(err[clear]) < 1e-7
    assert np.max(err) < 1e-2
    assert not table.collisions or all(
        ev.on_unit_circle for ev in table.collisions)


def test_involution_small():
    sf = expand_standard_form(mathieu_spec(1.0))
    table = track_branches(sf, 1.0, 20.0, num_points=60)
    assert involution_check(table) < 1e-8
