import numpy as np
import pytest

from floquet1d import (expand_standard_form, free_spec, monodromy,
                       floquet_vector, cofactor_vector, eval_E, weights,
                       gelfand_forward, gelfand_inverse, spectral_matrix,
                       reconstruct_U)
from floquet1d.profiles import bump


@pytest.fixture(scope="module")
def free_quarter(free1_sf):
    # mu = 1/4: rho = +-i, E(x; 1/4, i) = 2 e^{ix/2}
    return monodromy(free1_sf, 0.25, tol=1e-12, dense=True)


def test_cofactor_closed_form(free_quarter):
    fs = floquet_vector(free_quarter, 1j)
    assert np.max(np.abs(fs.v - np.array([2.0, 1j]))) < 1e-10
    # stable formula agrees with the direct minor definition
    ref = cofactor_vector(free_quarter.U, 1j)
    assert np.max(np.abs(fs.v - ref)) < 1e-10


def test_eval_E_closed_form(free1_sf, free_quarter):
    fs = floquet_vector(free_quarter, 1j)
    assert eval_E(free1_sf, fs, 3 * np.pi) == pytest.approx(-2j, abs=1e-9)
    assert eval_E(free1_sf, fs, np.pi / 3) == pytest.approx(
        2 * np.exp(1j * np.pi / 6), abs=1e-9)


def test_eval_E_quasi_periodicity(free1_sf, free_quarter):
    fs = floquet_vector(free_quarter, 1j)
    xs = np.linspace(-2 * np.pi, 2 * np.pi, 17)
    lhs = eval_E(free1_sf, fs, xs + np.pi)
    rhs = 1j * eval_E(free1_sf, fs, xs)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_weights_closed_form(free_quarter):
    p, w = weights(free_quarter, 1j)
    assert p == pytest.approx(1.0 / (8 * np.pi), rel=1e-9)
    assert w == pytest.approx(1.0 / (4 * np.pi), rel=1e-9)
    # consistency p |mu'| = w / 2pi with |mu'| = 1/pi at this point
    assert p / np.pi == pytest.approx(w / (2 * np.pi), rel=1e-9)


def test_spectral_matrix_closed_form(free1_sf, free1_atlas):
    sm = spectral_matrix(free1_sf, free1_atlas, 0.25)
    assert np.max(np.abs(sm.M - sm.M.conj().T)) < 1e-10
    assert np.trace(sm.M).real == pytest.approx(5.0 / (4 * np.pi), rel=1e-8)
    assert np.min(np.linalg.eigvalsh(sm.M)) > -1e-12


def test_reconstruct_free(free1_sf):
    _, _, err = reconstruct_U(free1_sf, 0.25)
    assert err < 1e-10


def test_gelfand_roundtrip_and_isometry():
    f, supp = bump(0.3, 1.0, 4.0)
    xs = np.linspace(0.0, np.pi, 64, endpoint=False)
    F, ts = gelfand_forward(f, 4, xs, 64)
    back = gelfand_inverse(F, ts, range(-4, 5))
    worst = max(np.max(np.abs(back[i] - f(xs + np.pi * r)))
                for i, r in enumerate(range(-4, 5)))
    assert worst < 1e-12
    # isometry with the 1/2pi weight on Q = [0,pi] x [0,2pi]
    dx = np.pi / xs.size
    lhs = np.sum(np.abs(F) ** 2) * dx / ts.size
    rhs = sum(np.sum(np.abs(f(xs + np.pi * r)) ** 2) * dx
              for r in range(-5, 6))
    assert lhs == pytest.approx(rhs, rel=1e-12)
