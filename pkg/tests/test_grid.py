import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmsphere.grid import (
    GridFunction,
    ResolutionError,
    SpectralCoeffs,
    basis_index,
    basis_labels,
    build_grid,
    default_grid,
    gauss_legendre,
    inner_product,
    sh_analyze,
    sh_synthesize,
    ylm,
)


def test_gauss_legendre_four_point_rule():
    x, w, res = gauss_legendre(4)
    a = np.sqrt(3 / 7 - 2 / 7 * np.sqrt(6 / 5))
    b = np.sqrt(3 / 7 + 2 / 7 * np.sqrt(6 / 5))
    assert np.allclose(np.sort(x), [-b, -a, a, b], atol=1e-15)
    assert abs(w.sum() - 2.0) < 1e-14
    assert res < 1e-13


@pytest.mark.parametrize("n", [1, 2, 7, 40, 101])
def test_gauss_legendre_matches_numpy(n):
    x, w, _ = gauss_legendre(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    order = np.argsort(x)
    assert np.allclose(x[order], xr, atol=1e-14)
    assert np.allclose(w[order], wr, atol=1e-14)


def test_basis_ordering():
    assert basis_index(0, 0) == 0
    assert basis_index(1, -1) == 1
    assert basis_index(2, 2) == 8
    assert basis_labels(1) == [(0, 0), (1, -1), (1, 0), (1, 1)]
    with pytest.raises(ValueError):
        basis_index(1, 2)


def test_capacity_and_default_grid():
    g = default_grid(30)
    assert g.shape == (40, 81)
    assert g.capacity == 39
    with pytest.raises(ResolutionError):
        build_grid(10, 15).require_band(8)


def test_constant_and_cos_theta_coefficients():
    g = build_grid(8, 17)
    theta, _ = g.mesh
    c = sh_analyze(GridFunction(np.ones(g.shape, complex), g), 4)
    assert abs(c[0, 0] - 2 * np.sqrt(np.pi)) < 1e-14
    c = sh_analyze(GridFunction(np.cos(theta).astype(complex), g), 4)
    assert abs(c[1, 0] - np.sqrt(4 * np.pi / 3)) < 1e-14
    assert np.sum(np.abs(c.coeffs)) - abs(c[1, 0]) < 1e-13


def test_condon_shortley_phase():
    g = build_grid(6, 13)
    theta, phi = g.mesh
    y11 = -np.sqrt(3 / (8 * np.pi)) * np.sin(theta) * np.exp(1j * phi)
    assert np.allclose(ylm(1, 1, g).values, y11, atol=1e-15)
    y1m = ylm(1, -1, g).values
    assert np.allclose(y1m, -np.conj(ylm(1, 1, g).values), atol=1e-15)


def test_orthonormality():
    L = 6
    g = default_grid(L)
    basis = sh_synthesize(SpectralCoeffs.identity_batch(L), g)
    gram = inner_product(GridFunction(basis.values[:, None], g), GridFunction(basis.values[None, :], g))
    assert np.allclose(gram, np.eye((L + 1) ** 2), atol=1e-13)


def test_band_violation_raises():
    g = build_grid(6, 13)
    with pytest.raises(ResolutionError):
        sh_synthesize(SpectralCoeffs(9, np.zeros(100, complex)), g)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 12), st.integers(0, 2**31 - 1))
def test_round_trip_and_parseval(L, seed):
    rng = np.random.default_rng(seed)
    n = (L + 1) ** 2
    c = SpectralCoeffs(L, rng.normal(size=n) + 1j * rng.normal(size=n))
    g = default_grid(L)
    f = sh_synthesize(c, g)
    back = sh_analyze(f, L)
    assert np.allclose(back.coeffs, c.coeffs, atol=1e-12)
    norm2 = inner_product(f, f).real
    assert abs(norm2 - np.sum(np.abs(c.coeffs) ** 2)) < 1e-10 * max(1.0, norm2)
