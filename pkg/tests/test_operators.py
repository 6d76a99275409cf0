import numpy as np
import pytest

from gmsphere.grid import GridFunction, ResolutionError, default_grid, sh_analyze, ylm
from gmsphere.operators import (
    GmParams,
    SeparableFunction,
    angular_momentum,
    apply,
    canonical_phi,
    canonical_theta,
    commutator_apply,
    geometric_momentum,
    hamiltonian_apply,
    make_operator,
    multiplication,
    position,
    separable_ylm,
)

G = default_grid(6)


def coeffs(f, L=8):
    return sh_analyze(f, L)


def test_params_validation_and_gamma():
    with pytest.raises(ValueError):
        GmParams(hbar=0.0)
    with pytest.raises(ValueError):
        GmParams(r=-1.0)
    assert GmParams(1, 0).gamma == 1
    assert GmParams(0, 0).gamma == 0
    assert GmParams(2, 0).gamma == 0
    assert abs(GmParams(1, 1).gamma - 2) < 1e-15


def test_pz_on_y00():
    c = coeffs(apply(geometric_momentum("z"), ylm(0, 0, G)))
    assert abs(c[1, 0] - 1j / np.sqrt(3)) < 1e-13
    assert np.sum(np.abs(c.coeffs)) - abs(c[1, 0]) < 1e-12


def test_lz_eigenrelation():
    f = apply(angular_momentum("z"), ylm(2, 1, G))
    assert np.allclose(f.values, ylm(2, 1, G).values, atol=1e-13)


def test_position_x_on_y00():
    c = coeffs(apply(position("x"), ylm(0, 0, G)))
    assert abs(c[1, -1] - 1 / np.sqrt(6)) < 1e-14
    assert abs(c[1, 1] + 1 / np.sqrt(6)) < 1e-14


def test_momentum_commutator_gives_angular_momentum():
    # [p_x, p_y] = -i L_z in units hbar = r = 1
    f = commutator_apply(geometric_momentum("x"), geometric_momentum("y"), ylm(1, 1, G))
    assert np.allclose(f.values, -1j * ylm(1, 1, G).values, atol=1e-12)


def test_hamiltonian_both_routes():
    g = hamiltonian_apply(ylm(2, 1, G))
    assert np.allclose(g.values, 3 * ylm(2, 1, G).values, atol=1e-12)
    theta = np.linspace(0.3, 2.8, 7)
    s = hamiltonian_apply(separable_ylm(2, 1, theta))
    assert np.allclose(s.values, 3 * separable_ylm(2, 1, theta).values, atol=1e-12)


def test_grid_and_separable_routes_agree():
    theta = G.theta_nodes
    f = apply(geometric_momentum("z"), ylm(3, 1, G)).values[:, 0]
    s = apply(geometric_momentum("z"), separable_ylm(3, 1, theta)).values
    assert np.allclose(f, s, atol=1e-12)


def test_ptheta_rejected_on_grid():
    with pytest.raises(ResolutionError):
        apply(canonical_theta(), apply(canonical_theta(), ylm(1, 0, G)))


def test_separable_route_needs_azimuthal_operator():
    f = separable_ylm(1, 1, np.array([1.0]))
    with pytest.raises(ValueError):
        apply(geometric_momentum("x"), f)


def test_separable_arithmetic_needs_same_m():
    t = np.array([1.0])
    with pytest.raises(ValueError):
        separable_ylm(1, 1, t) + separable_ylm(1, 0, t)


def test_pphi_and_lz_identical():
    f = ylm(3, -2, G)
    assert np.allclose(apply(canonical_phi(), f).values, apply(angular_momentum("z"), f).values)


def test_make_operator_dispatch():
    assert make_operator("position", "y").name == "x_y"
    assert make_operator("canonical_theta").pole_singular
    with pytest.raises(ValueError):
        make_operator("position")
    with pytest.raises(ValueError):
        make_operator("warp")
    with pytest.raises(ValueError):
        position("w")
    op = multiplication(lambda t, p: np.cos(t) ** 2, band=2)
    f = apply(op, ylm(0, 0, G))
    assert isinstance(f, GridFunction)


def test_curvature_term_is_affine():
    f = ylm(2, 1, G)
    k = GmParams(0.7, -0.4).kappa
    a = apply(geometric_momentum("y", GmParams(0.7, -0.4)), f).values
    b = apply(geometric_momentum("y", GmParams(0, 0)), f).values
    c = apply(position("y"), f).values
    assert np.allclose(a, b + k * c, atol=1e-13)


def test_separable_from_profile():
    t = np.array([0.5, 1.5])
    f = SeparableFunction.from_profile(lambda x: np.sin(x) ** 2, 2, t)
    assert np.allclose(f.values, np.sin(t) ** 2)
    assert np.allclose(f.profile.derivative(1), 2 * np.sin(t) * np.cos(t))
