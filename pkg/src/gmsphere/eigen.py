"""The continuous ``p_z`` eigenfamily and its windowed delta normalization.

Units: ``hbar = r = 1``, so the eigenvalue of ``p_z`` on ``psi_p`` is ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .grid import GridFunction, SphericalGrid, default_grid, sh_analyze, sh_synthesize
from .operators import GmParams, geometric_momentum

__all__ = [
    "EIGEN_P_VALUES",
    "PzEigenfunction",
    "pz_eigenfunction",
    "pz_profile",
    "pz_profile_derivative",
    "eigen_residual",
    "windowed_overlap",
    "windowed_overlap_quadrature",
    "window_annulus",
    "truncation_residual",
]

EIGEN_P_VALUES = (-5.0, -2.0, 0.0, 1.0, 3.0, 7.0)


def pz_profile(p: float, theta) -> np.ndarray:
    """``psi_p(theta) = exp(-i p ln tan(theta/2)) / (2 pi sin(theta))``."""
    theta = np.asarray(theta, dtype=float)
    u = np.log(np.tan(0.5 * theta))
    return np.exp(-1j * p * u) / (2.0 * np.pi * np.sin(theta))


def pz_profile_derivative(p: float, theta) -> np.ndarray:
    """``d psi_p / d theta = psi_p (-cot(theta) - i p / sin(theta))``."""
    theta = np.asarray(theta, dtype=float)
    return pz_profile(p, theta) * (-np.cos(theta) / np.sin(theta) - 1j * p / np.sin(theta))


@dataclass(frozen=True, eq=False)
class PzEigenfunction:
    """``psi_p`` sampled on a grid (phi-independent).

    Deliberately not a :class:`GridFunction`: the profile is not band-limited,
    so the spectral ``apply`` route would differentiate it wrongly.  Use
    :func:`eigen_residual`, which differentiates analytically.
    """

    p: float
    grid: SphericalGrid
    values: np.ndarray

    @property
    def profile(self) -> GridFunction:
        """Samples as a grid function of unknown band (for inner products)."""
        return GridFunction(self.values, self.grid, None)

    def derivative(self) -> np.ndarray:
        theta, _ = self.grid.mesh
        return pz_profile_derivative(self.p, theta)


def pz_eigenfunction(p: float, g: SphericalGrid) -> PzEigenfunction:
    if not np.isfinite(p):
        raise ValueError("eigenvalue label must be finite")
    theta, _ = g.mesh
    return PzEigenfunction(float(p), g, pz_profile(p, theta))


def eigen_residual(psi: PzEigenfunction, annulus=(0.3, np.pi - 0.3)) -> float:
    """``sup |p_z psi - p psi| / sup |psi|`` over grid nodes in the annulus."""
    lo, hi = annulus
    if not 0.0 < lo < hi < np.pi:
        raise ValueError(f"annulus {annulus} must lie strictly inside (0, pi)")
    theta, phi = psi.grid.mesh
    inside = (theta >= lo) & (theta <= hi)
    if not inside.any():
        raise ValueError(f"no grid nodes fall in the annulus {annulus}")
    op = geometric_momentum("z", GmParams())
    out = op.combine(psi.values, psi.derivative(), 0.0 * psi.values, theta, phi)
    diff = np.abs(out - psi.p * psi.values)[inside]
    return float(diff.max() / np.abs(psi.values[inside]).max())


def windowed_overlap(p1: float, p2: float, Z: float) -> float:
    """``(1/2pi) int_{-Z}^{Z} exp(i (p1 - p2) u) du`` in closed form."""
    if not Z > 0:
        raise ValueError("window half-width Z must be positive")
    d = p1 - p2
    if d == 0:
        return Z / np.pi
    return float(np.sin(d * Z) / (np.pi * d))


def window_annulus(Z: float) -> tuple[float, float]:
    """The polar band ``|ln tan(theta/2)| <= Z``."""
    return 2.0 * np.arctan(np.exp(-Z)), 2.0 * np.arctan(np.exp(Z))


def windowed_overlap_quadrature(p1: float, p2: float, Z: float) -> complex:
    """``<psi_p1, psi_p2>`` on the sphere restricted to the window band, by quadrature in theta."""
    if not Z > 0:
        raise ValueError("window half-width Z must be positive")
    lo, hi = window_annulus(Z)

    def integrand(t):
        return np.conj(pz_profile(p1, t)) * pz_profile(p2, t) * 2.0 * np.pi * np.sin(t)

    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-13)
    # oscillation in theta is fastest near the window edges; split at the equator
    re = sum(scipy.integrate.quad(lambda t: integrand(t).real, a, b, **opts)[0]
             for a, b in ((lo, 0.5 * np.pi), (0.5 * np.pi, hi)))
    im = sum(scipy.integrate.quad(lambda t: integrand(t).imag, a, b, **opts)[0]
             for a, b in ((lo, 0.5 * np.pi), (0.5 * np.pi, hi)))
    return complex(re, im)


def truncation_residual(p: float, l_max: int, annulus=(0.3, np.pi - 0.3)) -> float:
    """Relative sup error of the degree-``l_max`` harmonic projection of ``psi_p`` on the annulus."""
    g = default_grid(l_max)
    psi = pz_eigenfunction(p, g)
    back = sh_synthesize(sh_analyze(psi.profile, l_max), g).values
    theta, _ = g.mesh
    inside = (theta >= annulus[0]) & (theta <= annulus[1])
    return float(np.abs(back - psi.values)[inside].max() / np.abs(psi.values[inside]).max())


def check_eigen(grid: SphericalGrid | None = None, p_values=EIGEN_P_VALUES,
                annulus=(0.3, np.pi - 0.3), n_random: int = 20, seed: int = 0, tolerances=None):
    from .results import make_result

    grid = grid or default_grid(30)
    rec = {"grid": list(grid.shape), "annulus": list(map(float, annulus)),
           "p_values": list(p_values)}
    worst = max(eigen_residual(pz_eigenfunction(p, grid), annulus) for p in p_values)
    rng = np.random.default_rng(seed)
    off = 0.0
    for _ in range(n_random):
        p2 = rng.uniform(-3.0, 3.0)
        p1 = p2 + rng.uniform(-5.0, 5.0)
        Z = rng.uniform(0.5, 4.0)
        off = max(off, abs(windowed_overlap_quadrature(p1, p2, Z) - windowed_overlap(p1, p2, Z)))
    diag = max(abs(windowed_overlap_quadrature(p, p, Z) - Z / np.pi)
               for p, Z in ((0.0, 0.5), (1.5, 1.0), (-2.0, 2.0), (4.0, 4.0), (7.0, 6.0)))
    tails = [truncation_residual(2.0, L) for L in (8, 16, 32)]
    return [
        make_result("eigen.residual", "p_z psi_p = p psi_p on the annulus (relative sup)",
                    rec, worst, tolerances),
        make_result("eigen.overlap",
                    "<psi_p1, psi_p2>_window = sin((p1 - p2) Z) / (pi (p1 - p2))",
                    {**rec, "n_random": n_random, "seed": seed}, off, tolerances),
        make_result("eigen.diagonal", "<psi_p, psi_p>_window = Z / pi", rec, diag, tolerances),
        make_result("eigen.not_band_limited",
                    "harmonic projection error of psi_2 stays large as l_max doubles",
                    {"l_max": [8, 16, 32]}, min(tails), tolerances, sense="min",
                    values={"projection_errors": tails}),
    ]
