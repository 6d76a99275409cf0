"""Gauss-Legendre grids on the sphere and spherical-harmonic transforms.

Conventions used throughout the package:

* ``Y_lm(theta, phi) = ybar_lm(theta) * exp(i m phi)``, orthonormal on the unit
  sphere, with the Condon-Shortley phase, and
  ``Y_{l,-m} = (-1)**m * conj(Y_lm)``.
* Coefficient vectors are stored flat in *basis order*: ``l`` ascending and,
  within each ``l``, ``m`` from ``-l`` to ``l``.  The ordinal of ``(l, m)`` is
  ``l*l + l + m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "ResolutionError",
    "GridMismatchError",
    "SphericalGrid",
    "GridFunction",
    "SpectralCoeffs",
    "basis_index",
    "basis_labels",
    "gauss_legendre",
    "normalized_legendre",
    "build_grid",
    "default_grid",
    "sh_synthesize",
    "sh_analyze",
    "inner_product",
    "ylm",
]


class ResolutionError(ValueError):
    """Raised when a grid cannot represent a requested band limit exactly."""


class GridMismatchError(ValueError):
    """Raised when two grid functions live on different grids."""


def basis_index(l: int, m: int) -> int:
    if abs(m) > l:
        raise ValueError(f"|m| must not exceed l, got l={l}, m={m}")
    return l * l + l + m


def basis_labels(l_max: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]


def gauss_legendre(n: int, tol: float = 1e-15, max_iter: int = 100):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Roots of P_n are found by Newton iteration from the Tricomi initial
    guesses.  Returns ``(x, w, residual)`` with ``x`` ascending and
    ``residual = max |P_n(x_k)|``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(max_iter):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order], float(np.max(np.abs(p)))


def _legendre_and_derivative(n: int, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def normalized_legendre(l_max: int, m: int, cos, sin):
    """Yield ``ybar_lm`` for ``l = m .. l_max`` (``m >= 0``).

    Only ``+ - *`` with floats are applied to ``cos`` and ``sin``, so any
    array-like with that arithmetic works (numpy arrays, Taylor jets).
    """
    if m < 0 or m > l_max:
        return
    pmm = 0.0 * cos + 1.0 / np.sqrt(4.0 * np.pi)
    for k in range(1, m + 1):
        pmm = -np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin * pmm
    yield pmm
    if m == l_max:
        return
    prev2 = pmm
    prev1 = np.sqrt(2.0 * m + 3.0) * cos * pmm
    yield prev1
    for l in range(m + 2, l_max + 1):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        cur = a * (cos * prev1 - b * prev2)
        yield cur
        prev2, prev1 = prev1, cur


def _legendre_tables(l_max: int, theta: np.ndarray):
    """Tables ``P[m + l_max, l, j]`` and ``dP`` of ybar and d(ybar)/dtheta.

    Entries with ``l < |m|`` are zero.  The derivative uses the ladder
    relation, which needs no division by sin(theta).
    """
    cos, sin = np.cos(theta), np.sin(theta)
    n_m = 2 * l_max + 1
    P = np.zeros((n_m, l_max + 1, theta.size))
    for m in range(l_max + 1):
        for l, val in enumerate(normalized_legendre(l_max, m, cos, sin), start=m):
            P[l_max + m, l] = val
            if m:
                P[l_max - m, l] = (-1) ** m * val
    dP = np.zeros_like(P)
    for m in range(-l_max, l_max + 1):
        l = np.arange(l_max + 1, dtype=float)
        up = np.sqrt(np.clip((l - m) * (l + m + 1), 0.0, None))
        dn = np.sqrt(np.clip((l + m) * (l - m + 1), 0.0, None))
        term = np.zeros((l_max + 1, theta.size))
        if m + 1 <= l_max:
            term += up[:, None] * P[l_max + m + 1]
        if m - 1 >= -l_max:
            term -= dn[:, None] * P[l_max + m - 1]
        dP[l_max + m] = 0.5 * term
        dP[l_max + m, : abs(m)] = 0.0
    return P, dP


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform azimuth grid."""

    n_theta: int
    n_phi: int
    theta_nodes: np.ndarray = field(repr=False)
    theta_weights: np.ndarray = field(repr=False)
    phi_nodes: np.ndarray = field(repr=False)
    legendre_residual: float = field(default=0.0, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    @property
    def capacity(self) -> int:
        """Largest band limit analyzed exactly by :func:`sh_analyze`."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta_nodes, self.phi_nodes, indexing="ij")

    @cached_property
    def tables(self):
        return _legendre_tables(self.capacity, self.theta_nodes)

    def same_as(self, other: "SphericalGrid") -> bool:
        return self is other or (
            self.n_theta == other.n_theta and self.n_phi == other.n_phi
        )

    def require_band(self, l_max: int) -> None:
        if l_max < 0:
            raise ValueError("band limit must be non-negative")
        if l_max > self.capacity:
            raise ResolutionError(
                f"grid ({self.n_theta}, {self.n_phi}) resolves l <= {self.capacity}; "
                f"band {l_max} needs n_theta >= {l_max + 1} and n_phi >= {2 * l_max + 1}"
            )


def build_grid(n_theta: int, n_phi: int) -> SphericalGrid:
    if n_theta < 1 or n_phi < 1:
        raise ValueError(f"grid counts must be >= 1, got ({n_theta}, {n_phi})")
    x, w, res = gauss_legendre(n_theta)
    # descending x -> ascending theta
    theta = np.arccos(x[::-1])
    return SphericalGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        theta_nodes=theta,
        theta_weights=w[::-1].copy(),
        phi_nodes=2.0 * np.pi * np.arange(n_phi) / n_phi,
        legendre_residual=res,
    )


def default_grid(l_max: int) -> SphericalGrid:
    """Grid (l_max + 10, 2 l_max + 21): keeps degree-2 operator chains exact."""
    return build_grid(l_max + 10, 2 * l_max + 21)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a grid; leading axes, if any, index a batch.

    ``band`` is the known band limit of the sampled function, or ``None``
    when it is unknown or the function is not band-limited.
    """

    values: np.ndarray
    grid: SphericalGrid
    band: int | None = None

    def __post_init__(self):
        if self.values.shape[-2:] != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def __add__(self, other):
        return _combine(self, other, np.add)

    def __sub__(self, other):
        return _combine(self, other, np.subtract)

    def __mul__(self, scalar):
        return GridFunction(self.values * scalar, self.grid, self.band)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values, self.grid, self.band)


def _combine(f: GridFunction, h: GridFunction, op) -> GridFunction:
    if not f.grid.same_as(h.grid):
        raise GridMismatchError("grid functions live on different grids")
    band = None if f.band is None or h.band is None else max(f.band, h.band)
    return GridFunction(op(f.values, h.values), f.grid, band)


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Harmonic coefficients in basis order, shape ``(..., (l_max+1)**2)``."""

    l_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape[-1] != (self.l_max + 1) ** 2:
            raise ValueError("coefficient length does not match l_max")

    def __getitem__(self, lm: tuple[int, int]):
        return self.coeffs[..., basis_index(*lm)]

    @classmethod
    def unit(cls, l_max: int, l: int, m: int) -> "SpectralCoeffs":
        c = np.zeros((l_max + 1) ** 2, dtype=complex)
        c[basis_index(l, m)] = 1.0
        return cls(l_max, c)

    @classmethod
    def identity_batch(cls, l_max: int) -> "SpectralCoeffs":
        """All basis functions at once: row k is the k-th unit vector."""
        return cls(l_max, np.eye((l_max + 1) ** 2, dtype=complex))


def _to_mode_layout(c: np.ndarray, l_max: int, cap: int) -> np.ndarray:
    """Flat basis-order coeffs -> array ``[..., m + cap, l]``."""
    out = np.zeros(c.shape[:-1] + (2 * cap + 1, cap + 1), dtype=complex)
    for l in range(l_max + 1):
        ms = np.arange(-l, l + 1)
        out[..., cap + ms, l] = c[..., l * l : (l + 1) * (l + 1)]
    return out


def _from_mode_layout(a: np.ndarray, l_max: int, cap: int) -> np.ndarray:
    out = np.empty(a.shape[:-2] + ((l_max + 1) ** 2,), dtype=complex)
    for l in range(l_max + 1):
        ms = np.arange(-l, l + 1)
        out[..., l * l : (l + 1) * (l + 1)] = a[..., cap + ms, l]
    return out


def _modes_to_values(modes: np.ndarray, grid: SphericalGrid) -> np.ndarray:
    """``F[..., m + cap, j]`` -> ``f[..., j, k] = sum_m F_m(theta_j) e^{i m phi_k}``."""
    cap = (modes.shape[-2] - 1) // 2
    n = grid.n_phi
    coef = np.zeros(modes.shape[:-2] + (grid.n_theta, n), dtype=complex)
    ms = np.arange(-cap, cap + 1)
    coef[..., ms % n] = np.swapaxes(modes, -1, -2)
    return np.fft.ifft(coef, axis=-1) * n


def _values_to_modes(values: np.ndarray, grid: SphericalGrid, cap: int) -> np.ndarray:
    n = grid.n_phi
    coef = np.fft.fft(values, axis=-1) / n
    ms = np.arange(-cap, cap + 1)
    return np.swapaxes(coef[..., ms % n], -1, -2)


def _synthesize_modes(c: SpectralCoeffs, grid: SphericalGrid, derivative: bool = False):
    grid.require_band(c.l_max)
    cap = grid.capacity
    P, dP = grid.tables
    table = dP if derivative else P
    a = _to_mode_layout(np.asarray(c.coeffs, dtype=complex), c.l_max, cap)
    # per-m matmul: (..., M, L) x (M, L, J) -> (..., M, J)
    return np.matmul(a[..., :, None, :], table)[..., 0, :]


def sh_synthesize(c: SpectralCoeffs, g: SphericalGrid) -> GridFunction:
    return GridFunction(_modes_to_values(_synthesize_modes(c, g), g), g, c.l_max)


def sh_analyze(f: GridFunction, l_max: int) -> SpectralCoeffs:
    """Quadrature projection onto ``Y_lm``, ``l <= l_max``.

    Exact for functions band-limited to the grid capacity; a request beyond
    the capacity raises :class:`ResolutionError`.
    """
    grid = f.grid
    grid.require_band(l_max)
    if f.band is not None:
        grid.require_band(f.band)
    cap = grid.capacity
    P, _ = grid.tables
    modes = _values_to_modes(f.values, grid, cap)
    wP = np.swapaxes(P * (2.0 * np.pi * grid.theta_weights), -1, -2)
    a = np.matmul(modes[..., :, None, :], wP)[..., 0, :]
    return SpectralCoeffs(l_max, _from_mode_layout(a[..., : l_max + 1], l_max, cap))


def inner_product(f: GridFunction, h: GridFunction):
    """Quadrature of ``conj(f) h`` against ``sin(theta) dtheta dphi``."""
    if not f.grid.same_as(h.grid):
        raise GridMismatchError("inner product of functions on different grids")
    g = f.grid
    w = g.theta_weights[:, None] * (2.0 * np.pi / g.n_phi)
    return np.sum(np.conj(f.values) * h.values * w, axis=(-2, -1))


def ylm(l: int, m: int, g: SphericalGrid) -> GridFunction:
    return sh_synthesize(SpectralCoeffs.unit(l, l, m), g)
