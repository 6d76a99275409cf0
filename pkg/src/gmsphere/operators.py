"""First-order differential operators on the sphere and their action.

Every operator has the form ``a(theta, phi) d/dtheta + b(theta, phi) d/dphi
+ c(theta, phi)``.  Two representations of a test function are supported:

* :class:`~gmsphere.grid.GridFunction` -- spectral route.  ``d/dphi`` is a
  Fourier derivative in the azimuth index and ``d/dtheta`` comes from the
  harmonic coefficients and the analytic derivative of ``ybar_lm``.  Exact
  for band-limited input.
* :class:`SeparableFunction` -- ``F(theta) exp(i m phi)`` with ``F`` held as
  a Taylor jet at each node.  Exact pointwise for any smooth profile, which
  is what operators with ``cot(theta)`` terms (``p_theta``) need: their
  output is no longer band-limited.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import (
    GridFunction,
    ResolutionError,
    _synthesize_modes,
    _modes_to_values,
    normalized_legendre,
    sh_analyze,
    sh_synthesize,
)
from .jets import Jet

__all__ = [
    "GmParams",
    "SurfaceOperator",
    "SeparableFunction",
    "make_operator",
    "geometric_momentum",
    "position",
    "angular_momentum",
    "canonical_theta",
    "canonical_phi",
    "multiplication",
    "apply",
    "commutator_apply",
    "hamiltonian_apply",
    "separable_ylm",
    "AXES",
]

AXES = ("x", "y", "z")

Coefficient = Callable[[object, object], object]


@dataclass(frozen=True)
class GmParams:
    alpha: float = 1.0
    beta: float = 0.0
    hbar: float = 1.0
    r: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "r", "mu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def kappa(self) -> complex:
        """Coefficient of the curvature term: ``(hbar / r**2)(i alpha + beta)``."""
        return self.hbar / self.r**2 * (1j * self.alpha + self.beta)

    @property
    def gamma(self) -> complex:
        z = self.alpha - 1j * self.beta
        return z * (2.0 - z)


@dataclass(frozen=True, eq=False)
class SurfaceOperator:
    """``a d_theta + b d_phi + c``; a coefficient of ``None`` is zero.

    ``pole_singular`` marks operators whose image of a band-limited function
    is not band-limited (the ``cot(theta)`` term of ``p_theta``, a bare
    ``d_theta``).  Such operators have no finite matrix over the harmonic
    basis and are applied through :class:`SeparableFunction` only.
    ``band`` is the largest change in ``l`` the operator produces, if known.
    """

    name: str
    a: Coefficient | None = None
    b: Coefficient | None = None
    c: Coefficient | None = None
    pole_singular: bool = False
    azimuthal: bool = False
    band: int | None = None
    key: tuple | None = field(default=None, repr=False)

    def coefficients(self, theta, phi):
        return tuple(
            0.0 if fn is None else fn(theta, phi) for fn in (self.a, self.b, self.c)
        )

    def combine(self, f, f_theta, f_phi, theta, phi):
        """Pointwise ``a f_theta + b f_phi + c f`` from supplied derivatives."""
        out = 0.0
        for fn, val in ((self.a, f_theta), (self.b, f_phi), (self.c, f)):
            if fn is not None:
                out = out + fn(theta, phi) * val
        if np.isscalar(out) and isinstance(f, np.ndarray):
            out = out * np.ones_like(f)
        return out

    def scaled(self, factor, name: str | None = None) -> "SurfaceOperator":
        def sc(fn):
            return None if fn is None else (lambda t, p, fn=fn: factor * fn(t, p))

        return SurfaceOperator(
            name or f"{factor}*{self.name}",
            sc(self.a),
            sc(self.b),
            sc(self.c),
            self.pole_singular,
            self.azimuthal,
            self.band,
        )


def _check_axis(axis):
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return axis


def position(axis: str, params: GmParams = GmParams()) -> SurfaceOperator:
    r = params.r
    c = {
        "x": lambda t, p: r * np.sin(t) * np.cos(p),
        "y": lambda t, p: r * np.sin(t) * np.sin(p),
        "z": lambda t, p: r * np.cos(t),
    }[_check_axis(axis)]
    return SurfaceOperator(
        f"x_{axis}", c=c, azimuthal=axis == "z", band=1,
        key=("position", axis, params.r),
    )


def geometric_momentum(axis: str, params: GmParams = GmParams()) -> SurfaceOperator:
    """``p_(alpha,beta)i``: tangential gradient plus a curvature term along x_i."""
    h, r = params.hbar, params.r
    k = h / r * (1j * params.alpha + params.beta)
    _check_axis(axis)
    if axis == "x":
        a = lambda t, p: -1j * h / r * np.cos(t) * np.cos(p)
        b = lambda t, p: 1j * h / r * np.sin(p) / np.sin(t)
        c = lambda t, p: k * np.sin(t) * np.cos(p)
    elif axis == "y":
        a = lambda t, p: -1j * h / r * np.cos(t) * np.sin(p)
        b = lambda t, p: -1j * h / r * np.cos(p) / np.sin(t)
        c = lambda t, p: k * np.sin(t) * np.sin(p)
    else:
        a = lambda t, p: 1j * h / r * np.sin(t)
        b = None
        c = lambda t, p: k * np.cos(t)
    if params.alpha == 0 and params.beta == 0:
        c = None
    return SurfaceOperator(
        f"p_{axis}(alpha={params.alpha:g},beta={params.beta:g})",
        a, b, c, azimuthal=axis == "z", band=1,
        key=("geometric_momentum", axis, params.alpha, params.beta, params.hbar, params.r),
    )


def angular_momentum(axis: str, params: GmParams = GmParams()) -> SurfaceOperator:
    h = params.hbar
    _check_axis(axis)
    if axis == "x":
        a = lambda t, p: 1j * h * np.sin(p)
        b = lambda t, p: 1j * h * np.cos(t) / np.sin(t) * np.cos(p)
    elif axis == "y":
        a = lambda t, p: -1j * h * np.cos(p)
        b = lambda t, p: 1j * h * np.cos(t) / np.sin(t) * np.sin(p)
    else:
        a = None
        b = lambda t, p: -1j * h
    return SurfaceOperator(
        f"L_{axis}", a, b, azimuthal=axis == "z", band=0,
        key=("angular_momentum", axis, params.hbar),
    )


def canonical_theta(params: GmParams = GmParams()) -> SurfaceOperator:
    """``p_theta = -i hbar (d_theta + cot(theta) / 2)``."""
    h = params.hbar
    return SurfaceOperator(
        "p_theta",
        a=lambda t, p: -1j * h,
        c=lambda t, p: -0.5j * h * np.cos(t) / np.sin(t),
        pole_singular=True,
        azimuthal=True,
        key=("canonical_theta", params.hbar),
    )


def canonical_phi(params: GmParams = GmParams()) -> SurfaceOperator:
    h = params.hbar
    return SurfaceOperator(
        "p_phi", b=lambda t, p: -1j * h, azimuthal=True, band=0,
        key=("canonical_phi", params.hbar),
    )


def multiplication(
    fn: Coefficient,
    name: str = "multiplication",
    *,
    pole_singular: bool = False,
    azimuthal: bool = False,
    band: int | None = None,
) -> SurfaceOperator:
    return SurfaceOperator(
        name, c=fn, pole_singular=pole_singular, azimuthal=azimuthal, band=band
    )


_KINDS = {
    "position": position,
    "geometric_momentum": geometric_momentum,
    "angular_momentum": angular_momentum,
}


def make_operator(kind: str, axis: str | None = None, params: GmParams = GmParams(), fn=None):
    if kind in _KINDS:
        if axis is None:
            raise ValueError(f"operator kind {kind!r} needs an axis")
        return _KINDS[kind](axis, params)
    if kind == "canonical_theta":
        return canonical_theta(params)
    if kind == "canonical_phi":
        return canonical_phi(params)
    if kind == "multiplication":
        if fn is None:
            raise ValueError("multiplication needs a coefficient function")
        return multiplication(fn)
    raise ValueError(f"unknown operator kind {kind!r}")


# separable (jet) representation ------------------------------------------


@dataclass(frozen=True, eq=False)
class SeparableFunction:
    """``F(theta) exp(i m phi)`` with ``F`` a Taylor jet at the nodes ``theta``."""

    profile: Jet
    m: int
    theta: np.ndarray = field(repr=False)

    @classmethod
    def from_profile(cls, fn: Callable, m: int, theta, order: int = 6):
        """Evaluate ``fn(theta_jet)``; ``fn`` must use numpy ufuncs only."""
        theta = np.asarray(theta, dtype=float)
        return cls(fn(Jet.variable(theta, order)), m, theta)

    @property
    def values(self) -> np.ndarray:
        """Values of the profile ``F`` at the nodes (phi = 0)."""
        return self.profile.value

    def _like(self, profile: Jet) -> "SeparableFunction":
        return SeparableFunction(profile, self.m, self.theta)

    def __add__(self, other):
        self._same_mode(other)
        return self._like(self.profile + other.profile)

    def __sub__(self, other):
        self._same_mode(other)
        return self._like(self.profile - other.profile)

    def __mul__(self, scalar):
        return self._like(self.profile * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.profile)

    def _same_mode(self, other):
        if not isinstance(other, SeparableFunction) or other.m != self.m:
            raise ValueError("separable functions must share the azimuthal number m")


def separable_ylm(l: int, m: int, theta, order: int = 6) -> SeparableFunction:
    """``Y_lm`` as a separable jet function (same recurrence and phase as the grid)."""
    if abs(m) > l:
        raise ValueError("|m| must not exceed l")

    def profile(t):
        vals = list(normalized_legendre(l, abs(m), np.cos(t), np.sin(t)))
        y = vals[-1]
        return y * (-1) ** abs(m) if m < 0 else y

    return SeparableFunction.from_profile(profile, m, theta, order)


def _apply_separable(op: SurfaceOperator, f: SeparableFunction) -> SeparableFunction:
    if not op.azimuthal:
        raise ValueError(
            f"{op.name} depends on phi; the separable route needs an azimuthally "
            "symmetric operator"
        )
    t = Jet.variable(f.theta, f.profile.order)
    df = f.profile.diff()
    out = op.combine(f.profile, df, 1j * f.m * f.profile, t, None)
    if not isinstance(out, Jet):
        out = Jet.constant(out, f.profile)
    return f._like(out)


# spectral (grid) route -----------------------------------------------------


def _detect_band(f: GridFunction, tol: float = 1e-10) -> int:
    """Band limit of ``f`` from its coefficients at the grid capacity.

    With ``n_theta = capacity + 1`` nodes every latitude profile is
    interpolated exactly, so a round trip proves nothing.  A band limit is
    accepted only when the top two bands are empty (two, because a
    definite-parity profile leaves every other band empty anyway).
    """
    g = f.grid
    cap = g.capacity
    c = sh_analyze(f, cap)
    scale = max(1.0, float(np.max(np.abs(f.values))))
    back = sh_synthesize(c, g).values
    mags = np.abs(c.coeffs).reshape(-1, c.coeffs.shape[-1]).max(axis=0)
    band = 0
    for l in range(cap + 1):
        if np.max(mags[l * l : (l + 1) ** 2]) > tol * scale:
            band = l
    if band >= cap - 1 or np.max(np.abs(back - f.values)) > tol * scale:
        raise ResolutionError(
            f"samples on grid {g.shape} are not band-limited below l = {cap - 1}; use a finer grid, or the separable route for pole-singular "
            "operators"
        )
    return band


def _apply_grid(op: SurfaceOperator, f: GridFunction) -> GridFunction:
    g = f.grid
    band = f.band if f.band is not None else _detect_band(f)
    g.require_band(band)
    c = sh_analyze(GridFunction(f.values, g, band), g.capacity)
    f_theta = _modes_to_values(_synthesize_modes(c, g, derivative=True), g)
    n = g.n_phi
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freqs[n // 2] = 0.0
    f_phi = np.fft.ifft(1j * freqs * np.fft.fft(f.values, axis=-1), axis=-1)
    theta, phi = g.mesh
    out = op.combine(f.values, f_theta, f_phi, theta, phi)
    out_band = None if op.band is None else band + op.band
    return GridFunction(np.asarray(out, dtype=complex), g, out_band)


def apply(op: SurfaceOperator, f):
    if isinstance(f, SeparableFunction):
        return _apply_separable(op, f)
    if isinstance(f, GridFunction):
        return _apply_grid(op, f)
    raise TypeError(f"cannot apply an operator to {type(f).__name__}")


def commutator_apply(A: SurfaceOperator, B: SurfaceOperator, f):
    """``A(B f) - B(A f)`` by nested application."""
    return apply(A, apply(B, f)) - apply(B, apply(A, f))


def _laplacian_factors():
    # L^2 = -hbar^2 [(d_t + cot t) d_t + (csc t d_p)(csc t d_p)]
    d_theta = SurfaceOperator("d_theta", a=lambda t, p: 1.0, pole_singular=True, azimuthal=True)
    div_theta = SurfaceOperator(
        "d_theta+cot", a=lambda t, p: 1.0, c=lambda t, p: np.cos(t) / np.sin(t),
        pole_singular=True, azimuthal=True,
    )
    csc_phi = SurfaceOperator(
        "csc*d_phi", b=lambda t, p: 1.0 / np.sin(t), pole_singular=True, azimuthal=True
    )
    return d_theta, div_theta, csc_phi


def hamiltonian_apply(f, params: GmParams = GmParams()):
    """``H f = L^2 f / (2 mu r^2)``.

    On grid functions ``L^2 = sum_i L_i L_i``; on separable functions the
    spherical-coordinate Laplacian is used so no phi-dependent coefficient
    enters.
    """
    scale = 1.0 / (2.0 * params.mu * params.r**2)
    if isinstance(f, GridFunction):
        out = None
        for ax in AXES:
            L = angular_momentum(ax, params)
            term = apply(L, apply(L, f))
            out = term if out is None else out + term
        return out * scale
    d_theta, div_theta, csc_phi = _laplacian_factors()
    lap = apply(div_theta, apply(d_theta, f)) + apply(csc_phi, apply(csc_phi, f))
    return lap * (-params.hbar**2 * scale)
