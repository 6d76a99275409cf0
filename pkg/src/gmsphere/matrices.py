"""Truncated matrix representations over the ``Y_lm`` basis."""
from __future__ import annotations

import functools
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse

from .grid import (
    SpectralCoeffs,
    SphericalGrid,
    default_grid,
    sh_analyze,
    sh_synthesize,
)
from .operators import GmParams, SurfaceOperator, apply

__all__ = [
    "ORDERING",
    "BandCouplingError",
    "OperatorMatrix",
    "InteriorProjection",
    "interior",
    "basis_l",
    "matrix_of",
    "commutator",
    "interior_block",
    "block_residual",
    "hermiticity_defect",
    "matrix_exp",
    "identity",
    "hamiltonian_matrix",
    "MatrixCache",
    "save_matrix",
    "load_matrix",
]

ORDERING = "l ascending; m ascending from -l to l; ordinal l*l + l + m"
_BAND_RTOL = 1e-12
_SPARSE_DENSITY = 0.05
_NOISE_RTOL = 1e-14


class BandCouplingError(ValueError):
    pass


def basis_l(l_max: int) -> np.ndarray:
    return np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])


@functools.lru_cache(maxsize=8)
def _l_distance(l_max: int) -> np.ndarray:
    ls = basis_l(l_max)
    d = np.abs(ls[:, None] - ls[None, :])
    d.setflags(write=False)
    return d


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix over the truncated basis, ``entries[row, col]``.

    ``band_coupling`` is checked at construction: entries with
    ``|l_row - l_col| > band_coupling`` must vanish to ``1e-12`` relative to
    the largest entry.
    """

    l_max: int
    entries: np.ndarray
    band_coupling: int
    name: str = ""

    def __post_init__(self):
        n = (self.l_max + 1) ** 2
        if self.entries.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix for l_max={self.l_max}")
        k = min(self.band_coupling, self.l_max)
        object.__setattr__(self, "band_coupling", k)
        if k < self.l_max:
            excess = self.band_excess(k)
            scale = max(1.0, float(np.max(np.abs(self.entries))))
            if excess > _BAND_RTOL * scale:
                raise BandCouplingError(
                    f"{self.name or 'matrix'}: entries beyond band {k} reach {excess:.3e}"
                )

    @classmethod
    def _derived(cls, l_max, entries, band, name="", sparse=None):
        # results of arithmetic on verified matrices are banded by construction
        M = object.__new__(cls)
        if entries is None:
            entries = sparse.toarray()
        for k, v in (("l_max", l_max), ("entries", entries),
                     ("band_coupling", min(band, l_max)), ("name", name)):
            object.__setattr__(M, k, v)
        if sparse is not None:
            object.__setattr__(M, "_sparse_form", sparse)
        return M

    @property
    def sparse(self):
        """CSR copy of the entries, or ``None`` when the matrix is not sparse.

        The operator matrices have a handful of nonzeros per column, so
        products go through this form.  Computed once per matrix.
        """
        cached = self.__dict__.get("_sparse_form", False)
        if cached is False:
            n = self.dim
            cached = None
            if np.count_nonzero(self.entries) < _SPARSE_DENSITY * n * n:
                cached = scipy.sparse.csr_array(self.entries)
            object.__setattr__(self, "_sparse_form", cached)
        return cached

    def _known_sparse(self):
        return self.__dict__.get("_sparse_form")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def band_excess(self, k: int) -> float:
        outside = _l_distance(self.l_max) > k
        return float(np.max(np.abs(self.entries[outside]), initial=0.0))

    def _check(self, other: "OperatorMatrix"):
        if not isinstance(other, OperatorMatrix):
            raise TypeError("expected an OperatorMatrix")
        if other.l_max != self.l_max:
            raise ValueError(f"l_max mismatch: {self.l_max} vs {other.l_max}")

    def _linear(self, other, sign):
        self._check(other)
        band = max(self.band_coupling, other.band_coupling)
        sa, sb = self._known_sparse(), other._known_sparse()
        if sa is not None and sb is not None:
            return OperatorMatrix._derived(self.l_max, None, band, sparse=sa + sign * sb)
        return OperatorMatrix._derived(self.l_max, self.entries + sign * other.entries, band)

    def __add__(self, other):
        return self._linear(other, 1.0)

    def __sub__(self, other):
        return self._linear(other, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex, np.number)):
            return NotImplemented
        s = self._known_sparse()
        if s is not None:
            return OperatorMatrix._derived(self.l_max, self.entries * scalar, self.band_coupling,
                                           self.name, sparse=s * scalar)
        return OperatorMatrix._derived(self.l_max, self.entries * scalar, self.band_coupling,
                                       self.name)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        self._check(other)
        band = self.band_coupling + other.band_coupling
        sa, sb = self.sparse, other.sparse
        if sa is not None and sb is not None:
            return OperatorMatrix._derived(self.l_max, None, band, sparse=sa @ sb)
        return OperatorMatrix._derived(self.l_max, self.entries @ other.entries, band)

    @property
    def H(self) -> "OperatorMatrix":
        s = self._known_sparse()
        return OperatorMatrix._derived(self.l_max, self.entries.conj().T, self.band_coupling,
                                       f"{self.name}^dagger",
                                       sparse=None if s is None else s.conj().T.tocsr())

    def is_diagonal(self) -> bool:
        flag = self.__dict__.get("_diagonal")
        if flag is None:
            s = self.sparse
            if s is not None:
                coo = s.tocoo()
                flag = bool(np.all((coo.row == coo.col) | (coo.data == 0)))
            else:
                e = self.entries
                flag = not np.any(e - np.diag(np.diagonal(e)))
            object.__setattr__(self, "_diagonal", flag)
        return flag


def identity(l_max: int) -> OperatorMatrix:
    n = (l_max + 1) ** 2
    return OperatorMatrix(l_max, np.eye(n, dtype=complex), 0, "I")


def hamiltonian_matrix(l_max: int, params: GmParams = GmParams()) -> OperatorMatrix:
    """``L^2 / (2 mu r^2)`` from its eigenvalues ``hbar^2 l (l + 1)``."""
    ls = basis_l(l_max)
    d = params.hbar**2 * ls * (ls + 1) / (2.0 * params.mu * params.r**2)
    return OperatorMatrix(l_max, np.diag(d).astype(complex), 0, "H")


@dataclass(frozen=True)
class InteriorProjection:
    l_eff: int
    buffer: int

    def __post_init__(self):
        if self.buffer < 0 or self.l_eff < 0:
            raise ValueError("buffer and l_eff must be non-negative")

    @property
    def dim(self) -> int:
        return (self.l_eff + 1) ** 2


def interior(l_max: int, buffer: int) -> InteriorProjection:
    if buffer > l_max:
        raise ValueError(f"buffer {buffer} exceeds l_max {l_max}")
    return InteriorProjection(l_max - buffer, buffer)


def interior_block(A: OperatorMatrix, p: InteriorProjection) -> OperatorMatrix:
    if p.l_eff > A.l_max - p.buffer:
        raise ValueError(
            f"interior l <= {p.l_eff} leaves fewer than {p.buffer} buffer bands "
            f"below l_max={A.l_max}"
        )
    n = p.dim
    return OperatorMatrix._derived(p.l_eff, A.entries[:n, :n].copy(), A.band_coupling, A.name)


def block_residual(R: OperatorMatrix, p: InteriorProjection) -> float:
    """Frobenius norm of the interior block divided by the block dimension."""
    block = interior_block(R, p).entries
    return float(np.linalg.norm(block) / block.shape[0])


def hermiticity_defect(A: OperatorMatrix, p: InteriorProjection) -> float:
    block = interior_block(A, p).entries
    return float(np.linalg.norm(0.5 * (block - block.conj().T)))


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    A._check(B)
    band = A.band_coupling + B.band_coupling
    name = f"[{A.name},{B.name}]" if A.name and B.name else ""
    # commutators with the diagonal Hamiltonian dominate the parameter scan
    if B.is_diagonal():
        d = np.diagonal(B.entries)
        return OperatorMatrix._derived(A.l_max, A.entries * (d[None, :] - d[:, None]), band, name)
    if A.is_diagonal():
        d = np.diagonal(A.entries)
        return OperatorMatrix._derived(A.l_max, B.entries * (d[:, None] - d[None, :]), band, name)
    C = A @ B - B @ A
    return OperatorMatrix._derived(A.l_max, C.entries, band, name, sparse=C._known_sparse())


def matrix_exp(A: OperatorMatrix) -> OperatorMatrix:
    """Matrix exponential; block-diagonal generators are exponentiated per l."""
    e = A.entries
    if not np.all(np.isfinite(e)):
        raise ValueError("matrix_exp needs finite entries")
    # growth of exp(A) is bounded by exp(norm of the hermitian part)
    if np.linalg.norm(0.5 * (e + e.conj().T), 1) > 700.0:
        raise OverflowError("matrix exponential would overflow")
    if A.band_coupling == 0:
        out = np.zeros_like(e, dtype=complex)
        for l in range(A.l_max + 1):
            s = slice(l * l, (l + 1) ** 2)
            out[s, s] = scipy.linalg.expm(e[s, s])
        return OperatorMatrix(A.l_max, out, 0, f"exp({A.name})")
    return OperatorMatrix(A.l_max, scipy.linalg.expm(e), A.l_max, f"exp({A.name})")


def matrix_of(
    op: SurfaceOperator,
    l_max: int,
    grid: SphericalGrid | None = None,
    cache: "MatrixCache | None" = None,
) -> OperatorMatrix:
    """``entries[(l'm'), (lm)] = <Y_l'm', op Y_lm>`` by quadrature."""
    if op.pole_singular:
        raise ValueError(
            f"{op.name} is pole-singular: its matrix elements diverge on the harmonic "
            "basis. Apply it to SeparableFunction test functions instead "
            "(operators.apply / commutator_apply)."
        )
    grid = grid or default_grid(l_max)
    reach = op.band if op.band is not None else 1
    grid.require_band(l_max + reach)
    key = None
    if cache is not None and op.key is not None:
        key = MatrixCache.make_key(op, l_max, grid)
        hit = cache.get(key)
        if hit is not None:
            return hit
    basis = sh_synthesize(SpectralCoeffs.identity_batch(l_max), grid)
    image = apply(op, basis)
    coeffs = sh_analyze(image, l_max).coeffs
    entries = coeffs.T.copy()
    band = op.band if op.band is not None else _measured_band(entries, l_max)
    M = OperatorMatrix(l_max, entries, band, op.name)
    # verified above; drop the rounding-level leakage so products stay banded,
    # and quadrature noise in selection-rule zeros so products stay sparse
    entries[_l_distance(l_max) > M.band_coupling] = 0.0
    entries[np.abs(entries) < _NOISE_RTOL * max(1.0, float(np.max(np.abs(entries))))] = 0.0
    if key is not None:
        cache.put(key, M)
    return M


def _measured_band(entries: np.ndarray, l_max: int) -> int:
    dl = _l_distance(l_max)
    scale = max(1.0, float(np.max(np.abs(entries))))
    big = np.abs(entries) > _BAND_RTOL * scale
    return int(dl[big].max(initial=0))


# cache container -----------------------------------------------------------

_MAGIC = b"GMSPHERE-MATRIX\n"
_FORMAT_VERSION = 1


def save_matrix(path, M: OperatorMatrix) -> None:
    """Write ``M`` as a magic line, a JSON header line, then raw entries.

    The entries are little-endian complex128 in row-major order.
    """
    header = {
        "version": _FORMAT_VERSION,
        "ordering": ORDERING,
        "l_max": M.l_max,
        "dtype": "complex128-le",
        "shape": list(M.entries.shape),
        "band_coupling": M.band_coupling,
        "name": M.name,
    }
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(np.ascontiguousarray(M.entries, dtype="<c16").tobytes())


def load_matrix(path) -> OperatorMatrix:
    with open(path, "rb") as fh:
        if fh.readline() != _MAGIC:
            raise ValueError(f"{path}: not a matrix cache file")
        header = json.loads(fh.readline())
        if header.get("version") != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported cache version {header.get('version')}")
        if header.get("ordering") != ORDERING:
            raise ValueError(f"{path}: basis ordering differs from {ORDERING!r}")
        data = np.frombuffer(fh.read(), dtype="<c16")
    entries = data.reshape(header["shape"]).astype(complex)
    return OperatorMatrix(header["l_max"], entries, header["band_coupling"], header["name"])


class MatrixCache:
    """Directory of matrix files keyed by operator, parameters, l_max and grid."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def make_key(op: SurfaceOperator, l_max: int, grid: SphericalGrid) -> str:
        blob = json.dumps(
            {"op": [str(k) for k in op.key], "l_max": l_max,
             "grid": [grid.n_theta, grid.n_phi]},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:32]

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.gmm"

    def get(self, key: str) -> OperatorMatrix | None:
        p = self.path(key)
        return load_matrix(p) if p.exists() else None

    def put(self, key: str, M: OperatorMatrix) -> None:
        tmp = self.path(key).with_suffix(".tmp")
        save_matrix(tmp, M)
        tmp.replace(self.path(key))
