"""Index sets, point handling and the brute-force transforms used as oracles.

Everything here is deliberately O(M |I_N|): these routines define what the
fast transforms are supposed to compute.

Conventions
-----------
* A frequency index set ``I_N`` holds every integer vector ``k`` with
  ``-N_t/2 <= k_t < N_t/2``. Coefficient arrays are numpy arrays of shape
  ``N`` whose C-order (row-major) flattening follows the lexicographic order
  of ``I_N``, i.e. ``coeffs[0, ..., 0]`` is ``k = (-N_0/2, ..., -N_{d-1}/2)``.
* Points are ``(M, d)`` float arrays with components in ``[-0.5, 0.5)``.
* Sample values are ``(M,)`` complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidBandwidthError, ShapeError, UndefinedReferenceError

__all__ = [
    "FrequencyIndexSet",
    "OversampledGrid",
    "make_index_set",
    "as_points",
    "as_values",
    "ndft_direct_forward",
    "ndft_direct_adjoint",
    "dft_direct_equispaced",
    "relative_l2_error",
]

# target number of complex matrix entries materialised per oracle chunk
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class FrequencyIndexSet:
    """The frequency set ``I_N`` for per-dimension bandwidths ``dims``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims:
            raise InvalidBandwidthError("an index set needs at least one dimension")
        for n, raw in zip(dims, self.dims):
            if n != raw or n < 2 or n % 2:
                raise InvalidBandwidthError(f"bandwidth {raw!r} is not an even integer >= 2")
        object.__setattr__(self, "dims", dims)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self) -> int:
        return self.size

    def axis(self, t: int) -> np.ndarray:
        """Signed frequencies of dimension ``t`` in ascending order."""
        n = self.dims[t]
        return np.arange(-n // 2, n // 2, dtype=np.int64)

    @cached_property
    def _indices(self) -> np.ndarray:
        grids = np.meshgrid(*(self.axis(t) for t in range(self.d)), indexing="ij")
        out = np.stack([g.ravel() for g in grids], axis=1)
        out.setflags(write=False)
        return out

    def indices(self) -> np.ndarray:
        """All ``k`` as a read-only ``(|I_N|, d)`` int array in lexicographic order."""
        return self._indices

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self._indices)

    def contains(self, k) -> np.ndarray:
        """Boolean mask telling which rows of ``k`` (shape ``(K, d)``) lie in the set."""
        k = np.atleast_2d(np.asarray(k))
        half = np.asarray(self.dims) // 2
        return np.all((k >= -half) & (k < half), axis=1)

    def offsets(self, k) -> tuple[np.ndarray, ...]:
        """Position of each ``k`` in a coefficient array (for fancy indexing)."""
        k = np.atleast_2d(np.asarray(k, dtype=np.int64))
        half = np.asarray(self.dims) // 2
        return tuple(k[:, t] + half[t] for t in range(self.d))


def make_index_set(dims) -> FrequencyIndexSet:
    """Build ``I_N`` from a sequence of even positive bandwidths."""
    if np.isscalar(dims):
        dims = (dims,)
    return FrequencyIndexSet(tuple(dims))


@dataclass
class OversampledGrid:
    """Complex values on the equispaced lattice ``I_n``.

    ``values`` has shape ``n``. Lattice index ``l`` (signed, in
    ``[-n_t/2, n_t/2)``) is stored at array offset ``(l + n_t) % n_t``, the
    native layout of an FFT. ``layout`` is ``"spatial"`` or ``"frequency"``.
    """

    values: np.ndarray
    layout: str = "spatial"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.layout not in ("spatial", "frequency"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if any(n % 2 for n in self.values.shape) or self.values.ndim == 0:
            raise ShapeError(f"grid sizes must be even, got {self.values.shape}")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.values.shape

    def signed_order(self) -> np.ndarray:
        """Values re-ordered so that axis positions run over ``l = -n/2 .. n/2-1``."""
        return np.fft.fftshift(self.values)

    @classmethod
    def from_signed_order(cls, values, layout="spatial") -> "OversampledGrid":
        return cls(np.fft.ifftshift(np.asarray(values)), layout)


def as_points(x, d: int | None = None) -> np.ndarray:
    """Return ``x`` as an ``(M, d)`` float64 array wrapped into ``[-0.5, 0.5)``.

    Wrapping subtracts the nearest integer, which leaves every exponential
    ``exp(2 pi i k x)`` with integer ``k`` unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if d in (None, 1) else x.reshape(-1, d)
    if x.ndim != 2:
        raise ShapeError(f"points must be (M, d), got shape {x.shape}")
    if d is not None and x.shape[1] != d:
        raise ShapeError(f"points have dimension {x.shape[1]}, expected {d}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must be finite")
    out = x - np.floor(x + 0.5)
    # floor rounding can land exactly on +0.5 for tiny negative inputs
    out[out >= 0.5] -= 1.0
    return out


def as_values(f, m: int) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128).ravel()
    if f.shape[0] != m:
        raise ShapeError(f"expected {m} sample values, got {f.shape[0]}")
    return f


def _index_set(index_set) -> FrequencyIndexSet:
    return index_set if isinstance(index_set, FrequencyIndexSet) else make_index_set(index_set)


def ndft_direct_forward(x, f, index_set) -> np.ndarray:
    r"""Direct nonequispaced DFT.

    Computes :math:`\hat f(k) = \sum_j f_j e^{-2\pi i k\cdot x_j}` for every
    ``k`` in ``index_set``.

    Parameters
    ----------
    x : array_like, (M, d)
        Nonequispaced points.
    f : array_like, (M,)
        Complex sample values.
    index_set : FrequencyIndexSet or sequence of int

    Returns
    -------
    ndarray
        Complex coefficients of shape ``index_set.shape``.
    """
    iset = _index_set(index_set)
    x = as_points(x, iset.d)
    f = as_values(f, x.shape[0])
    k = iset.indices().astype(np.float64)
    out = np.zeros(iset.size, dtype=np.complex128)
    if x.shape[0] == 0:
        return out.reshape(iset.shape)
    step = max(1, _CHUNK_ENTRIES // x.shape[0])
    for start in range(0, iset.size, step):
        phase = k[start:start + step] @ x.T
        out[start:start + step] = np.exp(-2j * np.pi * phase) @ f
    return out.reshape(iset.shape)


def ndft_direct_adjoint(coeffs, x, index_set=None) -> np.ndarray:
    r"""Direct adjoint NDFT :math:`f_j = \sum_k \hat f(k) e^{2\pi i k\cdot x_j}`.

    ``coeffs`` has shape ``N``; ``index_set`` defaults to ``coeffs.shape``.
    No ``1/|I_N|`` factor is applied.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    iset = make_index_set(coeffs.shape) if index_set is None else _index_set(index_set)
    if coeffs.size != iset.size:
        raise ShapeError(f"{coeffs.size} coefficients for an index set of size {iset.size}")
    x = as_points(x, iset.d)
    c = coeffs.ravel()
    k = iset.indices().astype(np.float64)
    out = np.empty(x.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK_ENTRIES // iset.size)
    for start in range(0, x.shape[0], step):
        phase = x[start:start + step] @ k.T
        out[start:start + step] = np.exp(2j * np.pi * phase) @ c
    return out


def dft_direct_equispaced(grid: OversampledGrid, direction: str = "forward") -> OversampledGrid:
    """Equispaced d-dimensional DFT by direct O(|I_n|^2) summation.

    ``forward`` evaluates ``sum_l g(l) exp(-2 pi i k.l/n)``; ``inverse`` uses
    the opposite sign and divides by ``|I_n|``. The output layout tag is
    flipped. Exponents are reduced modulo ``n_t`` in integer arithmetic
    before the floating-point phase is formed.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    g = grid.values
    dims = np.asarray(g.shape, dtype=np.int64)
    size = g.size
    offs = np.stack(
        [a.ravel() for a in np.meshgrid(*(np.arange(n) for n in g.shape), indexing="ij")],
        axis=1,
    )
    flat = g.ravel()
    sign = -1.0 if direction == "forward" else 1.0
    out = np.empty(size, dtype=np.complex128)
    step = max(1, _CHUNK_ENTRIES // size)
    for start in range(0, size, step):
        a = offs[start:start + step]
        phase = np.zeros((a.shape[0], size))
        for t in range(len(dims)):
            phase += np.mod(np.outer(a[:, t], offs[:, t]), dims[t]) / dims[t]
        out[start:start + step] = np.exp(sign * 2j * np.pi * phase) @ flat
    if direction == "inverse":
        out /= size
    layout = "frequency" if grid.layout == "spatial" else "spatial"
    return OversampledGrid(out.reshape(g.shape), layout)


def relative_l2_error(f, s) -> float:
    """``||f - s||_2 / ||s||_2`` over all entries of the two arrays."""
    f = np.asarray(f).ravel()
    s = np.asarray(s).ravel()
    if f.shape != s.shape:
        raise ShapeError(f"length mismatch: {f.shape[0]} vs {s.shape[0]}")
    ref = np.linalg.norm(s)
    if ref == 0.0:
        raise UndefinedReferenceError("reference has zero norm")
    return float(np.linalg.norm(f - s) / ref)
