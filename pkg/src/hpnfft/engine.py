"""Single-worker fast transforms built from gridding plus an equispaced FFT.

Forward (approximates the NDFT)::

    spread -> fft_oversampled(forward) -> scale

Adjoint (approximates the adjoint NDFT, no 1/|I_N| factor)::

    subdivide -> fft_oversampled(inverse) -> interpolate

Points are processed in contiguous chunks. With ``worker_count_hint > 1``
the chunks are dealt round-robin to worker threads; spreading accumulates
into one private grid per worker and the grids are summed in worker order,
so a fixed worker count gives bit-identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft

from . import _kernels
from .core import (
    FrequencyIndexSet,
    OversampledGrid,
    as_points,
    as_values,
    make_index_set,
)
from .errors import ShapeError
from .windows import WindowSpec, fourier_weights, window_stencil

__all__ = [
    "NfftConfig",
    "NFFT",
    "OversampledGrid",
    "spread",
    "fft_oversampled",
    "scale",
    "nfft_forward",
    "subdivide",
    "interpolate",
    "nfft_adjoint",
]

DEFAULT_CHUNK = 1024


@dataclass(frozen=True)
class NfftConfig:
    index_set: FrequencyIndexSet
    window: WindowSpec
    worker_count_hint: int = 1
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if tuple(self.window.N) != tuple(self.index_set.dims):
            raise ShapeError(
                f"window built for bandwidths {self.window.N}, index set has {self.index_set.dims}"
            )
        if self.worker_count_hint < 1 or self.chunk_size < 1:
            raise ValueError("worker_count_hint and chunk_size must be positive")

    @classmethod
    def create(cls, dims, window="kaiser_bessel", sigma=2.0, m=8, workers=1, chunk_size=DEFAULT_CHUNK):
        iset = make_index_set(dims)
        return cls(iset, WindowSpec(window, sigma, m, iset.dims), workers, chunk_size)

    @property
    def d(self) -> int:
        return self.index_set.d

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.window.n

    def same_transform(self, other: "NfftConfig") -> bool:
        """True when both configs define the same mathematical transform."""
        a, b = self.window, other.window
        return (a.kind, a.sigma, a.m, a.N) == (b.kind, b.sigma, b.m, b.N)


def _strides(shape) -> np.ndarray:
    s = np.ones(len(shape), dtype=np.int64)
    for t in range(len(shape) - 2, -1, -1):
        s[t] = s[t + 1] * shape[t + 1]
    return s


def _stencil(x: np.ndarray, cfg: NfftConfig):
    W = 2 * cfg.window.m + 1
    idx = np.empty((x.shape[0], cfg.d, W), dtype=np.int64)
    wts = np.empty((x.shape[0], cfg.d, W), dtype=np.float64)
    for t in range(cfg.d):
        idx[:, t], wts[:, t] = window_stencil(cfg.window, t, x[:, t])
    return idx, wts


def _chunks(M: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, M)) for s in range(0, M, size)]


def spread(x, f, cfg: NfftConfig) -> OversampledGrid:
    """Spread weighted points onto the oversampled spatial lattice.

    ``g(l) = sum_j f_j prod_t phi_t(x_{j,t} - l_t / n_t)`` over each point's
    ``(2m+1)^d`` stencil, periodically wrapped.
    """
    x = as_points(x, cfg.d)
    f = as_values(f, x.shape[0])
    shape = cfg.grid_shape
    size = int(np.prod(shape))
    strides = _strides(shape)
    chunks = _chunks(x.shape[0], cfg.chunk_size)
    workers = max(1, min(cfg.worker_count_hint, len(chunks)))

    def work(w):
        grid = np.zeros(size, dtype=np.complex128)
        for lo, hi in chunks[w::workers]:
            idx, wts = _stencil(x[lo:hi], cfg)
            _kernels.spread_points(grid, idx, wts, f[lo:hi], strides)
        return grid

    if workers == 1:
        total = work(0)
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, range(workers)))
        total = parts[0]
        for part in parts[1:]:
            total += part
    return OversampledGrid(total.reshape(shape), "spatial")


def fft_oversampled(grid: OversampledGrid, direction: str = "forward", workers: int = 1) -> OversampledGrid:
    """FFT of an oversampled grid; ``inverse`` includes the ``1/|I_n|`` factor."""
    if any(n % 2 for n in grid.dims):
        raise ShapeError(f"grid sizes must be even, got {grid.dims}")
    if direction == "forward":
        return OversampledGrid(scipy.fft.fftn(grid.values, workers=workers), "frequency")
    if direction == "inverse":
        return OversampledGrid(scipy.fft.ifftn(grid.values, workers=workers), "spatial")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def _inner_offsets(cfg: NfftConfig):
    """Lattice offsets of ``I_N`` inside the ``I_n`` frequency grid."""
    return np.ix_(*(np.mod(cfg.index_set.axis(t), n) for t, n in enumerate(cfg.grid_shape)))


def _weight_tensor(cfg: NfftConfig, with_grid_size: bool) -> np.ndarray:
    out = np.ones((), dtype=np.float64)
    for t in range(cfg.d):
        c = fourier_weights(cfg.window, t)
        if with_grid_size:
            c = c * cfg.grid_shape[t]
        out = np.multiply.outer(out, c)
    return out


def scale(grid: OversampledGrid, cfg: NfftConfig) -> np.ndarray:
    """Restrict a frequency grid to ``I_N`` and divide by ``prod_t n_t c_{k_t}``.

    The factor ``n_t`` appears because a sum over ``n_t`` lattice sites
    approximates ``n_t`` times the integral defining ``c_k``.
    """
    if grid.layout != "frequency":
        raise ShapeError("scale expects a frequency-layout grid")
    if grid.dims != cfg.grid_shape:
        raise ShapeError(f"grid shape {grid.dims} does not match config {cfg.grid_shape}")
    return grid.values[_inner_offsets(cfg)] / _weight_tensor(cfg, with_grid_size=True)


def subdivide(coeffs, cfg: NfftConfig) -> OversampledGrid:
    """Zero-padded frequency grid with ``g(k) = f(k) / prod_t c_{k_t}`` on ``I_N``.

    Dividing by ``c_k`` rather than ``n_t c_k`` multiplies by ``|I_n|``,
    which cancels the normalisation of the inverse FFT that follows.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != cfg.index_set.shape:
        if coeffs.size != cfg.index_set.size:
            raise ShapeError(f"{coeffs.size} coefficients for index set {cfg.index_set.dims}")
        coeffs = coeffs.reshape(cfg.index_set.shape)
    g = np.zeros(cfg.grid_shape, dtype=np.complex128)
    g[_inner_offsets(cfg)] = coeffs / _weight_tensor(cfg, with_grid_size=False)
    return OversampledGrid(g, "frequency")


def interpolate(grid: OversampledGrid, x, cfg: NfftConfig) -> np.ndarray:
    """Evaluate ``sum_l g(l) prod_t phi_t(x_{j,t} - l_t/n_t)`` at every point."""
    if grid.layout != "spatial":
        raise ShapeError("interpolate expects a spatial-layout grid")
    if grid.dims != cfg.grid_shape:
        raise ShapeError(f"grid shape {grid.dims} does not match config {cfg.grid_shape}")
    x = as_points(x, cfg.d)
    flat = np.ascontiguousarray(grid.values).ravel()
    strides = _strides(cfg.grid_shape)
    out = np.empty(x.shape[0], dtype=np.complex128)
    chunks = _chunks(x.shape[0], cfg.chunk_size)
    workers = max(1, min(cfg.worker_count_hint, len(chunks)))

    def work(w):
        for lo, hi in chunks[w::workers]:
            idx, wts = _stencil(x[lo:hi], cfg)
            out[lo:hi] = _kernels.interpolate_points(flat, idx, wts, strides)

    if workers == 1:
        work(0)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, range(workers)))
    return out


def nfft_forward(x, f, cfg: NfftConfig) -> np.ndarray:
    """Fast approximation of ``sum_j f_j exp(-2 pi i k.x_j)`` for ``k`` in ``I_N``.

    Returns coefficients of shape ``cfg.index_set.shape``.
    """
    g = spread(x, f, cfg)
    return scale(fft_oversampled(g, "forward", cfg.worker_count_hint), cfg)


def nfft_adjoint(coeffs, x, cfg: NfftConfig) -> np.ndarray:
    """Fast approximation of ``sum_k c(k) exp(2 pi i k.x_j)`` at every point."""
    g = fft_oversampled(subdivide(coeffs, cfg), "inverse", cfg.worker_count_hint)
    return interpolate(g, x, cfg)


class NFFT:
    """Convenience plan bundling a config with both transform directions.

    Examples
    --------
    >>> plan = NFFT((16, 16), window="gaussian", m=6)
    >>> fhat = plan.forward(x, f)
    >>> f_back = plan.adjoint(fhat, x)
    """

    def __init__(self, dims, window="kaiser_bessel", sigma=2.0, m=8, workers=1):
        self.config = NfftConfig.create(dims, window, sigma, m, workers)

    def forward(self, x, f):
        return nfft_forward(x, f, self.config)

    def adjoint(self, coeffs, x):
        return nfft_adjoint(coeffs, x, self.config)
