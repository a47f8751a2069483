"""Window functions for gridding and their Fourier weights.

Each family is evaluated one dimension at a time; the d-dimensional window
is the tensor product. For dimension ``t`` with bandwidth ``N``, oversampled
size ``n`` and ratio ``s = n / N``:

=============== ============================================== =============================================
kind            spatial window phi(x), zero for ``|n x| > m``  weight c_k (Fourier transform at k)
=============== ============================================== =============================================
gaussian        ``exp(-(n x)^2 / b) / sqrt(pi b)``              ``exp(-b (pi k / n)^2) / n``
                ``b = 2 s / (2 s - 1) * m / pi``
b_spline        ``M_2m(n x)``, centred cardinal B-spline         ``sinc(pi k / n)^(2m) / n``
sinc_power      ``a / (2m) * sinc(pi a n x / (2m))^(2m)``       ``M_2m(2 m k / (a n)) / n``
                ``a = 2 - 1/s``
kaiser_bessel   ``sinh(b r) / (pi r)``, ``r = sqrt(m^2-(n x)^2)`` ``I0(m sqrt(b^2 - (2 pi k / n)^2)) / n``
                ``b = pi (2 - 1/s)``
=============== ============================================== =============================================

The weights are the continuous Fourier transforms of the untruncated
profiles, which for these windows equal the Fourier coefficients of their
1-periodisation. Only the B-spline is compactly supported in space; for the
other three, cutting the window at ``|n x| = m`` is the approximation that
``m`` controls.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline
from scipy.special import i0

from .errors import DegenerateWindowError, InvalidWindowError

__all__ = [
    "WindowKind",
    "WindowSpec",
    "oversampled_size",
    "window_spatial",
    "window_fourier_weight",
    "fourier_weights",
    "window_support",
    "window_stencil",
]

MIN_WEIGHT = 1e-300


class WindowKind(enum.Enum):
    GAUSSIAN = 0
    B_SPLINE = 1
    SINC_POWER = 2
    KAISER_BESSEL = 3

    @classmethod
    def parse(cls, name) -> "WindowKind":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            names = ", ".join(k.name.lower() for k in cls)
            raise InvalidWindowError(f"unknown window {name!r}; expected one of {names}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


def oversampled_size(N: int, sigma: float) -> int:
    """``sigma * N`` rounded to the nearest even integer."""
    return int(2 * round(sigma * N / 2))


@dataclass(frozen=True)
class WindowSpec:
    """Window family plus oversampling ``sigma`` and cut-off ``m``.

    ``N`` are the bandwidths of the transform the window serves; the
    oversampled sizes ``n`` are derived from them.
    """

    kind: WindowKind
    sigma: float
    m: int
    N: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind.parse(self.kind))
        object.__setattr__(self, "N", tuple(int(v) for v in np.atleast_1d(self.N)))
        if not self.sigma > 1:
            raise InvalidWindowError(f"oversampling factor must exceed 1, got {self.sigma}")
        if int(self.m) != self.m or not 1 <= self.m <= 15:
            raise InvalidWindowError(f"cut-off m must be an integer in [1, 15], got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        for N_t, n_t in zip(self.N, self.n):
            if n_t < N_t or n_t % 2:
                raise InvalidWindowError(f"oversampled size {n_t} invalid for bandwidth {N_t}")

    @property
    def n(self) -> tuple[int, ...]:
        return tuple(oversampled_size(N_t, self.sigma) for N_t in self.N)

    @property
    def d(self) -> int:
        return len(self.N)

    def params(self, t: int) -> tuple[int, int]:
        return self.n[t], self.N[t]


@lru_cache(maxsize=None)
def _cardinal_bspline(order: int) -> BSpline:
    half = order // 2
    return BSpline.basis_element(np.arange(-half, half + 1, dtype=float), extrapolate=False)


def _bspline(order: int, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    v = _cardinal_bspline(order)(y)
    return np.nan_to_num(v, nan=0.0)


def _profile(kind: WindowKind, m: int, n: int, N: int, u: np.ndarray) -> np.ndarray:
    """Untruncated window at scaled offsets ``u = n x``."""
    s = n / N
    if kind is WindowKind.GAUSSIAN:
        b = 2 * s / (2 * s - 1) * m / np.pi
        return np.exp(-u * u / b) / np.sqrt(np.pi * b)
    if kind is WindowKind.B_SPLINE:
        return _bspline(2 * m, u)
    if kind is WindowKind.SINC_POWER:
        a = 2 - 1 / s
        return a / (2 * m) * np.sinc(a * u / (2 * m)) ** (2 * m)
    b = np.pi * (2 - 1 / s)
    r2 = m * m - u * u
    r = np.sqrt(np.abs(r2))
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = np.sinh(b * r) / (np.pi * r)
        outside = np.sin(b * r) / (np.pi * r)
    out = np.where(r2 >= 0, inside, outside)
    return np.where(r < 1e-8, b / np.pi, out)


def window_spatial(spec: WindowSpec, t: int, x) -> np.ndarray | float:
    """Truncated window of dimension ``t`` at offset(s) ``x``.

    Exactly zero where ``|n_t x| > m``.
    """
    n, N = spec.params(t)
    x = np.asarray(x, dtype=np.float64)
    u = n * x
    val = np.where(np.abs(u) <= spec.m, _profile(spec.kind, spec.m, n, N, u), 0.0)
    return float(val) if val.ndim == 0 else val


def _weight(kind: WindowKind, m: int, n: int, N: int, k: np.ndarray) -> np.ndarray:
    s = n / N
    k = np.asarray(k, dtype=np.float64)
    if kind is WindowKind.GAUSSIAN:
        b = 2 * s / (2 * s - 1) * m / np.pi
        return np.exp(-b * (np.pi * k / n) ** 2) / n
    if kind is WindowKind.B_SPLINE:
        return np.sinc(k / n) ** (2 * m) / n
    if kind is WindowKind.SINC_POWER:
        a = 2 - 1 / s
        return _bspline(2 * m, 2 * m * k / (a * n)) / n
    b = np.pi * (2 - 1 / s)
    arg = b * b - (2 * np.pi * k / n) ** 2
    return np.where(arg > 0, i0(m * np.sqrt(np.maximum(arg, 0.0))), 0.0) / n


def window_fourier_weight(spec: WindowSpec, t: int, k) -> np.ndarray | float:
    """Fourier weight ``c_k`` of dimension ``t`` for integer frequency ``k``.

    Raises
    ------
    DegenerateWindowError
        If any requested weight is below ``1e-300``.
    """
    n, N = spec.params(t)
    c = _weight(spec.kind, spec.m, n, N, k)
    if np.any(~(c >= MIN_WEIGHT)):
        raise DegenerateWindowError(f"{spec.kind.label} weight underflows for k={k!r}")
    return float(c) if np.ndim(c) == 0 else c


@lru_cache(maxsize=256)
def _weights_cached(kind: WindowKind, m: int, n: int, N: int) -> np.ndarray:
    k = np.arange(-N // 2, N // 2)
    c = _weight(kind, m, n, N, k)
    if np.any(~(c >= MIN_WEIGHT)):
        raise DegenerateWindowError(f"{kind.label} weights underflow for n={n}, N={N}, m={m}")
    c.setflags(write=False)
    return c


def fourier_weights(spec: WindowSpec, t: int) -> np.ndarray:
    """All weights of dimension ``t`` over ``-N_t/2 .. N_t/2-1`` (cached, read-only)."""
    n, N = spec.params(t)
    return _weights_cached(spec.kind, spec.m, n, N)


def window_support(spec: WindowSpec, t: int, x: float) -> np.ndarray:
    """The ``2m+1`` lattice offsets around ``round(n_t x)``, wrapped modulo ``n_t``."""
    n, _ = spec.params(t)
    centre = int(np.rint(n * x))
    return np.mod(centre + np.arange(-spec.m, spec.m + 1), n)


def window_stencil(spec: WindowSpec, t: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Wrapped lattice offsets and window values for many coordinates.

    Returns two ``(M, 2m+1)`` arrays: offsets into the ``n_t`` lattice and
    ``phi(x_j - l / n_t)`` evaluated on the unwrapped ``l``.
    """
    n, N = spec.params(t)
    u = n * np.asarray(x, dtype=np.float64)
    lat = np.rint(u).astype(np.int64)[:, None] + np.arange(-spec.m, spec.m + 1)
    du = u[:, None] - lat
    w = np.where(np.abs(du) <= spec.m, _profile(spec.kind, spec.m, n, N, du), 0.0)
    return np.mod(lat, n), w
