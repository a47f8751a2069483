"""Ewald summation with an NFFT-evaluated structure factor.

Electrostatics use a Coulomb prefactor of 1 and lengths in units of the
nearest cation-anion distance ``r0``, so energies are in ``e^2 / r0`` and
the Madelung constant is dimensionless. For a cubic box of side ``L``::

    U_real  = 1/2 sum_n' sum_ij q_i q_j erfc(alpha |r_ij + n L|) / |r_ij + n L|
    U_recip = 1/(2 pi L) sum_{n != 0} exp(-pi^2 |n|^2 / (alpha L)^2) / |n|^2 |S(n)|^2
              - alpha / sqrt(pi) sum_i q_i^2
    S(n)    = sum_i q_i exp(-2 pi i n . r_i / L)

where the prime drops ``i == j`` for ``n = 0`` and the reciprocal sum runs
over the cube ``0 < max_t |n_t| <= kmax``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.special

from .engine import NfftConfig, nfft_forward
from .errors import BandwidthError, InvalidCutoffError, InvalidSizeError, ShapeError
from .parallel.decomp import hp_forward
from .parallel.transport import Topology

__all__ = [
    "ChargedSystem",
    "EwaldParams",
    "EwaldEnergy",
    "erfc",
    "build_fluorite",
    "build_rocksalt",
    "default_params",
    "real_space_energy",
    "structure_factor",
    "structure_factor_cube",
    "reciprocal_energy",
    "ewald_energy",
    "madelung_constant",
    "ewald_nfft_config",
    "to_samples",
]

FLUORITE_CATIONS = np.array([[0, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]])
FLUORITE_ANIONS = np.array(list(product((0.25, 0.75), repeat=3)))


def erfc(x):
    """Complementary error function ``2/sqrt(pi) * int_x^inf exp(-t^2) dt``."""
    return scipy.special.erfc(x)


@dataclass
class ChargedSystem:
    """Point charges in a cubic periodic box ``[0, L)^3``.

    ``ions_per_molecule`` and ``valencies`` (``Z+``, ``Z-``) only enter the
    Madelung normalisation. Net charge is rejected unless
    ``allow_net_charge`` is set; the energies of such a system then omit
    the uniform neutralising background.
    """

    positions: np.ndarray
    charges: np.ndarray
    box_length: float
    ions_per_molecule: int = 2
    valencies: tuple[int, int] = (1, 1)
    allow_net_charge: bool = False

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.charges = np.asarray(self.charges, dtype=np.float64).ravel()
        if self.charges.shape[0] != self.positions.shape[0]:
            raise ShapeError("one charge per position required")
        if self.box_length <= 0:
            raise InvalidSizeError(f"box length must be positive, got {self.box_length}")
        L = self.box_length
        self.positions = self.positions - L * np.floor(self.positions / L)
        self.positions[self.positions >= L] = 0.0
        scale = max(1.0, float(np.abs(self.charges).sum()))
        if not self.allow_net_charge and abs(self.charges.sum()) > 1e-9 * scale:
            raise ValueError(f"system is not charge neutral (net charge {self.charges.sum():g})")

    @property
    def n_ions(self) -> int:
        return self.positions.shape[0]

    def translated(self, shift) -> "ChargedSystem":
        return ChargedSystem(self.positions + np.asarray(shift), self.charges, self.box_length,
                             self.ions_per_molecule, self.valencies, self.allow_net_charge)


@dataclass(frozen=True)
class EwaldParams:
    """Splitting parameter and cut-offs.

    ``real_cutoff`` is in box units; with ``image_shells`` off it may not
    exceed ``L/2`` (minimum image only).
    """

    alpha: float
    real_cutoff: float
    kmax: int
    image_shells: bool = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.real_cutoff > 0:
            raise InvalidCutoffError(f"real-space cut-off must be positive, got {self.real_cutoff}")
        if int(self.kmax) != self.kmax or self.kmax < 1:
            raise ValueError(f"kmax must be a positive integer, got {self.kmax}")


@dataclass(frozen=True)
class EwaldEnergy:
    real: float
    reciprocal: float
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def total(self) -> float:
        return self.real + self.reciprocal


def _lattice(c: int, cell: float, *groups) -> tuple[np.ndarray, np.ndarray]:
    if int(c) != c or c < 1:
        raise InvalidSizeError(f"cells per side must be a positive integer, got {c}")
    origins = np.array(list(product(range(c), repeat=3)), dtype=np.float64)
    pos, q = [], []
    for frac, charge in groups:
        p = (origins[:, None, :] + frac[None, :, :]).reshape(-1, 3) * cell
        pos.append(p)
        q.append(np.full(p.shape[0], charge, dtype=np.float64))
    return np.concatenate(pos), np.concatenate(q)


def build_fluorite(c: int) -> ChargedSystem:
    """``c^3`` fluorite unit cells, nearest cation-anion distance 1.

    Cations (+2) sit on the face-centred sites and anions (-1) on the eight
    ``(1/4, 1/4, 1/4)``-type sites of each cell of edge ``4/sqrt(3)``.
    """
    cell = 4.0 / math.sqrt(3.0)
    pos, q = _lattice(c, cell, (FLUORITE_CATIONS, 2.0), (FLUORITE_ANIONS, -1.0))
    return ChargedSystem(pos, q, c * cell, ions_per_molecule=3, valencies=(2, 1))


def build_rocksalt(c: int) -> ChargedSystem:
    """``c^3`` rock-salt cells (8 ions each), nearest-neighbour distance 1."""
    anions = FLUORITE_CATIONS + np.array([0.5, 0.0, 0.0])
    pos, q = _lattice(c, 2.0, (FLUORITE_CATIONS, 1.0), (anions, -1.0))
    return ChargedSystem(pos, q, 2.0 * c, ions_per_molecule=2, valencies=(1, 1))


def default_params(sys: ChargedSystem, alpha: float, tol: float = 1e-12) -> EwaldParams:
    """Cut-offs at which both Ewald tails fall below ``tol``.

    The real-space cut-off is ``min(L/2, 8/alpha)`` unless the screened
    interaction at ``L/2`` still exceeds ``tol``, in which case ``8/alpha``
    is used together with image shells. ``kmax`` is the smallest integer
    with ``exp(-pi^2 kmax^2 / (alpha L)^2) < tol``.
    """
    L = sys.box_length
    rc = min(L / 2, 8.0 / alpha)
    if erfc(alpha * rc) > tol:
        rc = 8.0 / alpha
    kmax = int(math.floor(alpha * L * math.sqrt(math.log(1.0 / tol)) / math.pi)) + 1
    return EwaldParams(alpha, rc, kmax)


def _image_shifts(L: float, rc: float) -> np.ndarray:
    # minimum-image separations have |d_t| <= L/2, so shell n can only reach
    # within rc if sum_t ((|n_t| - 1/2)_+ L)^2 < rc^2
    s = max(0, math.ceil(rc / L + 0.5) - 1)
    shifts = []
    for n in product(range(-s, s + 1), repeat=3):
        gap = np.maximum(np.abs(n) - 0.5, 0.0) * L
        if np.dot(gap, gap) < rc * rc:
            shifts.append(n)
    shifts.sort(key=lambda v: (v != (0, 0, 0), v))
    return np.asarray(shifts, dtype=np.float64) * L


def real_space_energy(sys: ChargedSystem, p: EwaldParams, workers: int = 1) -> float:
    """Screened pair energy summed over minimum images plus any needed image shells."""
    L = sys.box_length
    rc = p.real_cutoff
    if rc > L / 2 and not p.image_shells:
        raise InvalidCutoffError(f"cut-off {rc:g} exceeds L/2 = {L / 2:g} without image shells")
    r, q = sys.positions, sys.charges
    N = sys.n_ions
    shifts = _image_shifts(L, rc)
    rows = max(1, (1 << 21) // max(1, 3 * N))
    chunks = [(lo, min(lo + rows, N)) for lo in range(0, N, rows)]

    def partial(chunk):
        lo, hi = chunk
        d = r[lo:hi, None, :] - r[None, :, :]
        d -= L * np.rint(d / L)
        qq = q[lo:hi, None] * q[None, :]
        total = 0.0
        for s_idx, shift in enumerate(shifts):
            dist = np.sqrt(np.sum((d + shift) ** 2, axis=-1))
            mask = dist < rc
            if s_idx == 0:
                mask[np.arange(hi - lo), np.arange(lo, hi)] = False
            rr = dist[mask]
            total += float(np.sum(qq[mask] * erfc(p.alpha * rr) / rr))
        return total

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(partial, chunks))
    else:
        parts = [partial(c) for c in chunks]
    return 0.5 * math.fsum(parts)


def to_samples(sys: ChargedSystem) -> tuple[np.ndarray, np.ndarray]:
    """Positions mapped to ``r/L - 1/2`` in ``[-0.5, 0.5)`` and charges as complex samples."""
    x = sys.positions / sys.box_length - 0.5
    x[x >= 0.5] -= 1.0
    return x, sys.charges.astype(np.complex128)


def ewald_nfft_config(kmax: int, window="kaiser_bessel", sigma=2.0, m=8, workers=1) -> NfftConfig:
    """Cubic transform whose bandwidth covers ``|n_t| <= kmax``."""
    N = 2 * int(kmax) + 2
    return NfftConfig.create((N, N, N), window, sigma, m, workers)


def _nfft_structure(sys: ChargedSystem, cfg: NfftConfig, topo: Topology | None) -> np.ndarray:
    x, q = to_samples(sys)
    if topo is not None and topo.num_nodes > 1:
        if not topo.is_root:
            raise ValueError("structure factors are assembled on rank 0; other ranks run serve()")
        fhat = hp_forward(x, q, cfg, topo)
    else:
        fhat = nfft_forward(x, q, cfg)
    # r/L = x + 1/2 contributes the sign exp(-i pi sum_t n_t)
    sign = np.ones((), dtype=np.float64)
    for t in range(3):
        sign = np.multiply.outer(sign, 1.0 - 2.0 * (cfg.index_set.axis(t) % 2))
    return fhat * sign


def structure_factor(sys: ChargedSystem, kvecs, mode: str = "direct", cfg: NfftConfig | None = None,
                     topo: Topology | None = None) -> np.ndarray:
    """``S(n)`` for each integer row of ``kvecs``.

    ``direct`` sums over ions literally. ``nfft`` runs one forward NFFT
    over the config's index set (by default the smallest cube holding all
    requested vectors, Kaiser-Bessel window, ``m = 8``) and picks the
    requested entries; with a multi-rank ``topo`` the transform is
    distributed.
    """
    k = np.atleast_2d(np.asarray(kvecs, dtype=np.int64))
    if k.shape[1] != 3:
        raise ShapeError(f"k-vectors must be 3-vectors, got shape {k.shape}")
    if mode == "direct":
        out = np.empty(k.shape[0], dtype=np.complex128)
        step = max(1, (1 << 22) // max(1, sys.n_ions))
        r = sys.positions / sys.box_length
        for lo in range(0, k.shape[0], step):
            out[lo:lo + step] = np.exp(-2j * np.pi * (k[lo:lo + step] @ r.T)) @ sys.charges
        return out
    if mode != "nfft":
        raise ValueError(f"mode must be 'direct' or 'nfft', got {mode!r}")
    if cfg is None:
        cfg = ewald_nfft_config(max(1, int(np.abs(k).max(initial=0))))
    inside = cfg.index_set.contains(k)
    if not np.all(inside):
        raise BandwidthError(f"k-vector {k[~inside][0].tolist()} outside bandwidth {cfg.index_set.dims}")
    return _nfft_structure(sys, cfg, topo)[cfg.index_set.offsets(k)]


def structure_factor_cube(sys: ChargedSystem, kmax: int, mode: str = "direct", cfg: NfftConfig | None = None,
                          topo: Topology | None = None) -> np.ndarray:
    """``S(n)`` on the whole cube ``[-kmax, kmax]^3`` as a ``(2kmax+1,)*3`` array."""
    kmax = int(kmax)
    a = np.arange(-kmax, kmax + 1)
    if mode == "direct":
        # exp(-2 pi i n.r/L) factorises per axis; contract ions axis by axis
        r = sys.positions / sys.box_length
        e = [np.exp(-2j * np.pi * np.outer(a, r[:, t])) for t in range(3)]
        out = np.empty((a.size,) * 3, dtype=np.complex128)
        for i in range(a.size):
            out[i] = (e[1] * (e[0][i] * sys.charges)) @ e[2].T
        return out
    if mode != "nfft":
        raise ValueError(f"mode must be 'direct' or 'nfft', got {mode!r}")
    cfg = cfg or ewald_nfft_config(kmax)
    if any(N // 2 <= kmax for N in cfg.index_set.dims):
        raise BandwidthError(f"bandwidth {cfg.index_set.dims} does not cover kmax={kmax}")
    full = _nfft_structure(sys, cfg, topo)
    sl = tuple(slice(N // 2 - kmax, N // 2 + kmax + 1) for N in cfg.index_set.dims)
    return full[sl]


def reciprocal_energy(sys: ChargedSystem, p: EwaldParams, mode: str = "direct", cfg: NfftConfig | None = None,
                      topo: Topology | None = None) -> float:
    """Reciprocal-space energy including the self-interaction correction."""
    L = sys.box_length
    S = structure_factor_cube(sys, p.kmax, mode, cfg, topo)
    a = np.arange(-p.kmax, p.kmax + 1, dtype=np.float64) ** 2
    n2 = a[:, None, None] + a[None, :, None] + a[None, None, :]
    n2[p.kmax, p.kmax, p.kmax] = np.inf
    w = np.exp(-(np.pi ** 2) * n2 / (p.alpha * L) ** 2) / n2
    recip = float(np.sum(w * (S.real ** 2 + S.imag ** 2))) / (2 * np.pi * L)
    return recip - p.alpha / math.sqrt(math.pi) * float(np.sum(sys.charges ** 2))


def ewald_energy(sys: ChargedSystem, p: EwaldParams, mode: str = "direct", cfg: NfftConfig | None = None,
                 topo: Topology | None = None, workers: int = 1) -> EwaldEnergy:
    return EwaldEnergy(real_space_energy(sys, p, workers), reciprocal_energy(sys, p, mode, cfg, topo))


def madelung_constant(sys: ChargedSystem, p: EwaldParams, mode: str = "direct", cfg: NfftConfig | None = None,
                      topo: Topology | None = None, workers: int = 1) -> float:
    """``|U| * m / (N Z+ Z-)`` for a perfect crystal with unit nearest-neighbour distance."""
    U = ewald_energy(sys, p, mode, cfg, topo, workers).total
    zp, zm = sys.valencies
    return abs(U) * sys.ions_per_molecule / (sys.n_ions * zp * zm)
