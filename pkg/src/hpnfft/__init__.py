"""Nonequispaced fast Fourier transforms with domain decomposition and Ewald sums."""

from .core import (
    FrequencyIndexSet,
    OversampledGrid,
    dft_direct_equispaced,
    make_index_set,
    ndft_direct_adjoint,
    ndft_direct_forward,
    relative_l2_error,
)
from .engine import NFFT, NfftConfig, nfft_adjoint, nfft_forward
from .errors import *  # noqa: F401,F403
from .errors import __all__ as _errors_all
from .ewald import (
    ChargedSystem,
    EwaldEnergy,
    EwaldParams,
    build_fluorite,
    build_rocksalt,
    default_params,
    ewald_energy,
    madelung_constant,
)
from .windows import WindowKind, WindowSpec, window_fourier_weight, window_spatial

__version__ = "0.1.0"

__all__ = [
    "FrequencyIndexSet",
    "OversampledGrid",
    "dft_direct_equispaced",
    "make_index_set",
    "ndft_direct_adjoint",
    "ndft_direct_forward",
    "relative_l2_error",
    "NFFT",
    "NfftConfig",
    "nfft_adjoint",
    "nfft_forward",
    "ChargedSystem",
    "EwaldEnergy",
    "EwaldParams",
    "build_fluorite",
    "build_rocksalt",
    "default_params",
    "ewald_energy",
    "madelung_constant",
    "WindowKind",
    "WindowSpec",
    "window_fourier_weight",
    "window_spatial",
    *_errors_all,
]
