"""Decomposed transforms over a rank-addressed transport."""

from .decomp import (
    Subcell,
    hp_adjoint,
    hp_forward,
    partition_points,
    serve,
    shutdown_workers,
    tree_reduce_sum,
)
from .transport import InProcessHub, TcpTransport, Topology, Transport, run_inprocess

__all__ = [
    "Subcell",
    "hp_adjoint",
    "hp_forward",
    "partition_points",
    "serve",
    "shutdown_workers",
    "tree_reduce_sum",
    "InProcessHub",
    "TcpTransport",
    "Topology",
    "Transport",
    "run_inprocess",
]
