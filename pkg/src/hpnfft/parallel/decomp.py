"""Spatial decomposition of a transform over several ranks.

The forward transform is linear in the samples, so the coefficients of the
full point set are the sum of the coefficients of any partition of it.
Rank 0 cuts the unit box into slabs, ships one slab to each rank, every
rank transforms its own points and the partial coefficient arrays are
summed onto rank 0 by a binary tree. The adjoint ships the same
coefficients to every rank, each rank evaluates its own points and rank 0
gathers the values back into the original point order.

All functions taking a :class:`~hpnfft.parallel.transport.Topology` are
collective: every rank must call them in the same order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..core import as_points, as_values
from ..engine import NfftConfig, nfft_adjoint, nfft_forward
from ..errors import InvalidTopologyError, ProtocolError, ShapeError
from . import wire
from .transport import Topology
from .wire import MsgType

__all__ = [
    "Subcell",
    "partition_points",
    "tree_reduce_sum",
    "hp_forward",
    "hp_adjoint",
    "serve",
    "shutdown_workers",
]

log = logging.getLogger(__name__)


@dataclass
class Subcell:
    cell_id: int
    indices: np.ndarray
    points: np.ndarray
    values: np.ndarray

    def __len__(self):
        return self.indices.shape[0]


def partition_points(x, P: int, values=None) -> list[Subcell]:
    """Split ``[-0.5, 0.5)^d`` into ``P`` equal slabs and bin the points.

    The slabs are cut along the axis in which the points spread furthest
    (ties go to the lowest axis). Empty subcells are kept so that subcell
    ``i`` always belongs to rank ``i``.
    """
    if int(P) != P or P < 1:
        raise InvalidTopologyError(f"number of subcells must be a positive integer, got {P}")
    x = as_points(x)
    values = np.zeros(x.shape[0], np.complex128) if values is None else as_values(values, x.shape[0])
    axis = int(np.argmax(np.ptp(x, axis=0))) if x.shape[0] else 0
    slab = np.minimum(np.floor((x[:, axis] + 0.5) * P).astype(np.int64), P - 1)
    cells = []
    for i in range(P):
        idx = np.flatnonzero(slab == i)
        cells.append(Subcell(i, idx, x[idx], values[idx]))
    return cells


def _expect(frame: bytes, expected: MsgType, peer: int) -> bytes:
    msg_type, payload = wire.unframe(frame)
    if msg_type != expected:
        raise ProtocolError(f"expected {expected.name} from rank {peer}, got {msg_type.name}")
    return payload


def tree_reduce_sum(local, topo: Topology) -> np.ndarray:
    """Sum equally shaped arrays from all ranks onto rank 0.

    In round ``r`` (``offset = 2**r``) a rank whose bit ``r`` is set sends
    its running sum to ``rank - offset`` and drops out; the other ranks add
    what ``rank + offset`` sends them, when that rank exists. This takes
    ``P - 1`` messages and ``ceil(log2 P)`` rounds. Only rank 0's return
    value is the full sum.
    """
    acc = np.array(local, dtype=np.complex128, copy=True)
    P, rank = topo.num_nodes, topo.rank
    offset, mask, rounds = 1, 1, 0
    while offset < P:
        rounds += 1
        if rank & mask:
            topo.send(rank - offset, wire.encode_coeffs(acc))
            break
        if rank + offset < P:
            other = wire.decode_coeffs(_expect(topo.recv(rank + offset), MsgType.COEFF_ARRAY, rank + offset))
            if other.shape != acc.shape:
                raise ProtocolError(f"rank {rank + offset} sent shape {other.shape}, expected {acc.shape}")
            acc += other
        offset += offset
        mask = offset + mask
    topo.stats["reduce_rounds"] = rounds
    return acc


def _send_config(topo: Topology, cfg: NfftConfig, dest: int):
    w = cfg.window
    topo.send(dest, wire.encode_config(w.kind, w.sigma, w.m, w.N))


def _config_from_payload(payload: bytes, local: NfftConfig | None) -> NfftConfig:
    kind, sigma, m, dims = wire.decode_config(payload)
    received = NfftConfig.create(dims, kind, sigma, m)
    if local is None:
        return received
    if not local.same_transform(received):
        raise ProtocolError(f"rank 0 runs {received.window}, this rank was given {local.window}")
    return local


def _forward_partial(topo: Topology, cfg: NfftConfig, payload: bytes):
    points, values = wire.decode_subcell(payload)
    log.debug("rank %d transforming %d points", topo.rank, points.shape[0])
    return tree_reduce_sum(nfft_forward(points, values, cfg), topo)


def _adjoint_partial(topo: Topology, cfg: NfftConfig, coeff_payload: bytes, subcell_payload: bytes):
    coeffs = wire.decode_coeffs(coeff_payload)
    if coeffs.shape != cfg.index_set.shape:
        raise ProtocolError(f"coefficient shape {coeffs.shape} does not match {cfg.index_set.shape}")
    points, _ = wire.decode_subcell(subcell_payload)
    vals = nfft_adjoint(coeffs, points, cfg)
    topo.send(0, wire.encode_results(np.arange(vals.shape[0]), vals))
    return vals


def hp_forward(x, f, cfg: NfftConfig, topo: Topology):
    """Distributed forward transform; the full result is returned on rank 0.

    Rank 0 supplies ``x`` and ``f``; other ranks may pass ``None``. Every
    rank passes its own ``cfg``; a rank whose transform differs from rank
    0's raises :class:`~hpnfft.errors.ProtocolError`. Non-root ranks return
    their (partial) reduction buffer.
    """
    P = topo.num_nodes
    if not topo.is_root:
        local_cfg = _config_from_payload(_expect(topo.recv(0), MsgType.CONFIG, 0), cfg)
        return _forward_partial(topo, local_cfg, _expect(topo.recv(0), MsgType.SUBCELL_ASSIGN, 0))

    x = as_points(x, cfg.d)
    f = as_values(f, x.shape[0])
    cells = partition_points(x, P, f)
    for r in range(1, P):
        _send_config(topo, cfg, r)
        topo.send(r, wire.encode_subcell(cells[r].points, cells[r].values))
    topo.stats["subcell_sizes"] = [len(c) for c in cells]
    return tree_reduce_sum(nfft_forward(cells[0].points, cells[0].values, cfg), topo)


def hp_adjoint(coeffs, x, cfg: NfftConfig, topo: Topology):
    """Distributed adjoint transform; rank 0 returns values in input point order.

    Non-root ranks return the values of their own subcell.
    """
    P = topo.num_nodes
    if not topo.is_root:
        local_cfg = _config_from_payload(_expect(topo.recv(0), MsgType.CONFIG, 0), cfg)
        coeff_payload = _expect(topo.recv(0), MsgType.COEFF_ARRAY, 0)
        return _adjoint_partial(topo, local_cfg, coeff_payload, _expect(topo.recv(0), MsgType.SUBCELL_ASSIGN, 0))

    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.size != cfg.index_set.size:
        raise ShapeError(f"{coeffs.size} coefficients for index set {cfg.index_set.dims}")
    coeffs = coeffs.reshape(cfg.index_set.shape)
    x = as_points(x, cfg.d)
    cells = partition_points(x, P)
    coeff_frame = wire.encode_coeffs(coeffs)
    for r in range(1, P):
        _send_config(topo, cfg, r)
        topo.send(r, coeff_frame)
        topo.send(r, wire.encode_subcell(cells[r].points, cells[r].values))
    topo.stats["subcell_sizes"] = [len(c) for c in cells]

    out = np.empty(x.shape[0], dtype=np.complex128)
    out[cells[0].indices] = nfft_adjoint(coeffs, cells[0].points, cfg)
    for r in range(1, P):
        idx, vals = wire.decode_results(_expect(topo.recv(r), MsgType.POINT_RESULTS, r))
        cell = cells[r]
        if idx.shape[0] != len(cell) or np.any(idx >= len(cell)):
            raise ProtocolError(f"rank {r} returned {idx.shape[0]} results for {len(cell)} points")
        out[cell.indices[idx]] = vals
    return out


def serve(topo: Topology, cfg: NfftConfig | None = None) -> int:
    """Worker loop for a non-root rank driven by rank 0.

    Answers forward and adjoint collectives as rank 0 starts them, until a
    SHUTDOWN frame arrives. Returns the number of transforms served.
    """
    if topo.is_root:
        raise InvalidTopologyError("rank 0 drives the collectives and cannot serve")
    served = 0
    while True:
        msg_type, payload = wire.unframe(topo.recv(0))
        if msg_type == MsgType.SHUTDOWN:
            return served
        if msg_type != MsgType.CONFIG:
            raise ProtocolError(f"worker expected CONFIG or SHUTDOWN, got {msg_type.name}")
        local_cfg = _config_from_payload(payload, None)
        if cfg is not None:
            local_cfg = NfftConfig(local_cfg.index_set, local_cfg.window, cfg.worker_count_hint, cfg.chunk_size)
        msg_type, payload = wire.unframe(topo.recv(0))
        if msg_type == MsgType.SUBCELL_ASSIGN:
            _forward_partial(topo, local_cfg, payload)
        elif msg_type == MsgType.COEFF_ARRAY:
            _adjoint_partial(topo, local_cfg, payload, _expect(topo.recv(0), MsgType.SUBCELL_ASSIGN, 0))
        else:
            raise ProtocolError(f"unexpected {msg_type.name} after CONFIG")
        served += 1


def shutdown_workers(topo: Topology):
    """Release every rank blocked in :func:`serve`."""
    if not topo.is_root:
        raise InvalidTopologyError("only rank 0 can shut workers down")
    for r in range(1, topo.num_nodes):
        topo.send(r, wire.encode_shutdown())
