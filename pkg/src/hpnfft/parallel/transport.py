"""Rank-addressed byte transports.

A transport moves whole frames (see :mod:`hpnfft.parallel.wire`) between
ranks ``0 .. size-1``. Frames between a fixed pair of ranks arrive in the
order they were sent. Two implementations are provided:

* :class:`InProcessHub` connects ranks that are threads of one process via
  queues. :func:`run_inprocess` runs an SPMD function on every rank.
* :class:`TcpTransport` connects ranks in separate processes through a full
  mesh of stream sockets.
"""

from __future__ import annotations

import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

from ..errors import CommunicationError, InvalidTopologyError
from .wire import HEADER, parse_header

__all__ = ["Transport", "Topology", "InProcessHub", "run_inprocess", "TcpTransport"]


class Transport:
    """Interface every transport implements."""

    rank: int
    size: int

    def send(self, dest: int, data: bytes) -> None:
        raise NotImplementedError

    def recv(self, source: int) -> bytes:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def _check_peer(self, peer: int):
        if not 0 <= peer < self.size or peer == self.rank:
            raise InvalidTopologyError(f"rank {self.rank} cannot address peer {peer} of {self.size}")


@dataclass
class Topology:
    """One participant's view of a collective: its rank among ``num_nodes``."""

    num_nodes: int
    rank: int
    transport: Transport | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise InvalidTopologyError(f"need at least one node, got {self.num_nodes}")
        if not 0 <= self.rank < self.num_nodes:
            raise InvalidTopologyError(f"rank {self.rank} outside [0, {self.num_nodes})")
        if self.num_nodes > 1 and self.transport is None:
            raise InvalidTopologyError("a multi-node topology needs a transport")

    @property
    def is_root(self) -> bool:
        return self.rank == 0

    def send(self, dest: int, data: bytes):
        self.transport.send(dest, data)
        self.stats["sends"] = self.stats.get("sends", 0) + 1

    def recv(self, source: int) -> bytes:
        return self.transport.recv(source)


class InProcessHub:
    """Queues connecting ``size`` ranks that live in one process.

    Every frame sent is logged as ``(source, dest, msg_type)``. ``timeout``
    bounds each receive in seconds (``None`` waits forever unless the hub is
    aborted).
    """

    def __init__(self, size: int, timeout: float | None = None):
        if size < 1:
            raise InvalidTopologyError(f"need at least one rank, got {size}")
        self.size = size
        self.timeout = timeout
        self._queues = {(s, d): queue.Queue() for s in range(size) for d in range(size) if s != d}
        self._lock = threading.Lock()
        self._aborted = threading.Event()
        self.log: list[tuple[int, int, int]] = []

    def endpoint(self, rank: int) -> "_InProcessTransport":
        return _InProcessTransport(self, rank)

    def topology(self, rank: int) -> Topology:
        return Topology(self.size, rank, self.endpoint(rank))

    def abort(self):
        """Wake every blocked receiver with a communication error."""
        self._aborted.set()


class _InProcessTransport(Transport):
    _POLL = 0.05

    def __init__(self, hub: InProcessHub, rank: int):
        self.hub = hub
        self.rank = rank
        self.size = hub.size

    def send(self, dest, data):
        self._check_peer(dest)
        if self.hub._aborted.is_set():
            raise CommunicationError("collective aborted", peer=dest)
        msg_type = struct.unpack_from("<H", data, 6)[0] if len(data) >= HEADER.size else -1
        with self.hub._lock:
            self.hub.log.append((self.rank, dest, msg_type))
        self.hub._queues[(self.rank, dest)].put(bytes(data))

    def recv(self, source):
        self._check_peer(source)
        q = self.hub._queues[(source, self.rank)]
        deadline = None if self.hub.timeout is None else time.monotonic() + self.hub.timeout
        while True:
            try:
                return q.get(timeout=self._POLL)
            except queue.Empty:
                pass
            if self.hub._aborted.is_set():
                raise CommunicationError("collective aborted", peer=source)
            if deadline is not None and time.monotonic() > deadline:
                raise CommunicationError("receive timed out", peer=source)


def run_inprocess(size: int, fn, *args, timeout: float | None = None, hub: InProcessHub | None = None, **kwargs):
    """Run ``fn(topo, *args, **kwargs)`` on ``size`` thread-ranks and collect results.

    Returns the per-rank return values in rank order. If any rank raises,
    the hub is aborted so the others unblock, and the first exception raised
    is re-raised here.
    """
    hub = hub or InProcessHub(size, timeout)
    results = [None] * size
    errors: list[BaseException] = []
    lock = threading.Lock()

    def runner(rank):
        try:
            results[rank] = fn(hub.topology(rank), *args, **kwargs)
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            with lock:
                errors.append(exc)
            hub.abort()

    if size == 1:
        runner(0)
    else:
        threads = [threading.Thread(target=runner, args=(r,), name=f"rank-{r}") for r in range(size)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    if errors:
        raise errors[0]
    return results


class TcpTransport(Transport):
    """Full mesh of TCP connections; rank ``r`` listens on ``base_port + r``.

    Each rank connects to every lower rank and accepts connections from the
    higher ones; the connecting side announces its rank as a ``u32``.
    """

    def __init__(self, rank: int, size: int, conns: dict[int, socket.socket], server=None):
        self.rank = rank
        self.size = size
        self._conns = conns
        self._server = server
        self._send_locks = {p: threading.Lock() for p in conns}

    @classmethod
    def connect_mesh(cls, rank: int, size: int, host: str = "127.0.0.1", base_port: int = 47000,
                     timeout: float = 30.0) -> "TcpTransport":
        if not 0 <= rank < size:
            raise InvalidTopologyError(f"rank {rank} outside [0, {size})")
        conns: dict[int, socket.socket] = {}
        server = None
        if rank < size - 1:
            server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            server.bind((host, base_port + rank))
            server.listen(size)
            server.settimeout(timeout)
        deadline = time.monotonic() + timeout
        for peer in range(rank):
            while True:
                try:
                    sock = socket.create_connection((host, base_port + peer), timeout=timeout)
                    break
                except OSError as exc:
                    if time.monotonic() > deadline:
                        raise CommunicationError(f"cannot connect: {exc}", peer=peer) from exc
                    time.sleep(0.05)
            sock.sendall(struct.pack("<I", rank))
            conns[peer] = sock
        for _ in range(size - 1 - rank):
            try:
                sock, _ = server.accept()
            except OSError as exc:
                raise CommunicationError(f"rank {rank} timed out waiting for peers") from exc
            sock.settimeout(timeout)
            (peer,) = struct.unpack("<I", _read_exact(sock, 4, None))
            conns[peer] = sock
        for sock in conns.values():
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            sock.settimeout(None)
        return cls(rank, size, conns, server)

    def send(self, dest, data):
        self._check_peer(dest)
        try:
            with self._send_locks[dest]:
                self._conns[dest].sendall(data)
        except OSError as exc:
            raise CommunicationError(f"send failed: {exc}", peer=dest) from exc

    def recv(self, source):
        self._check_peer(source)
        sock = self._conns[source]
        header = _read_exact(sock, HEADER.size, source)
        _, length = parse_header(header)
        return header + _read_exact(sock, length, source)

    def close(self):
        for sock in self._conns.values():
            try:
                sock.close()
            except OSError:
                pass
        if self._server is not None:
            self._server.close()


def _read_exact(sock: socket.socket, n: int, peer) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        try:
            chunk = sock.recv(min(n - len(buf), 1 << 20))
        except OSError as exc:
            raise CommunicationError(f"receive failed: {exc}", peer=peer) from exc
        if not chunk:
            raise CommunicationError("connection closed", peer=peer)
        buf += chunk
    return bytes(buf)
