"""Start and stop a set of worker ranks around a root-driven computation."""

from __future__ import annotations

import subprocess
import sys
import threading
from contextlib import contextmanager

from ..errors import CommunicationError
from .decomp import serve, shutdown_workers
from .transport import InProcessHub, TcpTransport, Topology


@contextmanager
def cluster(nodes: int, transport: str = "inproc", host: str = "127.0.0.1", port: int = 47000,
            timeout: float | None = None):
    """Yield rank 0's :class:`Topology` while ranks ``1..nodes-1`` run :func:`serve`.

    ``inproc`` runs the workers as threads. ``tcp`` launches them as
    ``python -m hpnfft worker`` processes meshed over ``host:port+rank``.
    Yields ``None`` for a single node.
    """
    if nodes == 1:
        yield None
        return
    if transport == "inproc":
        with _inproc_cluster(nodes, timeout) as topo:
            yield topo
    elif transport == "tcp":
        with _tcp_cluster(nodes, host, port, timeout or 60.0) as topo:
            yield topo
    else:
        raise ValueError(f"unknown transport {transport!r}")


@contextmanager
def _inproc_cluster(nodes, timeout):
    hub = InProcessHub(nodes, timeout)
    errors = []

    def worker(rank):
        try:
            serve(hub.topology(rank))
        except BaseException as exc:  # noqa: BLE001 - surfaced after join
            errors.append(exc)
            hub.abort()

    threads = [threading.Thread(target=worker, args=(r,), daemon=True, name=f"rank-{r}") for r in range(1, nodes)]
    for th in threads:
        th.start()
    root = hub.topology(0)
    try:
        yield root
    except CommunicationError:
        if errors:
            raise errors[0]
        raise
    finally:
        if not hub._aborted.is_set():
            shutdown_workers(root)
        else:
            hub.abort()
        for th in threads:
            th.join()
    if errors:
        raise errors[0]


@contextmanager
def _tcp_cluster(nodes, host, port, timeout):
    procs = [
        subprocess.Popen([sys.executable, "-m", "hpnfft", "worker", "--connect", f"{host}:{port}",
                          "--rank", str(r), "--nodes", str(nodes)])
        for r in range(1, nodes)
    ]
    transport = None
    try:
        transport = TcpTransport.connect_mesh(0, nodes, host, port, timeout)
        root = Topology(nodes, 0, transport)
        yield root
        shutdown_workers(root)
        for p in procs:
            if p.wait(timeout) != 0:
                raise CommunicationError(f"worker exited with status {p.returncode}", peer=procs.index(p) + 1)
    finally:
        if transport is not None:
            transport.close()
        for p in procs:
            if p.poll() is None:
                p.kill()
                p.wait()
