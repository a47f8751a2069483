"""Reproducible parameter sweeps whose product is a CSV table.

Each ``cmd_*`` function returns a :class:`SweepReport`. Random inputs come
from ``numpy.random.default_rng(seed)`` (PCG64): points uniform in
``[-0.5, 0.5)^d``, values uniform in the complex unit square.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ..core import make_index_set, ndft_direct_adjoint, ndft_direct_forward, relative_l2_error
from ..engine import NfftConfig, nfft_adjoint, nfft_forward
from ..errors import ResourceError
from ..ewald import build_fluorite, default_params, ewald_energy, ewald_nfft_config
from ..parallel.decomp import hp_adjoint, hp_forward
from ..parallel.launch import cluster
from ..windows import WindowKind

PRECISION_COLUMNS = ["window", "m", "sigma", "dims", "points", "seed", "forward_error", "adjoint_error"]
PERF_COLUMNS = ["points_per_side", "points", "workers", "repetitions", "median_seconds", "speedup", "timings"]
MADELUNG_COLUMNS = ["cells", "ions", "alpha", "mode", "real_cutoff", "kmax",
                    "real_energy", "reciprocal_energy", "total_energy", "madelung"]

ORACLE_LIMIT = 10 ** 9


@dataclass
class SweepReport:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} fields, expected {len(self.columns)}")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def write(self, path: str | os.PathLike):
        """Write the CSV to ``path`` and the metadata to ``path + '.meta.json'``."""
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(f"{os.fspath(path)}.meta.json", "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (tuple, list)):
        return "x".join(str(int(a)) for a in v)
    return v


def _metadata(command, **config):
    return {
        "command": command,
        "config": config,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "host_cpus": os.cpu_count(),
    }


def random_instance(dims, M, seed):
    """Points, values and coefficients drawn for one precision experiment."""
    rng = np.random.default_rng(seed)
    d = len(dims)
    x = rng.uniform(-0.5, 0.5, size=(M, d))
    f = rng.uniform(size=M) + 1j * rng.uniform(size=M)
    coeffs = rng.uniform(size=dims) + 1j * rng.uniform(size=dims)
    return x, f, coeffs


def _transform_pair(cfg, topo):
    if topo is None:
        return (lambda x, f: nfft_forward(x, f, cfg)), (lambda c, x: nfft_adjoint(c, x, cfg))
    return (lambda x, f: hp_forward(x, f, cfg, topo)), (lambda c, x: hp_adjoint(c, x, cfg, topo))


def cmd_precision(dims=(16, 16, 16), M=4096, sigma=2.0, m_range=(1, 15), windows=None, seed=0,
                  force=False, nodes=1, transport="inproc", host="127.0.0.1", port=47000) -> SweepReport:
    """Relative l2 error of the fast transforms against the direct sums.

    One row per ``(window, m)``; both directions share the random instance.
    """
    iset = make_index_set(dims)
    if M * iset.size > ORACLE_LIMIT and not force:
        raise ResourceError(f"direct oracle needs M*|I_N| = {M * iset.size:.3g} > {ORACLE_LIMIT:.0e} "
                            "operations; pass force=True (--force) to run it anyway")
    kinds = [WindowKind.parse(w) for w in (windows or [k.label for k in WindowKind])]
    lo, hi = m_range
    x, f, coeffs = random_instance(iset.dims, M, seed)
    ref_fwd = ndft_direct_forward(x, f, iset)
    ref_adj = ndft_direct_adjoint(coeffs, x, iset)

    report = SweepReport(PRECISION_COLUMNS, metadata=_metadata(
        "precision", dims=iset.dims, points=M, sigma=sigma, m_range=[lo, hi],
        windows=[k.label for k in kinds], seed=seed, nodes=nodes, transport=transport))
    with cluster(nodes, transport, host, port) as topo:
        for kind in kinds:
            for m in range(lo, hi + 1):
                cfg = NfftConfig.create(iset.dims, kind, sigma, m)
                fwd, adj = _transform_pair(cfg, topo)
                report.add(kind.label, m, sigma, iset.dims, M, seed,
                           relative_l2_error(fwd(x, f), ref_fwd),
                           relative_l2_error(adj(coeffs, x), ref_adj))
    return report


def _available_memory() -> int | None:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def estimate_perf_bytes(M, d, grid_size, workers, m, chunk=1024) -> int:
    inputs = M * (d + 2) * 8 * 3
    grids = workers * grid_size * 16 * 3
    stencils = workers * chunk * d * (2 * m + 1) * 16
    return inputs + grids + stencils


def cmd_perf(grid_sizes=(58,), workers_list=(1, 2, 4), repetitions=3, dims=(16, 16, 16), sigma=2.0, m=8,
             window="kaiser_bessel", seed=0, transport="inproc", host="127.0.0.1", port=47000) -> SweepReport:
    """Median wall-clock time of the distributed forward transform.

    ``grid_sizes`` are points per side: ``s`` means ``s**d`` random points.
    Each (size, workers) pair is warmed up once, then timed
    ``repetitions`` times with a monotonic clock.
    """
    iset = make_index_set(dims)
    cfg = NfftConfig.create(iset.dims, window, sigma, m)
    grid_size = int(np.prod(cfg.grid_shape))
    workers_list = [int(w) for w in workers_list]
    measured = sorted(set(workers_list) | {1})
    avail = _available_memory()
    for s in grid_sizes:
        need = estimate_perf_bytes(s ** iset.d, iset.d, grid_size, max(measured), m)
        if avail is not None and need > avail:
            raise ResourceError(f"{s}^{iset.d} points need about {need / 2**30:.1f} GiB, "
                                f"{avail / 2**30:.1f} GiB available")

    report = SweepReport(PERF_COLUMNS, metadata=_metadata(
        "perf", grid_sizes=list(grid_sizes), workers=workers_list, repetitions=repetitions,
        dims=iset.dims, sigma=sigma, m=m, window=WindowKind.parse(window).label, seed=seed,
        transport=transport))
    for s in grid_sizes:
        M = s ** iset.d
        x, f, _ = random_instance(iset.dims, M, seed)
        medians, timings = {}, {}
        for P in measured:
            with cluster(P, transport, host, port) as topo:
                run = _transform_pair(cfg, topo)[0]
                run(x, f)
                times = []
                for _ in range(repetitions):
                    t0 = time.perf_counter()
                    run(x, f)
                    times.append(time.perf_counter() - t0)
            timings[P] = times
            medians[P] = statistics.median(times)
        for P in workers_list:
            report.add(s, M, P, repetitions, medians[P], medians[1] / medians[P],
                       ";".join(repr(t) for t in timings[P]))
    return report


def cmd_madelung(cells=4, alphas=(1.5,), mode="nfft", workers=1, window="kaiser_bessel", sigma=2.0, m=8,
                 transport="inproc", host="127.0.0.1", port=47000) -> SweepReport:
    """Ewald energies and the Madelung constant of fluorite over ``alphas``."""
    sys = build_fluorite(cells)
    zp, zm = sys.valencies
    report = SweepReport(MADELUNG_COLUMNS, metadata=_metadata(
        "madelung", cells=cells, alphas=list(alphas), mode=mode, workers=workers,
        window=WindowKind.parse(window).label, sigma=sigma, m=m, transport=transport))
    nodes = workers if mode == "nfft" else 1
    with cluster(nodes, transport, host, port) as topo:
        for alpha in alphas:
            p = default_params(sys, alpha)
            cfg = ewald_nfft_config(p.kmax, window, sigma, m) if mode == "nfft" else None
            e = ewald_energy(sys, p, mode, cfg, topo, workers)
            madelung = abs(e.total) * sys.ions_per_molecule / (sys.n_ions * zp * zm)
            report.add(cells, sys.n_ions, float(alpha), mode, p.real_cutoff, p.kmax,
                       e.real, e.reciprocal, e.total, madelung)
    return report


def parse_range(text: str, integer=False):
    """``"a"``, ``"a:b"`` or ``"a:b:step"`` (inclusive) to a list of numbers."""
    parts = [p for p in text.split(":")]
    conv = int if integer else float
    if len(parts) == 1:
        return [conv(parts[0])]
    lo, hi = conv(parts[0]), conv(parts[1])
    step = conv(parts[2]) if len(parts) > 2 else 1
    if step <= 0 or hi < lo:
        raise ValueError(f"bad range {text!r}")
    if integer:
        return list(range(lo, hi + 1, step))
    count = int(round((hi - lo) / step))
    return [round(lo + i * step, 12) for i in range(count + 1)]
