"""Command-line driver: ``hpnfft {precision,perf,madelung,transform,worker}``.

Exit codes: 0 success, 2 usage error, 3 numerical/resource/data error,
4 communication error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from ..core import make_index_set
from ..engine import NfftConfig
from ..errors import (
    CommunicationError,
    HpnfftError,
    InvalidBandwidthError,
    InvalidSizeError,
    InvalidTopologyError,
    InvalidWindowError,
    ProtocolError,
    ShapeError,
)
from ..parallel.decomp import hp_adjoint, hp_forward, serve
from ..parallel.launch import cluster
from ..parallel.transport import TcpTransport, Topology
from ..windows import WindowKind
from . import sweeps
from .pointfile import read_points, write_points

EXIT_USAGE, EXIT_NUMERIC, EXIT_COMM = 2, 3, 4


def _dims(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _hostport(text):
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def _windows(text):
    if text.lower() == "all":
        return [k.label for k in WindowKind]
    try:
        return [WindowKind.parse(w).label for w in text.split(",")]
    except InvalidWindowError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p, window_default="kaiser_bessel", m_default=8):
    p.add_argument("--dims", type=_dims, default=(16, 16, 16), help="bandwidths, e.g. 16,16,16")
    p.add_argument("--sigma", type=float, default=2.0, help="oversampling factor")
    p.add_argument("--m", type=int, default=m_default, help="window cut-off")
    p.add_argument("--window", default=window_default, help="gaussian|b_spline|sinc_power|kaiser_bessel")
    p.add_argument("--transport", choices=("inproc", "tcp"), default="inproc")
    p.add_argument("--listen", type=_hostport, default=("127.0.0.1", 47000), metavar="HOST:PORT",
                   help="base address for tcp ranks (rank r uses PORT+r)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--force", action="store_true", help="override cost guards")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpnfft", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precision", help="error of the fast transforms against the direct sums")
    _common(p, window_default="all")
    p.add_argument("--points", type=int, default=4096, help="number of random points M")
    p.add_argument("--m-range", default="1:15", help="inclusive cut-off range A:B")
    p.add_argument("--workers", type=int, default=1, help="number of ranks")

    p = sub.add_parser("perf", help="time the distributed forward transform")
    _common(p)
    p.add_argument("--points", type=_int_list, default=[58], help="points per side, e.g. 58,80")
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4], help="rank counts, e.g. 1,2,4")
    p.add_argument("--repetitions", type=int, default=3)

    p = sub.add_parser("madelung", help="Madelung constant of fluorite over alpha")
    _common(p)
    p.add_argument("--cells", type=int, default=4, help="unit cells per side")
    p.add_argument("--alpha", default="1.2:1.8:0.1", help="value or A:B:STEP")
    p.add_argument("--mode", choices=("direct", "nfft"), default="nfft")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("transform", help="one forward or adjoint transform of a point file")
    _common(p)
    p.add_argument("--in", dest="input", required=True, help="NDPT point file")
    p.add_argument("--direction", choices=("forward", "adjoint"), default="forward")
    p.add_argument("--coeffs", help="coefficient CSV (adjoint only)")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("worker", help="serve as a tcp rank (started by the other commands)")
    p.add_argument("--connect", type=_hostport, required=True, metavar="HOST:PORT")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--timeout", type=float, default=60.0, help="seconds to wait for the mesh")
    return parser


def _emit(report, out):
    if out:
        report.write(out)
    else:
        sys.stdout.write(report.to_csv())


def _run_precision(a):
    lo_hi = sweeps.parse_range(a.m_range, integer=True)
    report = sweeps.cmd_precision(a.dims, a.points, a.sigma, (lo_hi[0], lo_hi[-1]), _windows(a.window),
                                  a.seed, a.force, a.workers, a.transport, *a.listen)
    _emit(report, a.out)


def _run_perf(a):
    report = sweeps.cmd_perf(a.points, a.workers, a.repetitions, a.dims, a.sigma, a.m, a.window, a.seed,
                             a.transport, *a.listen)
    _emit(report, a.out)


def _run_madelung(a):
    report = sweeps.cmd_madelung(a.cells, sweeps.parse_range(a.alpha), a.mode, a.workers, a.window,
                                 a.sigma, a.m, a.transport, *a.listen)
    _emit(report, a.out)


def write_coeffs_csv(fh, coeffs):
    iset = make_index_set(coeffs.shape)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"k{t}" for t in range(iset.d)] + ["re", "im"])
    for k, v in zip(iset.indices(), coeffs.ravel()):
        w.writerow([*map(int, k), repr(float(v.real)), repr(float(v.imag))])


def read_coeffs_csv(path, iset):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    coeffs = np.zeros(iset.shape, dtype=np.complex128)
    for row in rows:
        k = np.array([int(v) for v in row[:iset.d]])
        if not iset.contains(k)[0]:
            raise ShapeError(f"coefficient index {k.tolist()} outside bandwidth {iset.dims}")
        coeffs[iset.offsets(k)] = float(row[iset.d]) + 1j * float(row[iset.d + 1])
    return coeffs


def _run_transform(a):
    x, f = read_points(a.input)
    cfg = NfftConfig.create(a.dims, a.window, a.sigma, a.m)
    if x.shape[1] != cfg.d:
        raise ShapeError(f"point file has dimension {x.shape[1]}, --dims has {cfg.d}")
    with cluster(a.workers, a.transport, *a.listen) as topo:
        topo = topo or Topology(1, 0)
        if a.direction == "forward":
            coeffs = hp_forward(x, f, cfg, topo)
            if a.out:
                with open(a.out, "w", newline="") as fh:
                    write_coeffs_csv(fh, coeffs)
            else:
                write_coeffs_csv(sys.stdout, coeffs)
        else:
            if not a.coeffs:
                raise InvalidSizeError("--coeffs is required for the adjoint direction")
            vals = hp_adjoint(read_coeffs_csv(a.coeffs, cfg.index_set), x, cfg, topo)
            if not a.out:
                raise InvalidSizeError("--out is required for the adjoint direction")
            write_points(a.out, x, vals)


def _run_worker(a):
    host, port = a.connect
    transport = TcpTransport.connect_mesh(a.rank, a.nodes, host, port, a.timeout)
    try:
        serve(Topology(a.nodes, a.rank, transport))
    finally:
        transport.close()


COMMANDS = {
    "precision": _run_precision,
    "perf": _run_perf,
    "madelung": _run_madelung,
    "transform": _run_transform,
    "worker": _run_worker,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (CommunicationError, ProtocolError) as exc:
        print(f"hpnfft: communication error: {exc}", file=sys.stderr)
        return EXIT_COMM
    except (InvalidBandwidthError, InvalidWindowError, InvalidTopologyError, InvalidSizeError,
            argparse.ArgumentTypeError) as exc:
        print(f"hpnfft: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HpnfftError, ValueError, OSError) as exc:
        print(f"hpnfft: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
