"""Benchmark sweeps, point files and the command-line driver."""

from .pointfile import read_points, write_points
from .sweeps import SweepReport, cmd_madelung, cmd_perf, cmd_precision, parse_range

__all__ = ["SweepReport", "cmd_madelung", "cmd_perf", "cmd_precision", "parse_range",
           "read_points", "write_points"]
