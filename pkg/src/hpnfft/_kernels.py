"""Compiled per-point gridding loops.

Both kernels walk the tensor-product stencil of each point with an
odometer over the leading dimensions and a contiguous inner loop over the
last one. They release the GIL so worker threads run them concurrently.
"""

import numba as nb
import numpy as np


@nb.njit(nogil=True, cache=True)
def spread_points(grid, idx, wts, vals, strides):
    # grid: flat complex lattice; idx/wts: (C, d, W); vals: (C,); strides: (d,)
    C, d, W = idx.shape
    lead = W ** (d - 1)
    for j in range(C):
        f = vals[j]
        for c in range(lead):
            rem = c
            w = 1.0
            base = 0
            for t in range(d - 2, -1, -1):
                a = rem % W
                rem //= W
                w *= wts[j, t, a]
                base += idx[j, t, a] * strides[t]
            if w == 0.0:
                continue
            for a in range(W):
                grid[base + idx[j, d - 1, a]] += (w * wts[j, d - 1, a]) * f


@nb.njit(nogil=True, cache=True)
def interpolate_points(grid, idx, wts, strides):
    C, d, W = idx.shape
    lead = W ** (d - 1)
    out = np.zeros(C, dtype=np.complex128)
    for j in range(C):
        acc = 0j
        for c in range(lead):
            rem = c
            w = 1.0
            base = 0
            for t in range(d - 2, -1, -1):
                a = rem % W
                rem //= W
                w *= wts[j, t, a]
                base += idx[j, t, a] * strides[t]
            if w == 0.0:
                continue
            for a in range(W):
                acc += (w * wts[j, d - 1, a]) * grid[base + idx[j, d - 1, a]]
        out[j] = acc
    return out
