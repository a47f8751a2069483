"""Direct sums against the fast transform on one random 3-D instance.

Run with ``python3 demos/01_ndft_vs_nfft.py``.
"""

import time

import numpy as np

from hpnfft import NFFT, make_index_set, ndft_direct_adjoint, ndft_direct_forward, relative_l2_error

rng = np.random.default_rng(0)

# 4096 points scattered in the unit box, complex samples at each
M, dims = 4096, (16, 16, 16)
x = rng.uniform(-0.5, 0.5, size=(M, 3))
f = rng.uniform(size=M) + 1j * rng.uniform(size=M)
iset = make_index_set(dims)
print(f"{M} points, {iset.size} frequencies k in [-8, 8)^3")

# the direct sum costs M * |I_N| complex exponentials
t0 = time.perf_counter()
exact = ndft_direct_forward(x, f, iset)
print(f"direct forward sum   {time.perf_counter() - t0:6.3f} s")

# the fast transform spreads onto a 32^3 grid, runs an FFT and rescales
plan = NFFT(dims, window="kaiser_bessel", sigma=2.0, m=8)
plan.forward(x[:10], f[:10])  # compile the kernels once
t0 = time.perf_counter()
fast = plan.forward(x, f)
print(f"fast forward          {time.perf_counter() - t0:6.3f} s")
print(f"relative l2 error     {relative_l2_error(fast, exact):.2e}")

# the adjoint goes back from coefficients to point values
coeffs = rng.uniform(size=dims) + 1j * rng.uniform(size=dims)
err = relative_l2_error(plan.adjoint(coeffs, x), ndft_direct_adjoint(coeffs, x, iset))
print(f"adjoint error         {err:.2e}")

# both directions are exact adjoints of each other, not just approximately
lhs = np.vdot(coeffs, plan.forward(x, f))
rhs = np.vdot(plan.adjoint(coeffs, x), f)
print(f"<A f, c> - <f, A* c>  {abs(lhs - rhs) / abs(lhs):.1e} (relative)")
