"""Madelung constant of fluorite from an Ewald sum with an NFFT structure factor.

Lengths are in units of the nearest Ca-F distance, so the result is the
dimensionless constant, about 2.5194.
"""

import time

from hpnfft.ewald import build_fluorite, build_rocksalt, default_params, ewald_energy, ewald_nfft_config

crystal = build_fluorite(4)
print(f"{crystal.n_ions} ions in a box of side {crystal.box_length:.3f}")

# alpha moves energy between the two sums but leaves the total alone
print(f"{'alpha':>6} {'r_c':>6} {'kmax':>5} {'real':>14} {'reciprocal':>14} {'Madelung':>10}")
for alpha in (1.2, 1.4, 1.6, 1.8):
    p = default_params(crystal, alpha)
    t0 = time.perf_counter()
    e = ewald_energy(crystal, p, "nfft", ewald_nfft_config(p.kmax))
    madelung = abs(e.total) * crystal.ions_per_molecule / (crystal.n_ions * 2 * 1)
    print(f"{alpha:6.1f} {p.real_cutoff:6.2f} {p.kmax:5d} {e.real:14.6f} {e.reciprocal:14.6f} "
          f"{madelung:10.6f}  ({time.perf_counter() - t0:.2f} s)")

# per-ion energy of a perfect crystal does not depend on the box size
for c in (1, 2, 3):
    s = build_fluorite(c)
    p = default_params(s, 1.5)
    e = ewald_energy(s, p, "nfft", ewald_nfft_config(p.kmax))
    print(f"c={c}: constant {abs(e.total) * 3 / (s.n_ions * 2):.10f}")

# the same machinery gives rock salt's 1.7476
s = build_rocksalt(2)
p = default_params(s, 1.5)
e = ewald_energy(s, p, "nfft", ewald_nfft_config(p.kmax))
print(f"rock salt: {abs(e.total) * 2 / s.n_ions:.6f}")
