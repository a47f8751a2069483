"""Split the points over P ranks, transform each subcell, and tree-reduce.

Ranks here are threads talking through in-process queues; the same code
runs over TCP with ``cluster(P, "tcp")``.
"""

import numpy as np

from hpnfft import NfftConfig, nfft_forward, relative_l2_error
from hpnfft.parallel import InProcessHub, hp_forward, partition_points, run_inprocess, tree_reduce_sum
from hpnfft.parallel.launch import cluster
from hpnfft.parallel.wire import MsgType

rng = np.random.default_rng(3)
x = rng.uniform(-0.5, 0.5, size=(4096, 3))
f = rng.normal(size=4096) + 1j * rng.normal(size=4096)
cfg = NfftConfig.create((16, 16, 16), "kaiser_bessel", 2.0, 8)

# equal slabs along the widest axis; counts follow the point density
cells = partition_points(x, 4, f)
print("points per subcell:", [len(c) for c in cells])

# the partial transforms simply add up
partials = [nfft_forward(c.points, c.values, cfg) for c in cells]
single = nfft_forward(x, f, cfg)
print(f"sum of subcell transforms vs one transform: {relative_l2_error(sum(partials), single):.1e}")

# the reduction pairs ranks at distance 1, 2, 4, ...; watch the messages
hub = InProcessHub(6)
run_inprocess(6, lambda topo: tree_reduce_sum(np.zeros(4), topo), hub=hub)
print("reduction sends (src -> dst):", [(s, d) for s, d, t in hub.log if t == MsgType.COEFF_ARRAY])

# the full collective with worker ranks serving requests
for P in (1, 2, 5, 8):
    with cluster(P, "inproc") as topo:
        out = nfft_forward(x, f, cfg) if topo is None else hp_forward(x, f, cfg, topo)
    print(f"P={P}: rel. difference to single worker {relative_l2_error(out, single):.1e}")
