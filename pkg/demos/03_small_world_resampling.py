"""Small-world statistics of networks resampled from an estimate.

A fitted multi-graphon is a generator: at any network position z it gives an
edge-probability matrix, and fresh networks can be drawn from it.  First we
check the resampler against an Erdos-Renyi graph, where density and triangle
counts have closed forms.  Then we resample from a fitted model at three
network positions.
"""

import numpy as np

from multigraphon import MultiGraphonSpec, distance_matrix, embed_1d, fit_multigraphon, resample_stats, sample
from multigraphon.netstats import expected_triangles

n = 116
s = resample_stats(0.3, np.linspace(0, 1, n), 0.5, B=2000, seed=0)
print(f"ER(p=0.3): density {s.mean['density']:.4f} (exact 0.3), "
      f"triangles {s.mean['triangles']:.0f} (exact {expected_triangles(n, 0.3):.0f})")

spec = MultiGraphonSpec("f1", beta=1.0)
G, lat = sample(spec, n=80, m=60, mode="dynamic", seed=5)
positions = embed_1d(distance_matrix(G), seed=5).positions
fit = fit_multigraphon(G, positions, lat.z)

print("\nz     density  transitivity  avg path length")
for z in (0.1, 0.5, 0.9):
    s = resample_stats(fit, positions, z, B=300, seed=1)
    print(f"{z:.1f}   {s.mean['density']:.3f}    {s.mean['transitivity']:.3f}         "
          f"{s.mean['avg_path_length']:.3f}")
