"""Recover hidden node positions from a stack of networks.

Every network in the collection is drawn from the same kernel f2, whose edge
probability decays with |x_i - x_j|.  Node positions x are never observed.
We estimate pairwise node distances by counting two-step paths, embed the
nodes on a line, and compare the recovered order with the truth.
"""

import numpy as np

from multigraphon import MultiGraphonSpec, distance_matrix, embed_1d, sample, spearman
from multigraphon.embedding import aligned_max_error
from multigraphon.model import true_distance_matrix

spec = MultiGraphonSpec("f2", beta=0.0)
G, latents = sample(spec, n=150, m=150, seed=1)
print(f"{G.m} networks on {G.n} nodes, edge density {G.A.mean():.3f}")

# path-counting distances track the L2 distance between kernel slices
D = distance_matrix(G)
truth = true_distance_matrix(spec, latents.x)
iu = np.triu_indices(G.n, 1)
print(f"mean |D_hat - D| over pairs: {np.mean(np.abs(D.D[iu] - truth[iu])):.4f}")

emb = embed_1d(D, seed=1)
print(f"Spearman |rho| against true positions: {abs(spearman(emb.positions, latents.x)):.4f}")
print(f"max error after affine alignment: {aligned_max_error(emb.positions, latents.x):.4f}")

# the embedding only knows the order, up to reflection
first = np.argsort(emb.positions)[:5]
print("five leftmost nodes, true x:", np.round(latents.x[first], 3))
