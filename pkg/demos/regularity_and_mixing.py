"""Cut norms, weak regularity and the mixing bound on random bipartite expanders."""

import numpy as np

from expcodes.expander import Subgraph, mixing_audit, random_biregular
from expcodes.regularity import MaskedMatrix, cut_norm_exact, cut_norm_heuristic, exact_oracle, regularity_decompose

G = random_biregular(16, 4, 0)
print("n=16 d=4 second singular value:", round(G.spectrum.lam, 4))

# the mixing inequality over random pairs of vertex sets
rep = mixing_audit(G, G.spectrum.lam, 10_000, seed=1)
print("mixing audit violations:", rep.violations, "of", rep.trials)

# exact and local-search cut norms of a random sign pattern on the edges
M = MaskedMatrix(G, np.random.default_rng(2).choice([-1.0, 1.0], size=G.num_edges))
exact = cut_norm_exact(M)
heur = cut_norm_heuristic(M, seed=0)
print("cut norm exact", exact.value, "heuristic", heur.value)

# decompose a random half of the edges into a few weighted cuts
H = Subgraph(G, np.random.default_rng(3).random(G.num_edges) < 0.5)
for gamma in (0.5, 0.25):
    D = regularity_decompose(H, gamma, exact_oracle())
    print(f"gamma {gamma}: {D.p} cuts, coefficient mass {D.coefficient_mass:.3f}, potentials {np.round(D.potentials, 3)}")
