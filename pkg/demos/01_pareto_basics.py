# Dominance, sorting, crowding and hypervolume on a small front.
#
# Everything operates on plain (n, m) numpy arrays under minimization.

import numpy as np

from flpareto import crowding_distance, dominates, hypervolume, nondominated_sort, penalize
from flpareto.moo import ConstraintSpec

# a tiny population of objective vectors (lower is better on both axes)
Y = np.array([
    [1.0, 2.0],
    [2.0, 1.0],
    [2.0, 2.0],
    [3.0, 0.5],
    [0.5, 3.0],
])

print("dominates([1,2], [2,2]) ->", dominates([1, 2], [2, 2]))
print("dominates([1,3], [2,1]) ->", dominates([1, 3], [2, 1]))

# partition into successive non-dominated fronts
fronts = nondominated_sort(Y)
for rank, front in enumerate(fronts):
    print(f"front {rank}: {[Y[i].tolist() for i in front]}")

# crowding distance rewards boundary points and sparse neighborhoods
first = Y[fronts[0]]
print("crowding of front 0:", crowding_distance(first))

# hypervolume w.r.t. a reference point that bounds the front
z = np.array([4.0, 4.0])
print("HV(front 0) =", hypervolume(first, z))
print("adding a dominated point changes nothing:",
      hypervolume(np.vstack([first, [3.5, 3.5]]), z))

# the hinge penalty: objectives above their bound are pushed up
spec = ConstraintSpec(bounds=(None, 0.8), penalties=(0.0, 20.0))
raw = np.array([0.3, 0.9])  # second objective violates 0.8
print("penalized", raw, "->", penalize(raw, spec))
