# Error of the computed free Dirichlet kernel against min(t,s)(1 - max(t,s)) across grid sizes.
import sys
import time

import numpy as np

from slresolvent import Grid, GridFunction, boundary_preset, green_matrix, system_matrix

for n in map(int, sys.argv[1:] or ["101", "501", "2001"]):
    g = Grid(0.0, 1.0, n)
    t0 = time.perf_counter()
    K = green_matrix(system_matrix(GridFunction.zeros(g), 0.0).A, *boundary_preset("dirichlet").at(0.0))
    exact = np.minimum.outer(g.nodes, g.nodes) * (1 - np.maximum.outer(g.nodes, g.nodes))
    err = np.max(np.abs(K.gamma - exact))
    print(f"n={n:6d}  max err {err:.2e}  {time.perf_counter() - t0:.2f} s")
