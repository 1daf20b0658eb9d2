"""Upper bounds from optimal cloning on a random qubit pair, and how they sit
above the bracket the solver finds."""
import numpy as np

from entrimur.bounds_reports import bound_report
from entrimur.minimax_solver import icomp
from entrimur.quantum_objects import Observable
from entrimur import linalg_core as la

rng = np.random.default_rng(1)


def random_obs(k):
    G = rng.standard_normal((k, 2, 2)) + 1j * rng.standard_normal((k, 2, 2))
    P = G @ la.dagger(G)
    w, V = np.linalg.eigh(P.sum(0))
    T = (V / np.sqrt(w)) @ V.conj().T
    return Observable(tuple(range(k)), T @ P @ T)


a, b = random_obs(2), random_obs(3)
br = icomp(a, b)
print(f"icomp bracket [{br.lower:.6f}, {br.upper:.6f}]")
for k, v in bound_report(a, b).to_dict().items():
    if v["value"] is not None:
        print(f"{k:14}{v['value']:10.6f}  {v['label']}")
