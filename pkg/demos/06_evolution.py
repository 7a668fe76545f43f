"""Evolutionary circuit search and a fabrication-spread Monte Carlo.

Run with ``python demos/06_evolution.py`` (about a minute).
"""

# %% A toy problem with a known answer
# Two nodes, no junctions: the search is over a single LC oscillator whose
# frequency is 1/(2 pi sqrt(LC)).
import numpy as np

from mmqubit.circuit import Bias
from mmqubit.evolve import EvolutionConfig, FitnessSpec, evolve, load_run_config, properties, resilience_study
from mmqubit.netlist import load_netlist, resolve_path

spec = FitnessSpec(
    omega10=5.0, matrix_element=None, w_anharmonicity=0, w_matrix_element=0, w_flux=0, w_charge=0,
    n_modes=1, bias=Bias(0.0, 0.0),
)
res = evolve(EvolutionConfig(n_nodes=2, population=8, generations=50, seed=3, junctions=False), spec)
g = res.best
w = 1 / (2 * np.pi * np.sqrt(g.C[0] * 1e-15 * g.L[0] * 1e-9)) / 1e9
print(f"LC toy: best w = {w:.4f} GHz after {len(res.history) - 1} generations")

# %% A four-node search toward a protected qubit
rc = load_run_config(resolve_path("configs/difluxmon-targets", kind="configs"))
run = evolve(rc.evolution, rc.fitness)
best = run.best.to_netlist(rc.fitness.bias)
print({k: round(v, 4) for k, v in properties(best, rc.fitness).items()})

# %% Fabrication spread on the reference device
# Every C, L and E_J is drawn independently with relative spread sigma.
study = resilience_study(load_netlist("difluxmon"), sigmas=(0.01, 0.02, 0.05), n_samples=20, seed=0)
head, rows = study.table()
print("\t".join(head))
for r in rows:
    print("\t".join(f"{v:.4g}" for v in r))
