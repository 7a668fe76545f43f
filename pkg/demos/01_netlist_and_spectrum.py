"""Load the bundled four-node device, quantize it and inspect its spectrum.

Run with ``python demos/01_netlist_and_spectrum.py``.
"""

# %% The device netlist
# Netlists are TOML files with a node list and one table per branch. The
# bundled preset is resolved by name; a path to any .toml file works too.
from mmqubit.netlist import dump_netlist, load_netlist, parse_netlist

device = load_netlist("difluxmon")
print(dump_netlist(device))

# Serialization round-trips exactly.
assert parse_netlist(dump_netlist(device)) == device

# %% Mode structure
# Capacitance and inverse-inductance matrices decide which node variables
# are compact (charge-like) and which are extended (flux-like).
from mmqubit.circuit import build_matrices, classify_modes

kinds = classify_modes(build_matrices(device))
print("modes:", [k.name for k in kinds])

# %% Lowest levels at the flux sweet spot
# Reference cutoffs (N_c, N_f) = (6, 24) are converged to better than 1e-8
# in the transition frequencies.
from mmqubit.spectrum import diagonalize

system, sol, spec = diagonalize(device, k=6)
print(f"Hilbert space dimension: {system.H.shape[0]}")
print(f"w10   = {spec.omega10:.6f} GHz")
print(f"eta   = {spec.eta:.6f} GHz  (w2 - 2 w1)")
print(f"alpha = {spec.alpha:.6f} GHz  (w3 - 2 w1)")

# %% Drive matrix elements
# The 0-1 element of the drive node is large while the 1-2 element vanishes
# by symmetry, so the first leakage channel is 1 -> 3.
n1 = spec.elements["n1"]
print(f"|<1|n1|0>| = {abs(n1[1, 0]):.4f}")
print(f"|<2|n1|1>| = {abs(n1[2, 1]):.1e}")
print(f"|<3|n1|1>| = {abs(n1[3, 1]):.4f}")
