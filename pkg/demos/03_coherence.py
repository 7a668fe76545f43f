"""Golden-rule relaxation and 1/f dephasing budget versus external flux.

Run with ``python demos/03_coherence.py``.
"""

# %% Noise assumptions
import numpy as np

from mmqubit.coherence import NoiseParameters, coherence_report, coherence_sweep
from mmqubit.netlist import load_netlist
from mmqubit.quantize import FAST_CUTOFFS

device = load_netlist("difluxmon")
params = NoiseParameters(Q_cap=3e6, T=0.015, A_flux=1e-6)
print(params.describe())

# %% Budget at the sweet spot
rep = coherence_report(device, params)
for channel, rate in rep.rates.items():
    print(f"{channel:14s} rate {rate:10.3e} 1/s   time {rep.time_us(channel):10.3g} us")
print(f"T1 = {rep.T1:.1f} us, Tphi = {rep.Tphi:.3g} us, T2 = {rep.T2:.1f} us")
print("limited by:", rep.limiting_channel())

# %% Moving away from pi
# First-order flux noise switches on as soon as the slope is nonzero.
for x, r in zip(np.linspace(0.9, 1.0, 5), coherence_sweep(device, np.pi * np.linspace(0.9, 1.0, 5), params, FAST_CUTOFFS)):
    print(f"phi_ext = {x:.3f} pi   T1 = {r.T1:8.1f} us   T2 = {r.T2:8.1f} us   ({r.limiting_channel()})")
