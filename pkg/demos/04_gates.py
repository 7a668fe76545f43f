"""Single-qubit X gates: plain pulse, DRAG and a calibrated DRAG pulse.

Run with ``python demos/04_gates.py`` (about 30 s).
"""

# %% Control model from the device spectrum
from mmqubit.gate import build_control_model, calibrate, drag_correct, hahn_schedule, propagate, transmon_model
from mmqubit.netlist import load_netlist
from mmqubit.spectrum import diagonalize

device = load_netlist("difluxmon")
_, _, spec = diagonalize(device, k=6)
model = build_control_model(spec)
print(f"alpha = {model.alpha:.3f} GHz, lambdas = ({model.lam1:.3f}, {model.lam2:.3f}, {model.lam3:.3f})")
print(f"closed-form beta = {model.optimal_beta():.3f}")

# %% Plain and DRAG pulses
# E is the average gate error on the qubit subspace, L the leakage out of |1>.
for tg in (5.0, 10.0, 20.0):
    h = propagate(model, hahn_schedule(model, tg))
    d = propagate(model, drag_correct(hahn_schedule(model, tg), model))
    print(f"tg = {tg:4.1f} ns   plain E = {h.error:.2e} L = {h.leakage[1]:.2e}   DRAG E = {d.error:.2e} L = {d.leakage[1]:.2e}")

# %% Calibrated amplitude and detuning
# Nelder-Mead over (Omega0, delta) with the closed-form beta removes the
# residual phase error; the transmon model runs through the same procedure.
for tg in (5.0, 10.0):
    c = calibrate(model, tg)
    t = calibrate(transmon_model(), tg)
    print(f"tg = {tg:4.1f} ns   calibrated E = {c.result.error:.2e}   transmon E = {t.result.error:.2e}")
