"""Dispersive readout: cavity shifts, IQ trajectories and a reset pulse.

Run with ``python demos/05_readout.py``.
"""

# %% Dispersive shifts from the device spectrum
from mmqubit.netlist import load_netlist
from mmqubit.readout import (
    READOUT_PRESETS,
    calibrate_amplitude,
    dispersive_shifts,
    simulate_iq,
    synthesize_reset_pulse,
    trial_pulse,
)
from mmqubit.spectrum import diagonalize

device = load_netlist("difluxmon")
_, _, spec = diagonalize(device, k=6)
cfg = READOUT_PRESETS["caption"]
model = dispersive_shifts(spec, cfg)
print(f"chi = {model.chi_qubit * 1e3:.4f} MHz, kappa = {model.kappa * 1e3:.4f} MHz, n_crit = {model.n_crit:.0f}")

# %% A sin^3 pulse scaled to five photons halfway through the measurement
pulse, scale = calibrate_amplitude(model, trial_pulse(cfg), level=1, photons=5.0)
for k in (0, 1):
    tr = simulate_iq(model, pulse, k)
    a = tr.at(0.5 * cfg.t_m)
    print(f"|{k}>  a(t_m/2) = {a.real:+.3f} {a.imag:+.3f}i   leftover photons = {tr.leftover:.3e}")

# %% Reset pulse
# Dividing the trial spectrum by the cavity response shapes the drive so the
# field returns to zero at the end of the window for both qubit states.
reset, _ = calibrate_amplitude(model, synthesize_reset_pulse(model, cfg, trial=pulse), 1, 5.0)
for k in (0, 1):
    before, after = simulate_iq(model, pulse, k).leftover, simulate_iq(model, reset, k).leftover
    print(f"|{k}>  leftover {before:.2e} -> {after:.2e}")
