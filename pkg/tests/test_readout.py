from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmqubit.readout import (
    READOUT_PRESETS,
    DispersiveModel,
    ReadoutConfig,
    ReadoutError,
    RingingWarning,
    calibrate_amplitude,
    dispersive_model,
    dispersive_shifts,
    fourier_round_trip,
    integrate_cavity,
    simulate_iq,
    steady_state,
    synthesize_reset_pulse,
    trial_pulse,
)

CFG = READOUT_PRESETS["caption"]


@pytest.fixture(scope="module")
def model(reference):
    return dispersive_shifts(reference[2], CFG)


@pytest.fixture(scope="module")
def calibrated(model):
    return calibrate_amplitude(model, trial_pulse(CFG), 1, 5.0)


# -- dispersive shifts -----------------------------------------------------------------


def test_two_level_shift():
    g = np.array([[0, 0.08], [0.08, 0]])
    m = dispersive_model(np.array([0.0, 2.5]), g, CFG)
    assert m.chi_qubit == pytest.approx(0.08**2 / (2.5 - CFG.omega_r), rel=1e-14)


def test_three_level_ladder_formula():
    e1, e2 = 2.5, 2.2
    g1, g2 = 0.05, 0.09
    g = np.zeros((3, 3))
    g[0, 1] = g[1, 0] = g1
    g[1, 2] = g[2, 1] = g2
    m = dispersive_model(np.array([0.0, e1, e1 + e2]), g, CFG)
    d10, d21 = e1 - CFG.omega_r, e2 - CFG.omega_r
    assert m.chi_qubit == pytest.approx(g1**2 / d10 - g2**2 / (2 * d21), rel=1e-14)


def test_zero_coupling_zero_shifts(reference):
    m = dispersive_shifts(reference[2], ReadoutConfig(g=0.0, kappa=0.01))
    assert not np.any(m.chi)


def test_resonance_names_transition():
    g = np.array([[0, 0.05], [0.05, 0]])
    with pytest.raises(ReadoutError, match="0->1"):
        dispersive_model(np.array([0.0, CFG.omega_r]), g, CFG)


def test_config_validated():
    with pytest.raises(ReadoutError):
        ReadoutConfig(kappa=-1.0)
    with pytest.raises(ReadoutError):
        ReadoutConfig(n_samples=1024)


def test_reference_readout_numbers(model):
    # computed at (6, 24) cutoffs with the 87 MHz preset
    assert model.delta10 == pytest.approx(4.493, abs=1e-3)
    assert model.chi_qubit * 1e3 == pytest.approx(1.2336, abs=1e-3)
    assert model.kappa == pytest.approx(9.03 * abs(model.chi_qubit))
    assert model.n_crit == pytest.approx(667, rel=0.01)


# -- cavity dynamics -----------------------------------------------------------------


def test_constant_drive_reaches_steady_state():
    chi, kappa, Om = 0.05, 0.3, 0.2
    t = np.linspace(0, 400, 4001)
    a = integrate_cavity(t, np.full(t.size, Om), chi, kappa)
    ss = steady_state(chi, kappa, Om)
    assert abs(a[-1] - ss) <= 1e-8 * abs(ss)
    assert a[0] == 0


def test_linear_in_drive(model, calibrated):
    pulse, _ = calibrated
    a = simulate_iq(model, pulse, 1).a
    b = simulate_iq(model, pulse.scaled(2.0), 1).a
    assert np.allclose(b, 2 * a, rtol=1e-12, atol=1e-14)


@given(st.floats(1e-4, 1.0), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_steady_state_symmetry_in_chi(chi, kappa, Om):
    p, m = steady_state(chi, kappa, Om), steady_state(-chi, kappa, Om)
    assert abs(p) ** 2 == pytest.approx(4 * Om**2 / (kappa**2 + 4 * chi**2), rel=1e-12)
    assert abs(p) == pytest.approx(abs(m), rel=1e-12)
    assert p.real == pytest.approx(-m.real) and p.imag == pytest.approx(m.imag)


def test_fourier_round_trip():
    p = trial_pulse(CFG)
    back = fourier_round_trip(p, CFG.n_samples)
    assert np.max(np.abs(back.envelope - p.envelope)) < 1e-10 * np.max(np.abs(p.envelope))


def test_calibration_hits_five_photons(model, calibrated):
    pulse, c = calibrated
    tr = simulate_iq(model, pulse, 1)
    assert abs(tr.at(50.0)) ** 2 == pytest.approx(5.0, rel=0.2)
    # amplitude needed for the 87 MHz preset, frozen from a calibration run
    assert CFG.Omega0 * c == pytest.approx(0.02609, abs=5e-5)


def test_peak_below_critical_photon_number(model, calibrated):
    pulse, _ = calibrated
    peak = max(simulate_iq(model, pulse, k).photons.max() for k in (0, 1))
    assert peak < model.n_crit


def test_displacement_mostly_along_q(model, calibrated):
    pulse, _ = calibrated
    a = simulate_iq(model, pulse, 1).at(50.0)
    assert abs(a.imag) > abs(a.real)


# -- reset ----------------------------------------------------------------------------


def test_kappa_only_filter_returns_to_origin():
    m = DispersiveModel(np.array([0.0, 2.5]), np.zeros((2, 2)), np.zeros(2), CFG.omega_r, 0.01, 0.0)
    reset = synthesize_reset_pulse(m, CFG, levels=(0,))
    tr = simulate_iq(m, reset, 0)
    assert tr.leftover < 1e-6 * tr.photons.max()


def test_reset_pulse_empties_cavity_for_both_states(model, calibrated):
    pulse, _ = calibrated
    reset, _ = calibrate_amplitude(model, synthesize_reset_pulse(model, CFG, trial=pulse), 1, 5.0)
    for k in (0, 1):
        before = simulate_iq(model, pulse, k).leftover
        after = simulate_iq(model, reset, k).leftover
        assert after <= 1e-2 * before
        assert simulate_iq(model, reset, k).photons.max() < model.n_crit


def test_large_gain_warns(model):
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        synthesize_reset_pulse(model, CFG, max_gain=1e-6)
    assert any(issubclass(x.category, RingingWarning) for x in w)
