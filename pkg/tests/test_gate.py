from __future__ import annotations

import numpy as np
import pytest

from mmqubit.gate import (
    IDENTITY,
    ControlError,
    ControlModel,
    PulseSchedule,
    build_control_model,
    calibrate,
    drag_correct,
    hahn_schedule,
    nelder_mead,
    optimal_beta,
    propagate,
    transmon_model,
)
from mmqubit.quantize import FAST_CUTOFFS
from mmqubit.spectrum import diagonalize


@pytest.fixture(scope="module")
def model(reference):
    return build_control_model(reference[2])


# -- control model -----------------------------------------------------------------


def test_transmon_lambdas_in_closed_form_beta():
    # (lam2^2 + lam3^2) / (2 lam1^2) with the ladder ratios gives 1, not the
    # half-DRAG value 1/2 usually quoted for these lambdas (see ledger)
    assert optimal_beta(1.0, np.sqrt(2), 0.0) == pytest.approx(1.0)
    m = transmon_model(levels=4)
    assert (m.lam1, m.lam2, m.lam3) == pytest.approx((1.0, np.sqrt(2), 0.0))
    assert m.optimal_beta() == pytest.approx(1.0)
    assert optimal_beta(2.0, 1.0, 1.0) == pytest.approx(0.25)


def test_real_elements_reduce_to_product():
    O = np.zeros((4, 4))
    O[0, 1], O[1, 3], O[0, 2] = 0.4, 0.7, 0.1
    m = ControlModel(np.array([0.0, 2.5, 3.0, 5.7]), O + O.T)
    assert m.lam1 == pytest.approx(0.4)
    assert m.lam2 == pytest.approx(0.4 * 0.7) and m.lam3 == 0.0


def test_reference_model(model):
    assert model.alpha == pytest.approx(0.749, abs=0.01)
    assert abs(model.O[1, 2]) < 0.02  # no 1 <-> 2 leakage channel
    assert abs(model.O[0, 1].imag) < 1e-15 and model.O[0, 1].real > 0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(frequencies=[0, 1, 2, 3], O=np.diag([1.0, 1, 1], 1) + np.diag([1.0, 1, 1], -1), leak_level=1),
        dict(frequencies=[0, 1, 2], O=np.triu(np.ones((3, 3)), 1)),
        dict(frequencies=[0, 1, 2], O=np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]])),
        dict(frequencies=[0, 1, 2], O=np.eye(2)),
    ],
    ids=["leak-level", "non-hermitian", "zero-n01", "shape"],
)
def test_control_model_errors(kwargs):
    with pytest.raises(ControlError):
        ControlModel(**kwargs)


def test_spectrum_needs_four_levels(device):
    _, _, small = diagonalize(device, 4, FAST_CUTOFFS)
    with pytest.raises(ControlError):
        build_control_model(small, levels=5)


# -- pulses -------------------------------------------------------------------------


def test_envelope_vanishes_at_edges(model):
    s = drag_correct(hahn_schedule(model, 5.0), model)
    E = s.envelope(np.array([0.0, 5.0]))
    assert np.allclose(E, 0, atol=1e-12)


def test_schedule_validation():
    with pytest.raises(ValueError):
        PulseSchedule(5.0, 1.0, n_steps=100)
    with pytest.raises(ValueError):
        PulseSchedule(5.0, 1.0, shape="drag")


def test_drag_term_vanishes_for_large_gap():
    O = np.zeros((4, 4))
    O[0, 1], O[1, 3] = 0.4, 0.6
    m = ControlModel(np.array([0.0, 2.5, 4.0, 1e9]), O + O.T)
    s = drag_correct(hahn_schedule(m, 5.0), m, detuning=False)
    t = np.linspace(0, 5, 101)
    assert np.abs(s.envelope(t).imag).max() < 1e-8
    assert np.allclose(s.envelope(t).real, hahn_schedule(m, 5.0).omega(t))


# -- propagation --------------------------------------------------------------------


def test_zero_amplitude_is_identity(model):
    r = propagate(model, PulseSchedule(5.0, 0.0), target=IDENTITY)
    assert np.allclose(r.U, np.diag(np.diag(r.U)))
    assert abs(r.error) < 1e-12


def test_pulse_area_gives_pi_rotation(model):
    m = model.without(1, 3)
    r = propagate(m, hahn_schedule(m, 5.0))
    assert abs(r.U[1, 0]) == pytest.approx(1.0, abs=1e-10)
    assert r.error < 1e-10


def test_zeroed_leak_coupling_removes_leakage(model):
    r = propagate(model.without(1, 3), hahn_schedule(model, 5.0))
    assert r.leakage[1] < 1e-9


def test_step_halving_converged(model):
    a = propagate(model, hahn_schedule(model, 5.0, n_steps=1000))
    b = propagate(model, hahn_schedule(model, 5.0, n_steps=2000))
    assert abs(a.error - b.error) < 0.05 * b.error


@pytest.mark.parametrize("phase", [0.3, 1.7, -2.4])
def test_global_drive_phase_invariance(model, phase):
    a = propagate(model, hahn_schedule(model, 5.0))
    m = model.rephased(phase)
    b = propagate(m, hahn_schedule(m, 5.0))
    assert b.error == pytest.approx(a.error, rel=1e-9)
    assert np.allclose(b.leakage, a.leakage, rtol=1e-9)


def test_unitarity(model):
    s = drag_correct(hahn_schedule(model, 5.0), model)
    r = propagate(model, s)
    assert r.unitarity < 1e-8 * model.n_levels


def test_drag_reduces_leakage(model):
    h = propagate(model, hahn_schedule(model, 20.0))
    d = propagate(model, drag_correct(hahn_schedule(model, 20.0), model))
    assert d.leakage[1] < 1e-3 * h.leakage[1]


def test_lab_frame_agrees_with_rotating_frame(reference):
    m = build_control_model(reference[2], coupling="full")
    s = hahn_schedule(m, 5.0, n_steps=20000)
    rot = propagate(m, s)
    lab = propagate(m, s, frame="lab")
    # the lab frame rotates with the drive; compare populations, which are frame independent
    assert np.allclose(np.abs(lab.U[:2, :2]) ** 2, np.abs(rot.U[:2, :2]) ** 2, atol=0.01)


# -- calibration --------------------------------------------------------------------


def test_nelder_mead_on_quadratic():
    res = nelder_mead(lambda x: float((x[0] - 1.234) ** 2), [0.0], [0.5])
    assert res.x[0] == pytest.approx(1.234, abs=1e-8)


@pytest.mark.slow
def test_calibrated_drag_beats_transmon(model):
    d = calibrate(model, 5.0)
    t = calibrate(transmon_model(), 5.0)
    assert d.result.error < 1e-6
    assert t.result.error > d.result.error
    assert min(d.history) < d.history[0]
