"""Acceptance criteria 1-11, one PASS/FAIL line each at the stated tolerances.

Run ``pytest tests/test_acceptance.py -v``; the summary section at the end
lists every criterion with the measured numbers.
"""

from __future__ import annotations

import numpy as np
import pytest

from mmqubit import evolve as ev
from mmqubit import units
from mmqubit.circuit import Bias, Branch, CircuitNetlist, build_matrices
from mmqubit.coherence import (
    NoiseParameters,
    coherence_report,
    gamma_dielectric,
    qp_computational_element,
    thermal_factor,
)
from mmqubit.gate import build_control_model, calibrate, drag_correct, hahn_schedule, propagate, transmon_model
from mmqubit.quantize import FAST_CUTOFFS, eigensolve, flux_op_via_commutator, quantize, quantize_with
from mmqubit.readout import (
    READOUT_PRESETS,
    calibrate_amplitude,
    dispersive_shifts,
    integrate_cavity,
    simulate_iq,
    steady_state,
    synthesize_reset_pulse,
    trial_pulse,
)
from mmqubit.spectrum import charge_dispersion, flux_derivative, sweep_flux


@pytest.fixture
def record(pytestconfig):
    def _record(n: int, checks: dict[str, bool], detail: str):
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        pytestconfig.acceptance_lines.append(line)
        print(line)
        assert ok, line

    return _record


@pytest.fixture(scope="module")
def model(reference):
    return build_control_model(reference[2])


def test_criterion_01_spectrum(reference, record):
    r = reference[2]
    record(
        1,
        {
            "w10": abs(r.omega10 - 2.5) <= 0.03 * 2.5,
            "|eta|": abs(abs(r.eta) - 1.0) <= 0.10,
            "alpha": abs(r.alpha - 0.75) <= 0.10 * 0.75,
        },
        f"w10={r.omega10:.6f} GHz eta={r.eta:.6f} GHz (magnitude compared) alpha={r.alpha:.6f} GHz",
    )


def test_criterion_02_matrix_elements(reference, record):
    n1 = reference[2].elements["n1"]
    a, b = abs(n1[1, 0]), abs(n1[2, 1])
    record(2, {"<1|n1|0>": 0.35 <= a <= 0.45, "<2|n1|1>": b < 0.02}, f"|<1|n1|0>|={a:.4f} |<2|n1|1>|={b:.2e}")


def test_criterion_03_flux_dispersion(device, reference, record):
    d = 0.01 * 2 * np.pi
    res = sweep_flux(device, np.pi + np.array([-d, 0.0, d]), k=4)
    dw = np.max(np.abs(res.omega01 - res.omega01[1]))
    system, sol, _ = reference
    slope = abs(flux_derivative(system, sol))
    record(3, {"dw01": dw < 0.010, "slope": slope < 1e-4}, f"|dw01|={dw * 1e3:.3f} MHz |dw01/dphi|={slope:.2e} GHz/rad")


def test_criterion_04_charge_dispersion(device, record):
    d = charge_dispersion(device)
    record(4, {"band": 30e-6 <= d <= 300e-6}, f"peak-to-peak={d * 1e6:.1f} kHz")


def test_criterion_05_coherence(device, record):
    p = NoiseParameters(Q_cap=3e6, T=0.015, A_flux=1e-6)
    rep = coherence_report(device, p)
    diel = rep.rates["dielectric"]
    others = {k: v for k, v in rep.rates.items() if k != "dielectric"}
    ratio = diel / max(max(others.values()), 1e-300)
    t1_ind = 1 / rep.rates["inductive"]
    at_pi = qp_computational_element(device, FAST_CUTOFFS, Bias(0.0, np.pi))
    off = qp_computational_element(device, FAST_CUTOFFS, Bias(0.0, 0.9 * np.pi))
    record(
        5,
        {"dielectric-limited": ratio > 10, "T1_ind": t1_ind > 1e-3, "qp": at_pi * 1e3 < off},
        f"Gdiel/max(other)={ratio:.1f} T1_ind={t1_ind * 1e3:.1f} ms qp element pi/0.9pi={at_pi:.1e}/{off:.3f} "
        f"T2={rep.T2:.1f} us",
    )


@pytest.fixture(scope="module")
def hahn(model):
    return {tg: propagate(model, hahn_schedule(model, tg)) for tg in (5.0, 20.0)}


@pytest.fixture(scope="module")
def drag(model):
    return {tg: propagate(model, drag_correct(hahn_schedule(model, tg), model, 1.0)) for tg in (5.0, 20.0)}


def test_criterion_06_hahn_gate(hahn, record):
    e5, e20, l5 = hahn[5.0].error, hahn[20.0].error, hahn[5.0].leakage[1]
    record(
        6,
        {"E(5ns)": 1e-4 <= e5 <= 1e-3, "E(20ns)": 1e-7 <= e20 <= 5e-6, "L(5ns)": 1e-4 <= l5 <= 1e-3},
        f"E5={e5:.3e} E20={e20:.3e} L5={l5:.3e}",
    )


def test_criterion_07_drag_improvement(hahn, drag, record):
    ratios = {}
    for tg in (5.0, 20.0):
        ratios[f"E{tg:g}"] = hahn[tg].error / drag[tg].error
        ratios[f"L{tg:g}"] = hahn[tg].leakage[1] / drag[tg].leakage[1]
    record(
        7,
        {
            "E(5ns)>=2x": ratios["E5"] >= 2, "L(5ns)>=2x": ratios["L5"] >= 2,
            "E(20ns)>=100x": ratios["E20"] >= 100, "L(20ns)>=100x": ratios["L20"] >= 100,
        },
        "improvement " + " ".join(f"{k}={v:.3g}x" for k, v in ratios.items()),
    )


def test_criterion_08_calibrated_gate(model, record):
    d5, d10 = calibrate(model, 5.0), calibrate(model, 10.0)
    tr = transmon_model()
    t5, t10 = calibrate(tr, 5.0), calibrate(tr, 10.0)
    record(
        8,
        {
            "E(5ns)<=1e-6": d5.result.error <= 1e-6,
            "beats transmon 5ns": d5.result.error < t5.result.error,
            "beats transmon 10ns": d10.result.error < t10.result.error,
        },
        f"E5={d5.result.error:.2e} (transmon {t5.result.error:.2e}) E10={d10.result.error:.2e} "
        f"(transmon {t10.result.error:.2e})",
    )


def test_criterion_09_readout(reference, record):
    chi, kappa, Om = 0.05, 0.3, 0.2
    t = np.linspace(0, 400, 4001)
    a = integrate_cavity(t, np.full(t.size, Om), chi, kappa)
    ss = steady_state(chi, kappa, Om)
    ss_err = abs(a[-1] - ss) / abs(ss)

    cfg = READOUT_PRESETS["caption"]
    model = dispersive_shifts(reference[2], cfg)
    pulse, _ = calibrate_amplitude(model, trial_pulse(cfg), 1, 5.0)
    mid = abs(simulate_iq(model, pulse, 1).at(0.5 * cfg.t_m)) ** 2
    reset, _ = calibrate_amplitude(model, synthesize_reset_pulse(model, cfg, trial=pulse), 1, 5.0)
    gains = [simulate_iq(model, pulse, k).leftover / simulate_iq(model, reset, k).leftover for k in (0, 1)]
    record(
        9,
        {"steady state": ss_err <= 1e-8, "5 photons": abs(mid - 5) <= 1.0, "reset": min(gains) >= 100},
        f"steady-state rel err={ss_err:.1e} mid photons={mid:.3f} reset gain |0>={gains[0]:.1e} |1>={gains[1]:.1e}",
    )


def test_criterion_10_oracles(device, record):
    # sparse Lanczos vs dense on a <= 500-dimensional instance
    s = quantize(device, 3, 8)
    assert s.H.shape[0] <= 500
    sparse = eigensolve(s.H, 6, dense_below=0).energies
    dense = np.linalg.eigvalsh(s.H.toarray())[:6]
    eig_err = np.max(np.abs(sparse - dense))

    # commutator flux elements vs direct oscillator elements, single mode
    net = CircuitNetlist((0, 1), (Branch("a", 0, 1, 30.0, 12.0),))
    q = quantize(net, 3, 30)
    sol = eigensolve(q.H, 5)
    direct = sol.matrix_elements(q.phi_op(0))
    via, bad = flux_op_via_commutator(sol, [q.n_op(0)], q.spec.E_C, 0)
    phi_err = np.max(np.abs(via[~bad] - direct[~bad]))

    # golden-rule rate vs a direct sum over the kept transition list
    p = NoiseParameters()
    fs = quantize_with(device, FAST_CUTOFFS)
    fsol = eigensolve(fs.H, 6)
    got, _ = gamma_dielectric(device, fs, fsol, p)
    Cm = build_matrices(device).C_matrix
    brute = 0.0
    for b in device.branches:
        w = b.C * np.linalg.solve(Cm, device.branch_phase_coeffs(b).astype(float))
        op = sum(wm * fs.n_op(m) for m, wm in enumerate(w) if wm)
        M = fsol.matrix_elements(op) * (2 * units.E_CHARGE / units.HBAR)
        for i in (0, 1):
            for j in range(6):
                if i != j:
                    f = fsol.energies[i] - fsol.energies[j]
                    S = 2 * units.HBAR / (b.C * 1e-15 * p.Q_cap) * thermal_factor(f, p.T)
                    brute += abs(M[i, j]) ** 2 * S
    rate_err = abs(got - brute) / brute
    record(
        10,
        {"eigen": eig_err <= 1e-8, "flux elements": phi_err <= 1e-8, "golden rule": rate_err <= 1e-12},
        f"eig diff={eig_err:.1e} phi diff={phi_err:.1e} rate rel diff={rate_err:.1e}",
    )


def test_criterion_11_evolution(device, monkeypatch, record):
    target = 5.0
    spec = ev.FitnessSpec(
        omega10=target, matrix_element=None, w_anharmonicity=0, w_matrix_element=0, w_flux=0, w_charge=0,
        n_modes=1, bias=Bias(0.0, 0.0),
    )
    cfg = ev.EvolutionConfig(n_nodes=2, population=8, generations=50, seed=3, junctions=False)
    a, b = ev.evolve(cfg, spec), ev.evolve(cfg, spec)
    g = a.best
    w = 1 / (2 * np.pi * np.sqrt(g.C[0] * 1e-15 * g.L[0] * 1e-9)) / 1e9
    lc_err = abs(w - target) / target

    seen = []
    real = ev.evaluate

    def spy(genome, s):
        seen.append(genome)
        return real(genome, s)

    monkeypatch.setattr(ev, "evaluate", spy)
    dspec = ev.FitnessSpec()
    ev.evolve(ev.EvolutionConfig(n_nodes=4, population=8, generations=3, seed=1), dspec)
    monkeypatch.undo()
    valid = np.mean([ev.is_valid(x, ev.Bounds(), dspec.n_modes) for x in seen])

    study = ev.resilience_study(device, sigmas=(0.01, 0.02, 0.05), n_samples=500, seed=0)
    stds = np.array([study.std(s) for s in study.sigmas])
    monotone = bool(np.all(np.diff(stds, axis=0) > 0))
    sign_kept = all(np.all(np.sign(study.samples[s][:, 0]) == np.sign(study.base[0])) for s in (0.01, 0.02))
    record(
        11,
        {
            "LC within 1%": lc_err < 0.01, "deterministic": a.history == b.history, "valid": valid == 1.0,
            "monotone spread": monotone, "alpha sign": sign_kept,
        },
        f"LC err={lc_err:.2e} valid={valid:.0%} of {len(seen)} std(alpha) by sigma="
        + ",".join(f"{x:.3g}" for x in stds[:, 0])
        + f" resampled={sum(study.resampled.values())}",
    )
