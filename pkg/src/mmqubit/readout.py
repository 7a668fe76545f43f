"""Dispersive readout: multi-level shifts, cavity IQ trajectories, reset pulses.

Energies and couplings are in GHz (linear); the cavity equation is
integrated in rad/ns with times in ns. The cavity field obeys

    d<a>/dt = i chi_k <a> - kappa/2 <a> + i Omega(t)

for the qubit prepared in level k.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .spectrum import SpectrumResult

TWO_PI = 2 * np.pi
RESONANCE_TOL = 1e-6  # GHz


class ReadoutError(ValueError):
    pass


class RingingWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ReadoutConfig:
    """Resonator and measurement settings.

    ``kappa`` (GHz, linear) may be left as None, in which case it is set to
    ``kappa_over_chi`` times the qubit dispersive shift. ``Omega0`` is the
    trial amplitude in GHz (linear; multiplied by 2 pi internally).
    """

    omega_r: float = 6.990
    g: float = 0.087
    node: str = "n3"
    kappa: float | None = None
    kappa_over_chi: float = 9.03
    t_m: float = 100.0
    Omega0: float = 0.03539
    levels: int = 6
    n_samples: int = 4096

    def __post_init__(self):
        if self.kappa is not None and self.kappa <= 0:
            raise ReadoutError("kappa must be positive")
        if self.t_m <= 0 or self.levels < 2:
            raise ReadoutError("invalid measurement time or level count")
        if self.n_samples < 2**12:
            raise ReadoutError("need at least 2^12 samples")


READOUT_PRESETS = {
    "caption": ReadoutConfig(g=0.087),
    "text": ReadoutConfig(g=0.037),
}


@dataclass
class DispersiveModel:
    energies: np.ndarray  # GHz
    g: np.ndarray  # g_{k,k'} (GHz)
    chi: np.ndarray  # per-level shift chi_k (GHz)
    omega_r: float
    kappa: float  # GHz
    validity: float  # max |g_lk| / |e_lk - w_r| over kept upward transitions
    notes: list[str] = field(default_factory=list)

    @property
    def chi_qubit(self) -> float:
        """(chi_1 - chi_0)/2; equals g^2/Delta_10 for a two-level atom."""
        return float((self.chi[1] - self.chi[0]) / 2)

    @property
    def delta10(self) -> float:
        return float(abs(self.energies[1] - self.energies[0] - self.omega_r))

    @property
    def g1(self) -> float:
        return float(abs(self.g[1, 0]))

    @property
    def n_crit(self) -> float:
        return (self.delta10 / (2 * self.g1)) ** 2

    def rates(self, k: int) -> tuple[float, float]:
        """(chi_k, kappa) in rad/ns."""
        return TWO_PI * self.chi[k], TWO_PI * self.kappa


def chi_bar(g: np.ndarray, energies: np.ndarray, omega_r: float) -> np.ndarray:
    """chi_bar[l, k] = |g_lk|^2 / (e_l - e_k - w_r) for l > k, zero otherwise."""
    N = len(energies)
    out = np.zeros((N, N))
    for l in range(N):
        for k in range(l):
            det = energies[l] - energies[k] - omega_r
            if abs(g[l, k]) > 0 and abs(det) < RESONANCE_TOL:
                raise ReadoutError(f"transition {k}->{l} is resonant with the cavity")
            if g[l, k] != 0:
                out[l, k] = abs(g[l, k]) ** 2 / det
    return out


def shifts_from_couplings(g: np.ndarray, energies: np.ndarray, omega_r: float) -> np.ndarray:
    """chi_k = sum_l chi_bar[k, l] - chi_bar[l, k]."""
    cb = chi_bar(g, energies, omega_r)
    return cb.sum(axis=1) - cb.sum(axis=0)


def dispersive_shifts(spectrum: SpectrumResult, config: ReadoutConfig = ReadoutConfig()) -> DispersiveModel:
    N = config.levels
    if spectrum.n_keep < N:
        raise ReadoutError(f"spectrum has {spectrum.n_keep} levels, need {N}")
    n = np.asarray(spectrum.elements[config.node])[:N, :N]
    g = config.g * n / abs(n[0, 1])
    E = np.asarray(spectrum.energies[:N]) - spectrum.energies[0]
    return dispersive_model(E, g, config)


def dispersive_model(energies: np.ndarray, g: np.ndarray, config: ReadoutConfig) -> DispersiveModel:
    energies = np.asarray(energies, dtype=float)
    chi = shifts_from_couplings(g, energies, config.omega_r)
    ratio = 0.0
    for l in range(len(energies)):
        for k in range(l):
            if g[l, k] != 0:
                ratio = max(ratio, abs(g[l, k]) / abs(energies[l] - energies[k] - config.omega_r))
    notes = []
    if ratio > 0.1:
        notes.append(f"dispersive expansion parameter reaches {ratio:.3f}")
    chi_q = (chi[1] - chi[0]) / 2
    kappa = config.kappa if config.kappa is not None else config.kappa_over_chi * abs(chi_q)
    if kappa <= 0:
        raise ReadoutError("kappa must be positive (zero dispersive shift?)")
    return DispersiveModel(energies, np.asarray(g), chi, config.omega_r, kappa, ratio, notes)


# -- cavity dynamics ---------------------------------------------------------


@dataclass
class IQTrajectory:
    t: np.ndarray
    a: np.ndarray
    level: int

    @property
    def photons(self) -> np.ndarray:
        return np.abs(self.a) ** 2

    @property
    def leftover(self) -> float:
        return float(self.photons[-1])

    def at(self, t: float) -> complex:
        return complex(np.interp(t, self.t, self.a.real) + 1j * np.interp(t, self.t, self.a.imag))

    def columns(self) -> np.ndarray:
        return np.column_stack([self.t, self.a.real, self.a.imag, self.photons])


def _phi(x: np.ndarray, h: float):
    """(e^x - 1)/x * h and (e^x - 1 - x)/x^2 * h^2, stable for small x."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    p1 = np.where(small, 1 + x / 2 + x**2 / 6 + x**3 / 24, np.expm1(xs) / xs)
    p2 = np.where(small, 0.5 + x / 6 + x**2 / 24 + x**3 / 120, (np.expm1(xs) - xs) / xs**2)
    return p1 * h, p2 * h**2


def integrate_cavity(t: np.ndarray, drive: np.ndarray, chi: float, kappa: float, a0: complex = 0.0) -> np.ndarray:
    """Exact solution for a drive that is linear between samples (rad/ns units)."""
    t = np.asarray(t, dtype=float)
    drive = np.asarray(drive, dtype=complex)
    lam = 1j * chi - kappa / 2
    a = np.empty(len(t), dtype=complex)
    a[0] = a0
    h = np.diff(t)
    if np.allclose(h, h[0]):
        p1, p2 = _phi(lam * h[0], h[0])
        e = np.exp(lam * h[0])
        p1 = np.full(len(h), p1)
        p2 = np.full(len(h), p2)
        e = np.full(len(h), e)
    else:
        p1, p2 = _phi(lam * h, h)
        e = np.exp(lam * h)
    slope = np.diff(drive) / h
    for i in range(len(h)):
        a[i + 1] = e[i] * a[i] + 1j * (drive[i] * p1[i] + slope[i] * p2[i])
    return a


def steady_state(chi: float, kappa: float, Omega: float) -> complex:
    """-4 chi Omega/(kappa^2 + 4 chi^2) + i 2 kappa Omega/(kappa^2 + 4 chi^2)."""
    d = kappa**2 + 4 * chi**2
    return complex(-4 * chi * Omega / d, 2 * kappa * Omega / d)


def trial_envelope(t, t_m: float, Omega0: float):
    """Omega0 sin^3(pi t / t_m) on [0, t_m], zero outside (rad/ns)."""
    t = np.asarray(t, dtype=float)
    inside = (t >= 0) & (t <= t_m)
    return np.where(inside, Omega0 * np.sin(np.pi * np.clip(t, 0, t_m) / t_m) ** 3, 0.0)


@dataclass
class Pulse:
    t: np.ndarray
    envelope: np.ndarray  # complex, rad/ns

    def scaled(self, c: complex) -> Pulse:
        return Pulse(self.t, self.envelope * c)

    def columns(self) -> np.ndarray:
        return np.column_stack([self.t, self.envelope.real, self.envelope.imag])


def trial_pulse(config: ReadoutConfig, Omega0: float | None = None) -> Pulse:
    n = config.n_samples // 2
    t = np.linspace(0, config.t_m, n + 1)
    om = TWO_PI * (config.Omega0 if Omega0 is None else Omega0)
    return Pulse(t, trial_envelope(t, config.t_m, om).astype(complex))


def simulate_iq(model: DispersiveModel, pulse: Pulse, level: int) -> IQTrajectory:
    chi, kappa = model.rates(level)
    return IQTrajectory(pulse.t, integrate_cavity(pulse.t, pulse.envelope, chi, kappa), level)


def calibrate_amplitude(model: DispersiveModel, pulse: Pulse, level: int = 1, photons: float = 5.0) -> tuple[Pulse, float]:
    """Rescale a pulse so the cavity holds ``photons`` at mid-measurement.

    The cavity response is linear in the drive, so one simulation suffices.
    Returns the scaled pulse and the scale factor.
    """
    tr = simulate_iq(model, pulse, level)
    mid = abs(tr.at(0.5 * pulse.t[-1])) ** 2
    if mid == 0:
        raise ReadoutError("pulse leaves the cavity empty at mid-measurement")
    c = float(np.sqrt(photons / mid))
    return pulse.scaled(c), c


def synthesize_reset_pulse(
    model: DispersiveModel,
    config: ReadoutConfig,
    levels: Sequence[int] = (0, 1),
    trial: Pulse | None = None,
    max_gain: float = 1e3,
) -> Pulse:
    """Apply the inverse cavity transfer function of each level in Fourier space.

    Omega(w) = prod_k -(i/sqrt(kappa)) [i (w - chi_k) + kappa/2] Omega_trial(w).
    The trial pulse is zero padded to twice its length on an FFT grid of
    ``config.n_samples`` points; the result is returned on [0, t_m].
    """
    trial = trial_pulse(config) if trial is None else trial
    n = config.n_samples
    t_m = trial.t[-1]
    dt = t_m / (len(trial.t) - 1)
    padded = np.zeros(n, dtype=complex)
    m = min(len(trial.t), n)
    padded[:m] = trial.envelope[:m]
    w = TWO_PI * np.fft.fftfreq(n, d=dt)
    spec = np.fft.fft(padded)
    kappa = TWO_PI * model.kappa
    for k in levels:
        chi = TWO_PI * model.chi[k]
        spec = spec * (-1j / np.sqrt(kappa)) * (1j * (w - chi) + kappa / 2)
    out = np.fft.ifft(spec)[: len(trial.t)]
    gain = np.max(np.abs(out)) / max(np.max(np.abs(trial.envelope)), 1e-300)
    if gain > max_gain:
        warnings.warn(f"reset filter amplifies the trial pulse by {gain:.1e}", RingingWarning, stacklevel=2)
    return Pulse(trial.t.copy(), out)


def fourier_round_trip(pulse: Pulse, n_samples: int) -> Pulse:
    """Identity filter through the same FFT path (for checks)."""
    n = n_samples
    padded = np.zeros(n, dtype=complex)
    padded[: len(pulse.t)] = pulse.envelope
    out = np.fft.ifft(np.fft.fft(padded))[: len(pulse.t)]
    return Pulse(pulse.t.copy(), out)
