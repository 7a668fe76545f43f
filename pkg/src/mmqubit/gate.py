"""Charge-driven single-qubit gates on a truncated multi-level model.

Frequencies are in GHz; the propagation works in rad/ns, so drive
amplitudes ``Omega0`` and detunings are angular (rad/ns) and times in ns.

The default ``"dressed"`` coupling keeps the qubit transition with
strength lambda_1 and the leakage transition 1 <-> leak with strength
lambda_2 + i lambda_3, in the interaction picture with the leakage term
rotating at alpha = w_leak - 2 w_1. ``"full"`` keeps every drive matrix
element under the rotating-wave approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .spectrum import SpectrumResult

TWO_PI = 2 * np.pi
X_GATE = np.array([[0, 1], [1, 0]], dtype=complex)
Y_GATE = np.array([[0, -1j], [1j, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


class ControlError(ValueError):
    pass


class IntegratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class ControlModel:
    """Levels, drive matrix elements and the designated leakage level.

    ``O`` is the drive-node charge operator in the eigenbasis, rephased
    so that O[0, 1] is real and positive (the drive phase is chosen so the
    qubit transition has no quadrature component).
    """

    frequencies: np.ndarray  # GHz, relative to the ground state
    O: np.ndarray
    leak_level: int = 3
    coupling: str = "dressed"

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        O = np.asarray(self.O, dtype=complex)
        if O.shape != (len(f), len(f)):
            raise ControlError("matrix elements must be N x N with N = number of levels")
        if len(f) < 3:
            raise ControlError("need at least 3 levels")
        if not np.allclose(O, O.conj().T, atol=1e-10):
            raise ControlError("drive operator must be Hermitian")
        if abs(O[0, 1]) == 0:
            raise ControlError("drive node has <0|n|1> = 0 and cannot drive the qubit")
        if not 1 < self.leak_level < len(f):
            raise ControlError("leak level must be a non-computational kept level")
        if self.coupling not in ("dressed", "full"):
            raise ControlError(f"unknown coupling {self.coupling!r}")
        phase = O[0, 1] / abs(O[0, 1])
        # |k><j| picks up conj(phase_k) phase_j; a diagonal unitary makes O01 real
        D = np.ones(len(f), dtype=complex)
        D[1] = np.conj(phase)
        O = D.conj()[:, None] * O * D[None, :]
        object.__setattr__(self, "frequencies", f - f[0])
        object.__setattr__(self, "O", O)

    @property
    def n_levels(self) -> int:
        return len(self.frequencies)

    @property
    def omega10(self) -> float:
        return float(self.frequencies[1])

    @property
    def alpha(self) -> float:
        """Leakage gap w_leak - 2 w_1 (GHz)."""
        return float(self.frequencies[self.leak_level] - 2 * self.frequencies[1])

    @property
    def lam1(self) -> float:
        n, m = self.O[0, 1].real, self.O[0, 1].imag
        return float((n**2 + m**2) / n)

    @property
    def _lam23(self) -> complex:
        o01, o13 = self.O[0, 1], self.O[1, self.leak_level]
        return (o01.imag + 1j * o01.real) * (o13.imag - 1j * o13.real)

    @property
    def lam2(self) -> float:
        return float(self._lam23.real)

    @property
    def lam3(self) -> float:
        return float(self._lam23.imag)

    def excitation(self) -> np.ndarray:
        """Drive-photon count per level: 0, 1, then 2 for every higher level."""
        e = np.full(self.n_levels, 2.0)
        e[:2] = (0.0, 1.0)
        return e

    def couplings(self) -> np.ndarray:
        """Upper-triangular matrix C[j, k] (j < k) multiplying E(t)/2."""
        N = self.n_levels
        if self.coupling == "full":
            return np.triu(self.O, 1)
        C = np.zeros((N, N), dtype=complex)
        C[0, 1] = self.lam1
        C[1, self.leak_level] = self.lam2 + 1j * self.lam3
        return C

    def without(self, j: int, k: int) -> ControlModel:
        """Copy with the j <-> k drive element removed."""
        O = self.O.copy()
        O[j, k] = O[k, j] = 0
        return replace(self, O=O)

    def rephased(self, phase: float) -> ControlModel:
        """Multiply every drive element O[j, k] (j < k) by exp(i phase)."""
        up = np.triu(self.O, 1) * np.exp(1j * phase)
        return replace(self, O=up + up.conj().T + np.diag(np.diag(self.O)))

    def optimal_beta(self) -> float:
        return optimal_beta(self.lam1, self.lam2, self.lam3)


def optimal_beta(lam1: float, lam2: float, lam3: float) -> float:
    """beta = (lambda_2^2 + lambda_3^2) / (2 lambda_1^2)."""
    return (lam2**2 + lam3**2) / (2 * lam1**2)


def build_control_model(
    spectrum: SpectrumResult,
    drive_node: str = "n1",
    levels: int = 4,
    leak_level: int = 3,
    coupling: str = "dressed",
) -> ControlModel:
    """Control model from a spectrum, driving the charge of ``drive_node``."""
    if spectrum.n_keep < max(4, levels):
        raise ControlError(f"need at least {max(4, levels)} levels, spectrum has {spectrum.n_keep}")
    if drive_node not in spectrum.elements:
        raise ControlError(f"no matrix elements for {drive_node!r}")
    O = np.asarray(spectrum.elements[drive_node])[:levels, :levels]
    return ControlModel(spectrum.energies[:levels], O, leak_level, coupling)


def transmon_model(omega10: float = 5.0, alpha: float = -0.25, levels: int = 3) -> ControlModel:
    """Ladder model with <k|n|k+1> proportional to sqrt(k+1), leak level 2."""
    k = np.arange(levels)
    f = omega10 * k + alpha * k * (k - 1) / 2
    O = np.diag(np.sqrt(k[1:]).astype(complex), 1)
    return ControlModel(f, O + O.T, leak_level=2)


# -- pulses ------------------------------------------------------------------


@dataclass(frozen=True)
class PulseSchedule:
    """sin^2 envelope, optionally with a DRAG quadrature and detuning law.

    Envelope: Omega(t) = Omega0 sin^2(pi t / t_g) (rad/ns). DRAG adds
    i dOmega/dt / alpha. Level k gets detuning e_k * (delta + stark |Omega|^2)
    with e_k the drive-photon count of the level.
    """

    tg: float
    Omega0: float
    shape: str = "hahn"
    alpha: float | None = None  # rad/ns, required for DRAG
    beta: float = 1.0
    delta: float = 0.0  # constant detuning (rad/ns)
    stark: float = 0.0  # time-dependent detuning coefficient (ns/rad)
    n_steps: int = 2000
    drag_scale: float = 1.0

    def __post_init__(self):
        if self.tg <= 0:
            raise ValueError("gate time must be positive")
        if self.n_steps < 200:
            raise ValueError("need dt <= t_g/200")
        if self.shape not in ("hahn", "drag"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.shape == "drag" and not self.alpha:
            raise ValueError("DRAG needs a nonzero alpha")

    @property
    def dt(self) -> float:
        return self.tg / self.n_steps

    def omega(self, t):
        return self.Omega0 * np.sin(np.pi * np.asarray(t) / self.tg) ** 2

    def omega_dot(self, t):
        return self.Omega0 * np.pi / self.tg * np.sin(2 * np.pi * np.asarray(t) / self.tg)

    def envelope(self, t) -> np.ndarray:
        """Complex drive envelope E(t)."""
        E = self.omega(t).astype(complex)
        if self.shape == "drag":
            E = E + 1j * self.drag_scale * self.omega_dot(t) / self.alpha
        return E

    def detuning(self, t) -> np.ndarray:
        return self.delta + self.stark * np.abs(self.omega(t)) ** 2

    def sample(self, n: int = 501) -> np.ndarray:
        """(t, Re E, Im E) rows for export."""
        t = np.linspace(0, self.tg, n)
        E = self.envelope(t)
        return np.column_stack([t, E.real, E.imag])


def hahn_schedule(model: ControlModel, tg: float, n_steps: int = 2000) -> PulseSchedule:
    """pi pulse: lambda_1 Omega0 t_g / 2 = pi."""
    return PulseSchedule(tg, TWO_PI / (model.lam1 * tg), n_steps=n_steps)


def drag_correct(schedule: PulseSchedule, model: ControlModel, beta: float = 1.0, detuning: bool = True) -> PulseSchedule:
    """Add the i dOmega/dt / alpha quadrature and the phase-correcting detuning.

    delta(t) = -|Omega|^2 (2 beta lam1^2 - lam2^2 - lam3^2) / (2 alpha).
    """
    a = TWO_PI * model.alpha
    if a == 0:
        raise ControlError("DRAG needs alpha != 0")
    stark = 0.0
    if detuning:
        stark = -(2 * beta * model.lam1**2 - model.lam2**2 - model.lam3**2) / (2 * a)
    return replace(schedule, shape="drag", alpha=a, beta=beta, stark=stark)


# -- propagation -------------------------------------------------------------


@dataclass
class GateResult:
    U: np.ndarray
    error: float
    leakage: np.ndarray  # L_k for k = 0, 1
    unitarity: float
    schedule: PulseSchedule

    @property
    def Uq(self) -> np.ndarray:
        return self.U[:2, :2]


def fidelity(Uq: np.ndarray, V: np.ndarray, d: int = 2) -> float:
    """(Tr[Uq Uq^dag] + |Tr[Uq V^dag]|^2) / (d (d + 1))."""
    return float((np.trace(Uq @ Uq.conj().T).real + abs(np.trace(Uq @ V.conj().T)) ** 2) / (d * (d + 1)))


def leakage(U: np.ndarray, k: int, d: int = 2) -> float:
    """(1/d) sum_{j >= 2, j != k} |U_jk|^2 + |U_kj|^2."""
    j = [j for j in range(2, U.shape[0]) if j != k]
    return float((np.sum(np.abs(U[j, k]) ** 2) + np.sum(np.abs(U[k, j]) ** 2)) / d)


def _hamiltonians(model: ControlModel, schedule: PulseSchedule, t: np.ndarray, frame: str) -> np.ndarray:
    w = TWO_PI * model.frequencies
    wd = w[1]
    C = model.couplings() if frame == "rotating" else np.triu(model.O, 1)
    E = schedule.envelope(t)
    gap = w[None, :] - w[:, None]  # w_k - w_j at [j, k]
    if frame == "rotating":
        ph = np.exp(-1j * (gap[None] - wd) * t[:, None, None])
        H = C[None] * ph * (E / 2)[:, None, None]
    else:
        drive = (E * np.exp(1j * wd * t)).real
        H = C[None] * np.exp(-1j * gap[None] * t[:, None, None]) * drive[:, None, None]
    H = H + np.conj(np.swapaxes(H, 1, 2))
    diag = schedule.detuning(t)[:, None] * model.excitation()[None, :]
    idx = np.arange(model.n_levels)
    H[:, idx, idx] += diag
    return H


def _ordered_product(Us: np.ndarray) -> np.ndarray:
    """U_n ... U_2 U_1 by pairwise reduction."""
    while len(Us) > 1:
        if len(Us) % 2:
            last = Us[-1:]
            Us = np.concatenate([Us[1:-1:2] @ Us[0:-1:2], last])
        else:
            Us = Us[1::2] @ Us[0::2]
    return Us[0]


def propagate(
    model: ControlModel,
    schedule: PulseSchedule,
    target: np.ndarray = X_GATE,
    frame: str = "rotating",
    unitarity_tol: float = 1e-8,
) -> GateResult:
    """Fourth-order Magnus propagation of the time-dependent Hamiltonian.

    ``frame="lab"`` keeps the counter-rotating terms (drive Re[E e^{i w_d t}]
    on every matrix element) for cross-checks; it needs a step well below
    1/w_max.
    """
    if frame not in ("rotating", "lab"):
        raise ValueError(frame)
    n = schedule.n_steps
    dt = schedule.dt
    t0 = np.arange(n) * dt
    c = np.sqrt(3) / 6
    H1 = _hamiltonians(model, schedule, t0 + (0.5 - c) * dt, frame)
    H2 = _hamiltonians(model, schedule, t0 + (0.5 + c) * dt, frame)
    comm = H2 @ H1 - H1 @ H2
    K = dt / 2 * (H1 + H2) - 1j * np.sqrt(3) / 12 * dt**2 * comm
    K = 0.5 * (K + np.conj(np.swapaxes(K, 1, 2)))
    w, v = np.linalg.eigh(K)
    steps = (v * np.exp(-1j * w)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
    U = _ordered_product(steps)
    N = model.n_levels
    dev = float(np.linalg.norm(U.conj().T @ U - np.eye(N)))
    if dev > unitarity_tol * N:
        raise IntegratorError(f"propagator not unitary: |U^dag U - I| = {dev:.2e}")
    err = 1 - fidelity(U[:2, :2], target)
    L = np.array([leakage(U, k) for k in (0, 1)])
    return GateResult(U, err, L, dev, schedule)


def gate_sweep(
    model: ControlModel, tgs: Sequence[float], shape: str = "hahn", beta: float = 1.0, n_steps: int = 2000
) -> list[GateResult]:
    out = []
    for tg in tgs:
        s = hahn_schedule(model, tg, n_steps)
        if shape == "drag":
            s = drag_correct(s, model, beta)
        out.append(propagate(model, s))
    return out


# -- calibration -------------------------------------------------------------


@dataclass
class Calibration:
    Omega0: float
    delta: float
    result: GateResult
    converged: bool
    nfev: int
    history: list[float] = field(default_factory=list)


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float],
    xatol: float = 1e-10,
    fatol: float = 1e-16,
    maxfev: int = 600,
):
    """Deterministic Nelder-Mead from an axis-aligned initial simplex."""
    x0 = np.asarray(x0, dtype=float)
    simplex = [x0] + [x0 + s * e for s, e in zip(steps, np.eye(len(x0)))]
    return minimize(
        f, x0, method="Nelder-Mead",
        options=dict(initial_simplex=np.array(simplex), xatol=xatol, fatol=fatol, maxfev=maxfev),
    )


def calibrate(
    model: ControlModel,
    tg: float,
    target: np.ndarray = X_GATE,
    shape: str = "drag",
    beta: float | None = None,
    n_steps: int = 1000,
    maxfev: int = 600,
) -> Calibration:
    """Optimize the amplitude Omega0 and a constant drive detuning delta.

    DRAG pulses use the optimal beta, for which the time-dependent
    detuning law vanishes, so delta carries the whole phase correction.
    """
    base = hahn_schedule(model, tg, n_steps)
    if shape == "drag":
        b = model.optimal_beta() if beta is None else beta
        base = drag_correct(base, model, b)
    history: list[float] = []

    def cost(x):
        s = replace(base, Omega0=float(x[0]), delta=float(x[1]))
        try:
            e = propagate(model, s, target).error
        except IntegratorError:
            e = 1.0
        history.append(e)
        return e

    res = nelder_mead(cost, [base.Omega0, 0.0], [0.05 * base.Omega0, 0.05], maxfev=maxfev)
    s = replace(base, Omega0=float(res.x[0]), delta=float(res.x[1]))
    return Calibration(float(res.x[0]), float(res.x[1]), propagate(model, s, target), bool(res.success), int(res.nfev), history)
