"""Spectral analysis: transitions, anharmonicities, matrix elements and bias sweeps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .circuit import Bias, Branch, CircuitNetlist, ModeKind
from .quantize import (
    REFERENCE_CUTOFFS,
    Cutoffs,
    EigenSolution,
    QuantizedSystem,
    eigensolve,
    flux_op_via_commutator,
    quantize_with,
)
from .units import capacitance_from_ec, inductance_from_el

FD_STEP = 1e-4 * 2 * np.pi  # rad, flux finite differences


class TrackingWarning(RuntimeWarning):
    pass


@dataclass
class SpectrumResult:
    """Eigen-frequencies and matrix elements of the lowest ``n_keep`` states.

    ``transitions[i, j] = E_i - E_j`` in GHz. ``elements`` maps operator
    labels (``n1``, ``phi3``, ... with the node id as suffix) to
    ``<i|O|j>`` tables. Phase elements of charge-like modes come from the
    commutator relation and are NaN where undefined.
    """

    energies: np.ndarray
    transitions: np.ndarray
    elements: dict[str, np.ndarray]
    modes: tuple

    @property
    def n_keep(self) -> int:
        return len(self.energies)

    @property
    def frequencies(self) -> np.ndarray:
        return self.energies - self.energies[0]

    @property
    def omega10(self) -> float:
        return float(self.transitions[1, 0])

    @property
    def eta(self) -> float:
        """w2 - 2 w1, from the ground state."""
        f = self.frequencies
        return float(f[2] - 2 * f[1])

    @property
    def alpha(self) -> float:
        """w3 - 2 w1, from the ground state."""
        f = self.frequencies
        return float(f[3] - 2 * f[1])

    def element(self, label: str, i: int, j: int) -> complex:
        return complex(self.elements[label][i, j])


def analyze(solution: EigenSolution, system: QuantizedSystem, n_keep: int = 6) -> SpectrumResult:
    if solution.k < n_keep:
        raise ValueError(f"need {n_keep} states, solution has {solution.k}")
    if n_keep < 4:
        raise ValueError("need at least 4 states for the anharmonicities")
    sol = EigenSolution(solution.energies[:n_keep], solution.vectors[:, :n_keep], solution.residuals[:n_keep])
    E = sol.energies
    spec = system.spec
    n_ops = [system.n_op(m) for m in range(spec.n_modes)]
    elements = {}
    for m, node in enumerate(spec.modes):
        elements[f"n{node}"] = sol.matrix_elements(n_ops[m])
    for m, node in enumerate(spec.modes):
        if f"phi{m}" in system.node_ops:
            elements[f"phi{node}"] = sol.matrix_elements(system.phi_op(m))
        else:
            elements[f"phi{node}"], _ = flux_op_via_commutator(sol, n_ops, spec.E_C, m)
    return SpectrumResult(E.copy(), E[:, None] - E[None, :], elements, spec.modes)


def diagonalize(
    netlist: CircuitNetlist,
    k: int = 6,
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    bias: Bias | None = None,
    tol: float = 1e-10,
) -> tuple[QuantizedSystem, EigenSolution, SpectrumResult]:
    system = quantize_with(netlist, cutoffs, bias)
    sol = eigensolve(system.H, k, tol)
    return system, sol, analyze(sol, system, k)


# -- sweeps ----------------------------------------------------------------


@dataclass
class SweepResult:
    """Tracked spectrum along a bias grid.

    ``frequencies[p, n]`` is w_0n at grid point p for the tracked state n.
    ``dispersion`` is (w01 - w01_ref) / w01_ref.
    """

    parameter: str
    grid: np.ndarray
    frequencies: np.ndarray
    reference: float
    omega01_ref: float
    dispersion: np.ndarray
    elements: dict[str, np.ndarray] = field(default_factory=dict)
    min_overlap: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def omega01(self) -> np.ndarray:
        return self.frequencies[:, 1]

    def peak_to_peak(self) -> float:
        """Peak-to-peak w01 variation over the grid, GHz."""
        return float(np.ptp(self.omega01))

    def columns(self) -> tuple[list[str], np.ndarray]:
        names = [self.parameter] + [f"w0{n}_GHz" for n in range(1, self.frequencies.shape[1])] + ["dispersion"]
        cols = [self.grid[:, None], self.frequencies[:, 1:], self.dispersion[:, None]]
        for key, val in self.elements.items():
            names.append(f"|<0|{key}|1>|")
            cols.append(val[:, None])
        return names, np.hstack(cols)


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 2 or not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
        raise ValueError("grid must be strictly monotone with at least two points")
    return g


def _track(prev: np.ndarray | None, vecs: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Permutation of the new states following the previous ones by overlap."""
    k = vecs.shape[1]
    if prev is None:
        return np.arange(k), 1.0, True
    ov = np.abs(prev.conj().T @ vecs) ** 2
    rows, cols = linear_sum_assignment(-ov)
    perm = np.empty(k, dtype=int)
    perm[rows] = cols
    best = ov[rows, cols]
    ok = bool(best.min() >= 0.5)
    if not ok:
        perm = np.arange(k)  # energy-order fallback
    return perm, float(best.min()), ok


def _sweep(
    netlist: CircuitNetlist,
    grid: np.ndarray,
    make_bias,
    parameter: str,
    reference: float,
    k: int,
    cutoffs: Cutoffs,
    track: bool,
    tol: float,
) -> SweepResult:
    system0 = quantize_with(netlist, cutoffs, make_bias(reference))
    n_ops = {f"n{node}": system0.n_op(m) for m, node in enumerate(system0.spec.modes)}
    freqs = np.empty((len(grid), k))
    elems = {key: np.empty(len(grid)) for key in n_ops}
    overlaps = np.ones(len(grid))
    notes = []
    prev = None
    for p, x in enumerate(grid):
        system = system0.with_bias(make_bias(x))
        sol = eigensolve(system.H, k, tol)
        perm = np.arange(k)
        if track:
            perm, overlaps[p], ok = _track(prev, sol.vectors)
            if not ok:
                msg = f"{parameter}={x:.6g}: max overlap {overlaps[p]:.3f} < 0.5, energy order used"
                notes.append(msg)
                warnings.warn(msg, TrackingWarning, stacklevel=3)
        vecs = sol.vectors[:, perm]
        E = sol.energies[perm]
        freqs[p] = E - E[0]
        for key, op in n_ops.items():
            elems[key][p] = abs(vecs[:, 0].conj() @ (op @ vecs[:, 1]))
        prev = vecs
    ref_idx = np.flatnonzero(np.isclose(grid, reference, rtol=0, atol=1e-12))
    if len(ref_idx):
        w_ref = freqs[ref_idx[0], 1]
    else:
        sol = eigensolve(system0.with_bias(make_bias(reference)).H, k, tol)
        w_ref = sol.frequencies[1]
    disp = (freqs[:, 1] - w_ref) / w_ref
    return SweepResult(parameter, grid, freqs, reference, float(w_ref), disp, elems, overlaps, notes)


def sweep_flux(
    netlist: CircuitNetlist,
    grid: Sequence[float],
    k: int = 6,
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    reference: float = np.pi,
    track: bool = True,
    tol: float = 1e-10,
) -> SweepResult:
    """w_0n versus external flux (rad), states followed adiabatically."""
    g = _check_grid(grid)
    if g.min() < 0 or g.max() > 2 * np.pi + 1e-12:
        raise ValueError("flux grid must lie within [0, 2 pi]")
    ng = netlist.bias.ng_ext
    return _sweep(netlist, g, lambda x: Bias(ng, float(x)), "phi_ext", reference, k, cutoffs, track, tol)


def sweep_charge(
    netlist: CircuitNetlist,
    grid: Sequence[float],
    k: int = 6,
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    reference: float = 0.0,
    track: bool = True,
    tol: float = 1e-10,
) -> SweepResult:
    """w_0n versus offset charge (Cooper pairs) over at most one period."""
    g = _check_grid(grid)
    if np.ptp(g) > 1 + 1e-12:
        raise ValueError("charge grid must span at most one period (1 Cooper pair)")
    phi = netlist.bias.phi_ext
    return _sweep(netlist, g, lambda x: Bias(float(x), phi), "ng_ext", reference, k, cutoffs, track, tol)


def charge_dispersion(
    netlist: CircuitNetlist, cutoffs: Cutoffs = REFERENCE_CUTOFFS, points: int = 5, k: int = 4
) -> float:
    """Peak-to-peak w01 over one charge period (GHz), sampled on [0, 1/2].

    The spectrum is even and 1-periodic in the offset charge, so half a
    period covers every value.
    """
    res = sweep_charge(netlist, np.linspace(0, 0.5, points), k=k, cutoffs=cutoffs, track=False)
    return res.peak_to_peak()


# -- derivatives -----------------------------------------------------------


def flux_derivative(
    system: QuantizedSystem, solution: EigenSolution, i: int = 1, j: int = 0
) -> float:
    """d(E_i - E_j)/d phi_ext in GHz/rad from the bias term of the Hamiltonian.

    By Hellmann-Feynman, dE_k/dphi_ext = sum_b E_L^b <k|phi_b|k> over the
    closure branches (the constant phi_ext part cancels in differences).
    """
    spec = system.spec
    op = None
    for ct in spec.closure_terms:
        for m, c in enumerate(ct.coeffs):
            if c:
                term = (ct.EL * c) * system.phi_op(m)
                op = term if op is None else op + term
    if op is None:
        return 0.0
    vi, vj = solution.vectors[:, i], solution.vectors[:, j]
    return float(np.real(vi.conj() @ (op @ vi)) - np.real(vj.conj() @ (op @ vj)))


def finite_difference(
    netlist: CircuitNetlist,
    parameter: str,
    at: float | None = None,
    step: float | None = None,
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    k: int = 4,
    system: QuantizedSystem | None = None,
) -> float:
    """Central difference of w01 w.r.t. ``phi_ext`` (rad) or ``ng_ext`` (Cooper pairs)."""
    b = netlist.bias
    if system is None:
        system = quantize_with(netlist, cutoffs, b)
    if parameter == "phi_ext":
        x0 = b.phi_ext if at is None else at
        h = FD_STEP if step is None else step
        make = lambda x: Bias(b.ng_ext, x)
    elif parameter == "ng_ext":
        x0 = b.ng_ext if at is None else at
        h = 1e-3 if step is None else step
        make = lambda x: Bias(x, b.phi_ext)
    else:
        raise ValueError(parameter)
    wp = eigensolve(system.with_bias(make(x0 + h)).H, k).frequencies[1]
    wm = eigensolve(system.with_bias(make(x0 - h)).H, k).frequencies[1]
    return float((wp - wm) / (2 * h))


# -- reference single-mode qubits -----------------------------------------


class ReferenceKind(Enum):
    TRANSMON = "transmon"
    FLUXONIUM = "fluxonium"
    HEAVY_FLUXONIUM = "heavy_fluxonium"


@dataclass(frozen=True)
class ReferenceQubit:
    """Single-mode comparison device; energies in GHz."""

    kind: ReferenceKind
    EJ: float
    EC: float
    EL: float | None = None

    def __post_init__(self):
        if self.EJ <= 0 or self.EC <= 0:
            raise ValueError("EJ and EC must be positive")
        if self.kind is ReferenceKind.TRANSMON:
            if self.EL is not None:
                raise ValueError("transmon has no inductive energy")
        elif not (self.EL or 0) > 0:
            raise ValueError("fluxonium variants need EL > 0")

    def netlist(self, bias: Bias | None = None) -> CircuitNetlist:
        L = None if self.EL is None else inductance_from_el(self.EL)
        br = Branch("q", 0, 1, capacitance_from_ec(self.EC), L, self.EJ)
        return CircuitNetlist((0, 1), (br,), 0, bias=bias or Bias())

    @property
    def cutoffs(self) -> Cutoffs:
        if self.kind is ReferenceKind.TRANSMON:
            return Cutoffs(charge=25, flux=3)
        return Cutoffs(charge=3, flux=120)

    @property
    def bias_parameter(self) -> str:
        return "ng_ext" if self.kind is ReferenceKind.TRANSMON else "phi_ext"


# Transmon with E_J/E_C = 50 and E_C = 0.27 GHz. The fluxonium sets are
# representative literature-scale values, labelled as reference models only.
TRANSMON = ReferenceQubit(ReferenceKind.TRANSMON, EJ=13.5, EC=0.27)
TUNABLE_TRANSMON = ReferenceQubit(ReferenceKind.TRANSMON, EJ=13.75, EC=0.275)
FLUXONIUM = ReferenceQubit(ReferenceKind.FLUXONIUM, EJ=4.0, EC=1.0, EL=0.9)
HEAVY_FLUXONIUM = ReferenceQubit(ReferenceKind.HEAVY_FLUXONIUM, EJ=3.4, EC=0.48, EL=0.13)
REFERENCE_QUBITS = {
    "transmon": TRANSMON,
    "tunable_transmon": TUNABLE_TRANSMON,
    "fluxonium": FLUXONIUM,
    "heavy_fluxonium": HEAVY_FLUXONIUM,
}


def reference_spectrum(qubit: ReferenceQubit, grid: Sequence[float], k: int = 6, reference: float | None = None) -> SweepResult:
    """Sweep a reference qubit over its natural bias (charge or flux)."""
    if qubit.kind is ReferenceKind.TRANSMON:
        ref = 0.0 if reference is None else reference
        return sweep_charge(qubit.netlist(), grid, k=k, cutoffs=qubit.cutoffs, reference=ref)
    ref = np.pi if reference is None else reference
    return sweep_flux(qubit.netlist(), grid, k=k, cutoffs=qubit.cutoffs, reference=ref)
