"""Relaxation and dephasing estimates from golden-rule rates and 1/f noise.

Rates are in 1/s, times in microseconds, frequencies in GHz (linear).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.special import k0e

from . import units
from .circuit import Bias, CircuitNetlist, ModeKind, build_matrices, hamiltonian_spec
from .quantize import (
    REFERENCE_CUTOFFS,
    Cutoffs,
    EigenSolution,
    ModeBasis,
    QuantizedSystem,
    eigensolve,
    quantize_with,
    trig_terms,
)
from .spectrum import finite_difference, flux_derivative

ZERO_FREQ_TOL = 1e-6  # GHz; transitions closer to zero are excluded


class ChannelKind(Enum):
    DIELECTRIC = "dielectric"
    INDUCTIVE = "inductive"
    QUASIPARTICLE = "quasiparticle"
    FLUX_1F = "flux_1f"
    CHARGE_1F = "charge_1f"

    @property
    def depolarizing(self) -> bool:
        return self in (ChannelKind.DIELECTRIC, ChannelKind.INDUCTIVE, ChannelKind.QUASIPARTICLE)


@dataclass(frozen=True)
class NoiseParameters:
    """Noise-model assumptions.

    ``A_flux`` in units of Phi_0, ``A_charge`` in units of e. ``omega_ir``
    is angular (rad/s) and ``t_meas`` in seconds. ``delta_eV`` is the
    superconducting gap. ``re_y_qp`` optionally replaces the default
    quasiparticle admittance; it receives (omega rad/s, T K, EJ GHz) and
    returns Re Y in siemens.
    """

    T: float = 0.015
    Q_cap: float = 3e6
    Q_ind: float = 5e8
    x_qp: float = 3e-6
    delta_eV: float = 3.4e-4
    A_flux: float = 1e-6
    A_charge: float = 1e-4
    omega_ir: float = 2 * np.pi * 1.0
    t_meas: float = 10e-6
    dielectric_operator: str = "voltage"  # or "node_difference"
    charge_slope: str = "local"  # or "worst"
    transitions: str = "outgoing"  # or "all"
    re_y_qp: Callable | None = None

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("temperature must be positive")
        if self.Q_cap <= 0 or self.Q_ind <= 0:
            raise ValueError("quality factors must be positive")
        if self.A_flux < 0 or self.A_charge < 0:
            raise ValueError("noise amplitudes must be non-negative")
        if self.dielectric_operator not in ("voltage", "node_difference"):
            raise ValueError(self.dielectric_operator)
        if self.charge_slope not in ("local", "worst"):
            raise ValueError(self.charge_slope)
        if self.transitions not in ("outgoing", "all"):
            raise ValueError(self.transitions)

    def describe(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "T", "Q_cap", "Q_ind", "x_qp", "delta_eV", "A_flux", "A_charge",
            "omega_ir", "t_meas", "dielectric_operator", "charge_slope", "transitions")}
        d["re_y_qp"] = "default" if self.re_y_qp is None else getattr(self.re_y_qp, "__name__", "custom")
        return d


# -- spectral densities ------------------------------------------------------


def _angular(f_GHz):
    return units.TWO_PI * 1e9 * np.asarray(f_GHz, dtype=float)


def thermal_factor(omega_GHz, T: float):
    """coth(hbar|w|/2kT) / (1 + exp(-hbar w/kT)) for w = 2 pi f.

    Tends to 1 for emission (w > 0) and to exp(-hbar|w|/kT) for absorption
    as T -> 0. Zero frequency diverges and returns inf.
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    x = units.HBAR * _angular(omega_GHz) / (units.K_B * T)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        ax = np.abs(x)
        coth = np.where(ax > 0, 1.0 / np.tanh(ax / 2), np.inf)
        # 1/(1+exp(-x)) written to avoid overflow for large negative x
        logistic = np.where(x >= 0, 1.0 / (1.0 + np.exp(-x)), np.exp(x) / (1.0 + np.exp(x)))
        out = coth * logistic
    return out if out.ndim else float(out)


def re_y_qp_default(omega: float, T: float, EJ_GHz: float, x_qp: float, delta_eV: float) -> float:
    """Single-junction quasiparticle admittance (Re Y) in siemens.

    sqrt(2/pi) (8/R_K) (E_J/Delta) (2 Delta/hbar w)^(3/2) x_qp
    * sqrt(x/2) K0(x/2) sinh(x/2),  x = hbar|w|/kT.
    """
    w = abs(omega)
    delta = delta_eV * units.E_CHARGE
    EJ = EJ_GHz * 1e9 * units.H_PLANCK
    x = units.HBAR * w / (units.K_B * T)
    # K0(y) sinh(y) = k0e(y) e^-y sinh(y) = k0e(y) (1 - e^-2y)/2
    ks = k0e(x / 2) * (-np.expm1(-x)) / 2
    return float(
        np.sqrt(2 / np.pi) * (8 / units.R_K) * (EJ / delta) * (2 * delta / (units.HBAR * w)) ** 1.5
        * x_qp * np.sqrt(x / 2) * ks
    )


# -- transitions -------------------------------------------------------------


def transition_pairs(n_keep: int, mode: str = "outgoing", computational: Sequence[int] = (0, 1)) -> list[tuple[int, int]]:
    """Ordered pairs (i, j) meaning a transition i -> j.

    ``"outgoing"`` starts in a computational state and ends anywhere else
    (this covers 1 -> 0, 0 -> 1 and thermally activated leaks upward).
    ``"all"`` also adds decays from higher levels into the computational
    states.
    """
    comp = set(computational)
    if mode == "outgoing":
        return [(i, j) for i in computational for j in range(n_keep) if i != j]
    if mode == "all":
        return [(i, j) for i in range(n_keep) for j in range(n_keep) if i != j and (i in comp or j in comp)]
    raise ValueError(mode)


def golden_rule_sum(elements: np.ndarray, energies_i, energies_j, psd: Callable, pairs) -> tuple[float, list]:
    """sum over pairs of |<i|O|j>|^2 S(w_ij), with w_ij = E_i - E_j (GHz).

    ``elements`` must already carry 1/hbar^2 and coupling prefactors.
    """
    total = 0.0
    parts = []
    for i, j in pairs:
        w = energies_i[i] - energies_j[j]
        if abs(w) < ZERO_FREQ_TOL:
            continue
        r = float(abs(elements[i, j]) ** 2 * psd(w))
        total += r
        parts.append((i, j, w, r))
    return total, parts


# -- branch operators --------------------------------------------------------


def _branch_charge_weights(netlist: CircuitNetlist, branch, mode: str) -> np.ndarray:
    c = netlist.branch_phase_coeffs(branch).astype(float)
    if mode == "node_difference":
        return c
    C = build_matrices(netlist).C_matrix
    return branch.C * np.linalg.solve(C, c)


def _combine(system: QuantizedSystem, sol: EigenSolution, weights: np.ndarray, prefix: str) -> np.ndarray:
    M = np.zeros((sol.k, sol.k), dtype=complex)
    for m, w in enumerate(weights):
        if w:
            op = system.n_op(m) if prefix == "n" else system.phi_op(m)
            M += w * sol.matrix_elements(op)
    return M


def gamma_dielectric(netlist, system, sol, params: NoiseParameters, n_keep: int = 6) -> tuple[float, dict]:
    pairs = transition_pairs(n_keep, params.transitions)
    E = sol.energies
    out, detail = 0.0, {}
    for b in netlist.branches:
        w = _branch_charge_weights(netlist, b, params.dielectric_operator)
        M = _combine(system, sol, w, "n")[:n_keep, :n_keep] * (2 * units.E_CHARGE / units.HBAR)
        C = b.C * 1e-15
        psd = lambda f, C=C: 2 * units.HBAR / (C * params.Q_cap) * thermal_factor(f, params.T)
        g, _ = golden_rule_sum(M, E, E, psd, pairs)
        detail[b.name] = g
        out += g
    return out, detail


def gamma_inductive(netlist, system, sol, params: NoiseParameters, n_keep: int = 6) -> tuple[float, dict]:
    pairs = transition_pairs(n_keep, params.transitions)
    E = sol.energies
    out, detail = 0.0, {}
    for b in netlist.branches:
        if b.L is None:
            continue
        c = netlist.branch_phase_coeffs(b).astype(float)
        M = _combine(system, sol, c, "phi")[:n_keep, :n_keep] * (units.PHI0_REDUCED / units.HBAR)
        L = b.L * 1e-9
        psd = lambda f, L=L: 2 * units.HBAR / (L * params.Q_ind) * thermal_factor(f, params.T)
        g, _ = golden_rule_sum(M, E, E, psd, pairs)
        detail[b.name] = g
        out += g
    return out, detail


@dataclass
class ParityPair:
    """Even- and odd-sector eigenstates for one junction, embedded in a
    basis where that junction's charge-like modes count single electrons."""

    even_energies: np.ndarray
    odd_energies: np.ndarray
    elements: np.ndarray  # <i_even| sin(phi_b/2) |j_odd>
    changes_parity: bool


def _embed(basis: ModeBasis, se_dim: int, odd: bool) -> np.ndarray:
    """Cooper-pair charge states (optionally shifted by 1/2) into electron states."""
    Nc = basis.cutoff
    Ne = (se_dim - 1) // 2
    E = np.zeros((se_dim, basis.dim))
    for idx, n in enumerate(range(-Nc, Nc + 1)):
        E[2 * n + (1 if odd else 0) + Ne, idx] = 1.0
    return E


def qp_elements(
    netlist: CircuitNetlist,
    branch,
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    n_keep: int = 6,
    bias: Bias | None = None,
    solution: tuple[QuantizedSystem, EigenSolution] | None = None,
) -> ParityPair:
    """Matrix elements of sin(phi_b/2) for junction branch ``branch``.

    Charge-like modes touched by the junction are written in the
    single-electron basis; a quasiparticle crossing the junction moves the
    island between the even and odd sectors, so the final states are
    computed at an offset shifted by half a Cooper pair.
    """
    bias = netlist.bias if bias is None else bias
    if solution is None:
        sys_e = quantize_with(netlist, cutoffs, bias)
        sol_e = eigensolve(sys_e.H, n_keep)
    else:
        sys_e, sol_e = solution
    spec = sys_e.spec
    c = netlist.branch_phase_coeffs(branch)
    flips = [m for m, k in enumerate(spec.kinds) if k is ModeKind.CHARGE and c[m]]
    if flips:
        from .circuit import offset_charge_vector

        g = offset_charge_vector(spec.kinds, bias.ng_ext)
        g_o = g.copy()
        g_o[flips] += 0.5
        sys_o = sys_e.with_bias(Bias(g_o, bias.phi_ext))
        sol_o = eigensolve(sys_o.H, n_keep)
        # the Hamiltonian drops the constant 4 g E_C g; restore the sector difference
        shift = 4 * (g_o @ spec.E_C @ g_o - g @ spec.E_C @ g)
    else:
        sol_o, shift = sol_e, 0.0

    se_bases = list(sys_e.bases)
    emb_e, emb_o = [], []
    for m, b in enumerate(sys_e.bases):
        if m in flips:
            se = ModeBasis(b.kind, 2 * b.cutoff + 1, "single_electron", b.E_C)
            se_bases[m] = se
            emb_e.append(_embed(b, se.dim, odd=False))
            emb_o.append(_embed(b, se.dim, odd=True))
        else:
            emb_e.append(np.eye(b.dim))
            emb_o.append(np.eye(b.dim))
    se_sys = QuantizedSystem(spec, se_bases, None)  # operator container only

    def lift_vectors(vecs, embs):
        dims = [b.dim for b in sys_e.bases]
        k = vecs.shape[1]
        t = vecs.reshape(dims + [k])
        for m, E in enumerate(embs):
            t = np.moveaxis(np.tensordot(E, t, axes=([1], [m])), 0, m)
        return t.reshape(-1, k)

    ve = lift_vectors(sol_e.vectors[:, :n_keep], emb_e)
    vo = lift_vectors(sol_o.vectors[:, :n_keep], emb_o)
    op = se_sys.operator(trig_terms(c, "sin", half=True))
    M = ve.conj().T @ (op @ vo)
    return ParityPair(sol_e.energies[:n_keep], sol_o.energies[:n_keep] + shift, M, bool(flips))


def gamma_quasiparticle(
    netlist, system, sol, params: NoiseParameters, n_keep: int = 6, cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    bias: Bias | None = None,
) -> tuple[float, dict]:
    """Quasiparticle tunnelling through every junction.

    Transitions run from the computational (even-sector) states to any
    kept state of the final parity sector and back. Pure parity switches
    (same level index, no energy change) are not counted as relaxation.
    """
    out, detail = 0.0, {}
    for b in netlist.branches:
        if b.EJ is None:
            continue
        pp = qp_elements(netlist, b, cutoffs, n_keep, bias=bias, solution=(system, sol))
        if params.re_y_qp is None:
            rey = lambda w, EJ=b.EJ: re_y_qp_default(w, params.T, EJ, params.x_qp, params.delta_eV)
        else:
            rey = lambda w, EJ=b.EJ: params.re_y_qp(w, params.T, EJ)

        def psd(f, rey=rey):
            w = float(_angular(f))
            return 2 * units.HBAR * abs(w) * rey(w) * thermal_factor(f, params.T)

        M = pp.elements / units.E_CHARGE
        g = 0.0
        for i in (0, 1):
            for j in range(n_keep):
                w = pp.even_energies[i] - pp.odd_energies[j]
                if i == j or abs(w) < ZERO_FREQ_TOL:
                    continue
                g += abs(M[i, j]) ** 2 * psd(w)
                if params.transitions == "all":
                    g += abs(M[i, j]) ** 2 * psd(-w)
        detail[b.name] = g
        out += g
    return out, detail


def qp_computational_element(
    netlist, cutoffs: Cutoffs = REFERENCE_CUTOFFS, bias: Bias | None = None, cross_parity: bool = False
) -> float:
    """sqrt(sum_b |<0|sin(phi_b/2)|1>|^2) over junctions.

    By default both states are the qubit's computational states, so a
    junction that changes the island parity contributes exactly zero.
    ``cross_parity=True`` instead takes the final state from the other
    parity sector for such junctions.
    """
    tot = 0.0
    for b in netlist.branches:
        if b.EJ is None:
            continue
        pp = qp_elements(netlist, b, cutoffs, n_keep=4, bias=bias)
        if pp.changes_parity and not cross_parity:
            continue
        tot += abs(pp.elements[0, 1]) ** 2
    return float(np.sqrt(tot))


# -- 1/f dephasing -------------------------------------------------------------


@dataclass
class DephasingRate:
    gamma: float
    slope: float  # d w01 / d lambda, rad/s per unit of lambda
    first_order_only: bool


def gamma_phi_oneoverf(slope_rad_s: float, A: float, params: NoiseParameters) -> DephasingRate:
    """sqrt(2) A |dw01/dlambda| sqrt(|ln(w_ir t)|)."""
    log = np.sqrt(abs(np.log(params.omega_ir * params.t_meas)))
    g = np.sqrt(2) * A * abs(slope_rad_s) * log
    return DephasingRate(float(g), float(slope_rad_s), True)


def flux_slope(system, sol) -> float:
    """dw01/dPhi_ext in rad/s per Phi_0, from the analytic bias derivative."""
    return flux_derivative(system, sol) * units.TWO_PI * _angular(1.0).item()


def charge_slope(netlist, cutoffs, mode: str = "local", system=None) -> float:
    """dw01/dq in rad/s per electron charge."""
    if mode == "local":
        d = finite_difference(netlist, "ng_ext", cutoffs=cutoffs, system=system)
    else:
        from .spectrum import charge_dispersion

        # cosine band: max slope = pi * peak-to-peak per Cooper pair
        d = np.pi * charge_dispersion(netlist, cutoffs)
    return float(d) * _angular(1.0).item() / 2


# -- composition -------------------------------------------------------------


@dataclass
class CoherenceReport:
    rates: dict[str, float]
    T1: float
    Tphi: float
    T2: float
    transitions: list[tuple[int, int]]
    parameters: dict
    branch_rates: dict[str, dict] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def time_us(self, channel: str) -> float:
        r = self.rates.get(channel, 0.0)
        return np.inf if r <= 0 else 1e6 / r

    def limiting_channel(self) -> str:
        return max(self.rates, key=self.rates.get)


def compose(rates: dict[str, float], transitions=(), parameters=None, notes=None, branch_rates=None) -> CoherenceReport:
    """T1 = 1/sum(G1), Tphi = 1/sum(Gphi), T2 = (1/2T1 + 1/Tphi)^-1, all in us."""
    notes = list(notes or [])
    full = {}
    for kind in ChannelKind:
        if kind.value not in rates:
            notes.append(f"{kind.value}: not computed, treated as 0")
        v = float(rates.get(kind.value, 0.0))
        if v < 0:
            raise ValueError(f"negative rate for {kind.value}")
        full[kind.value] = v
    g1 = sum(v for k, v in full.items() if ChannelKind(k).depolarizing)
    gphi = sum(v for k, v in full.items() if not ChannelKind(k).depolarizing)
    T1 = np.inf if g1 == 0 else 1e6 / g1
    Tphi = np.inf if gphi == 0 else 1e6 / gphi
    inv = (0 if np.isinf(T1) else 1 / (2 * T1)) + (0 if np.isinf(Tphi) else 1 / Tphi)
    T2 = np.inf if inv == 0 else 1 / inv
    return CoherenceReport(full, T1, Tphi, T2, list(transitions), dict(parameters or {}), dict(branch_rates or {}), notes)


def coherence_report(
    netlist: CircuitNetlist,
    params: NoiseParameters = NoiseParameters(),
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    n_keep: int = 6,
    bias: Bias | None = None,
    channels: Sequence[ChannelKind] = tuple(ChannelKind),
) -> CoherenceReport:
    bias = netlist.bias if bias is None else bias
    net = netlist.with_bias(bias.ng_ext, bias.phi_ext)
    system = quantize_with(net, cutoffs, bias)
    sol = eigensolve(system.H, n_keep)
    rates, per_branch, notes = {}, {}, []
    if ChannelKind.DIELECTRIC in channels:
        rates["dielectric"], per_branch["dielectric"] = gamma_dielectric(net, system, sol, params, n_keep)
    if ChannelKind.INDUCTIVE in channels:
        rates["inductive"], per_branch["inductive"] = gamma_inductive(net, system, sol, params, n_keep)
    if ChannelKind.QUASIPARTICLE in channels:
        rates["quasiparticle"], per_branch["quasiparticle"] = gamma_quasiparticle(
            net, system, sol, params, n_keep, cutoffs, bias
        )
    if ChannelKind.FLUX_1F in channels:
        d = gamma_phi_oneoverf(flux_slope(system, sol), params.A_flux, params)
        rates["flux_1f"] = d.gamma
        notes.append("flux_1f: first-order 1/f estimate" + (" (zero at sweet spot)" if d.gamma < 1e-9 else ""))
    if ChannelKind.CHARGE_1F in channels:
        s = charge_slope(net, cutoffs, params.charge_slope, system)
        d = gamma_phi_oneoverf(s, params.A_charge, params)
        rates["charge_1f"] = d.gamma
        notes.append(f"charge_1f: first-order 1/f estimate, {params.charge_slope} slope")
    return compose(rates, transition_pairs(n_keep, params.transitions), params.describe(), notes, per_branch)


def coherence_sweep(
    netlist: CircuitNetlist,
    grid: Sequence[float],
    params: NoiseParameters = NoiseParameters(),
    cutoffs: Cutoffs = REFERENCE_CUTOFFS,
    n_keep: int = 6,
) -> list[CoherenceReport]:
    """One report per external-flux grid point (rad)."""
    return [
        coherence_report(netlist, params, cutoffs, n_keep, Bias(netlist.bias.ng_ext, float(x))) for x in grid
    ]
