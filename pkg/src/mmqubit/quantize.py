"""Per-mode operator bases, Hamiltonian assembly and low-lying eigenpairs.

Charge-like modes live in the Cooper-pair charge basis, flux-like modes in
the harmonic-oscillator basis built from their own diagonal energies. All
modes share the phase/number convention ``[phi, n] = i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .circuit import CircuitNetlist, HamiltonianSpec, ModeKind, hamiltonian_spec, Bias

DEFAULT_CUTOFF_CHARGE = 6
DEFAULT_CUTOFF_FLUX = 24
DEFAULT_MAX_DIM = 250_000
DEGENERACY_TOL = 1e-6  # GHz, commutator trick



@dataclass(frozen=True)
class Cutoffs:
    """Basis truncation: charge states -charge..charge, ``flux`` oscillator levels."""

    charge: int = DEFAULT_CUTOFF_CHARGE
    flux: int = DEFAULT_CUTOFF_FLUX
    flux_scale: float = 1.0


# frequencies converged to ~1e-9 relative on the reference device
REFERENCE_CUTOFFS = Cutoffs(6, 24)
# ~1e-5 on frequencies, <0.1% on dispersions; for Monte Carlo and search
FAST_CUTOFFS = Cutoffs(4, 12)

Factor = tuple[int, str]
Term = tuple[complex, tuple[Factor, ...]]


class BasisError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


# -- single-mode operators -------------------------------------------------


def charge_ops(cutoff: int) -> dict[str, np.ndarray]:
    """n, cos(phi), sin(phi) on charge states -N_c..N_c.

    ``exp(i phi)`` raises the charge by one Cooper pair.
    """
    if cutoff < 1:
        raise BasisError("charge cutoff must be >= 1")
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    up = np.eye(2 * cutoff + 1, k=-1)  # |n+1><n|
    return {
        "n": np.diag(n).astype(complex),
        "cos": (0.5 * (up + up.T)).astype(complex),
        "sin": ((up - up.T) / 2j),
    }


def single_electron_ops(cutoff: int) -> dict[str, np.ndarray]:
    """Operators on electron-number states -N_Ec..N_Ec.

    ``n`` counts electrons. Full-phase trig functions hop by two electrons
    (one Cooper pair), half-phase ones by a single electron.
    """
    if cutoff < 1:
        raise BasisError("single-electron cutoff must be >= 1")
    d = 2 * cutoff + 1
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    up1 = np.eye(d, k=-1)
    up2 = np.eye(d, k=-2)
    return {
        "n": np.diag(n).astype(complex),
        "cos": (0.5 * (up2 + up2.T)).astype(complex),
        "sin": (up2 - up2.T) / 2j,
        "cos_half": (0.5 * (up1 + up1.T)).astype(complex),
        "sin_half": (up1 - up1.T) / 2j,
    }


def oscillator_ops(
    E_C: float, E_L: float, cutoff: int, pad: int = 30, scale: float = 1.0, center: float = 0.0
) -> dict[str, np.ndarray]:
    """Oscillator-basis n, phi and their functions for a flux-like mode.

    Squares and trig functions are evaluated on a basis padded by ``pad``
    levels and truncated afterwards, which removes most of the truncation
    error in the top rows. ``scale`` stretches the phase zero-point width
    (1 is the bare-mode oscillator); values slightly above 1 converge faster
    for junction-dominated modes whose wavefunctions are wider. ``center``
    displaces the oscillator: the returned ``phi`` is the node phase
    ``center + x (b + b^dag)/sqrt 2``.
    """
    if not E_L > 0:
        raise BasisError(f"flux-like mode needs E_L > 0, got {E_L}")
    if not E_C > 0:
        raise BasisError(f"flux-like mode needs E_C > 0, got {E_C}")
    if cutoff < 2:
        raise BasisError("oscillator cutoff must be >= 2")
    m = cutoff + pad
    b = np.diag(np.sqrt(np.arange(1, m)), 1)
    x = scale * (8 * E_C / E_L) ** 0.25
    phi = x / np.sqrt(2) * (b + b.T) + center * np.eye(m)
    n = -1j / np.sqrt(2) / x * (b - b.T)
    sl = slice(0, cutoff)
    out = {
        "n": n[sl, sl].astype(complex),
        "phi": phi[sl, sl].astype(complex),
        "n2": (n @ n)[sl, sl],
        "phi2": (phi @ phi)[sl, sl].astype(complex),
        "cos": sla.cosm(phi)[sl, sl].astype(complex),
        "sin": sla.sinm(phi)[sl, sl].astype(complex),
        "cos_half": sla.cosm(phi / 2)[sl, sl].astype(complex),
        "sin_half": sla.sinm(phi / 2)[sl, sl].astype(complex),
    }
    return out


@dataclass(frozen=True)
class ModeBasis:
    """Truncated basis of one mode.

    ``representation`` is ``"charge"``, ``"single_electron"`` or
    ``"oscillator"``. The single-electron variant reports ``n`` in Cooper
    pairs (electron count / 2) so it drops into the same Hamiltonian.
    """

    kind: ModeKind
    cutoff: int
    representation: str
    E_C: float | None = None
    E_L: float | None = None
    offset: float = 0.0  # extra static charge, Cooper pairs (charge bases)
    scale: float = 1.0  # oscillator width multiplier
    center: float = 0.0  # oscillator displacement (rad)

    def __post_init__(self):
        if self.cutoff < 3 and self.representation != "charge":
            raise BasisError("cutoffs must be >= 3")
        if self.representation == "oscillator" and not (self.E_L or 0) > 0:
            raise BasisError("flux-like mode with E_L <= 0")

    @property
    def dim(self) -> int:
        if self.representation == "oscillator":
            return self.cutoff
        return 2 * self.cutoff + 1

    @cached_property
    def ops(self) -> dict[str, np.ndarray]:
        if self.representation == "oscillator":
            return oscillator_ops(self.E_C, self.E_L, self.cutoff, scale=self.scale, center=self.center)
        if self.representation == "charge":
            o = charge_ops(self.cutoff)
        elif self.representation == "single_electron":
            o = single_electron_ops(self.cutoff)
            o["n"] = o["n"] / 2
        else:
            raise BasisError(f"unknown representation {self.representation!r}")
        if self.offset:
            o["n"] = o["n"] + self.offset * np.eye(self.dim)
        o["n2"] = o["n"] @ o["n"]
        return o

    def op(self, name: str) -> np.ndarray:
        if name == "I":
            return np.eye(self.dim, dtype=complex)
        try:
            return self.ops[name]
        except KeyError:
            raise BasisError(f"operator {name!r} not available in {self.representation} basis") from None


def inductive_minimum(spec: HamiltonianSpec) -> np.ndarray:
    """Node phases minimizing 1/2 phi.E_L.phi + flux_linear.phi over flux-like modes."""
    f = spec.flux_modes()
    out = np.zeros(spec.n_modes)
    if f:
        out[f] = -np.linalg.solve(spec.E_L[np.ix_(f, f)], spec.flux_linear[f])
    return out


def default_bases(
    spec: HamiltonianSpec,
    cutoff_charge: int = DEFAULT_CUTOFF_CHARGE,
    cutoff_flux: int = DEFAULT_CUTOFF_FLUX,
    single_electron: bool = False,
    flux_scale: float = 1.0,
    centered: bool = True,
) -> list[ModeBasis]:
    """One basis per mode.

    With ``centered`` the flux-like oscillators sit at the minimum of the
    inductive energy (including the loop-flux term) rather than at zero
    phase. This is only a change of representation, but it keeps
    the truncated basis symmetric about the potential's symmetry point.
    """
    centers = inductive_minimum(spec) if centered else np.zeros(spec.n_modes)
    bases = []
    for m, kind in enumerate(spec.kinds):
        if kind is ModeKind.FLUX:
            bases.append(
                ModeBasis(
                    kind, cutoff_flux, "oscillator", spec.E_C[m, m], spec.E_L[m, m],
                    scale=flux_scale, center=float(centers[m]),
                )
            )
        elif kind is ModeKind.CHARGE:
            if single_electron:
                bases.append(ModeBasis(kind, 2 * cutoff_charge + 1, "single_electron", spec.E_C[m, m]))
            else:
                bases.append(ModeBasis(kind, cutoff_charge, "charge", spec.E_C[m, m]))
        else:
            raise BasisError(f"mode {m} is {kind.value}; cannot quantize")
    return bases


# -- term expansion --------------------------------------------------------


def trig_terms(coeffs: Sequence[int], func: str = "cos", half: bool = False) -> list[Term]:
    """Expand cos/sin of an integer phase combination into mode products.

    ``half`` selects the half-phase functions, i.e. cos(c.phi / 2).
    """
    suffix = "_half" if half else ""
    idx = [(m, int(c)) for m, c in enumerate(coeffs) if c]
    for _, c in idx:
        if abs(c) != 1:
            raise ValueError("phase combinations must have +-1 coefficients")

    def rec(items, f):
        (m, s), rest = items[0], items[1:]
        cos_f, sin_f = (m, "cos" + suffix), (m, "sin" + suffix)
        if not rest:
            return [(1.0, (cos_f,))] if f == "cos" else [(float(s), (sin_f,))]
        cos_r, sin_r = rec(rest, "cos"), rec(rest, "sin")
        if f == "cos":  # cos(a+b) = cos a cos b - sin a sin b
            return [(c, (cos_f,) + fs) for c, fs in cos_r] + [(-s * c, (sin_f,) + fs) for c, fs in sin_r]
        # sin(a+b) = sin a cos b + cos a sin b
        return [(s * c, (sin_f,) + fs) for c, fs in cos_r] + [(c, (cos_f,) + fs) for c, fs in sin_r]

    if not idx:
        return [(1.0, ())] if func == "cos" else []
    return rec(idx, func)


def _linear_terms(spec: HamiltonianSpec) -> list[Term]:
    terms: list[Term] = []
    for m in range(spec.n_modes):
        if spec.charge_linear[m]:
            terms.append((spec.charge_linear[m], ((m, "n"),)))
        if spec.flux_linear[m]:
            terms.append((spec.flux_linear[m], ((m, "phi"),)))
    return terms


def hamiltonian_terms(spec: HamiltonianSpec, linear: bool = True) -> list[Term]:
    terms: list[Term] = []
    n = spec.n_modes
    for i in range(n):
        for j in range(n):
            c = spec.charge_quadratic[i, j]
            if c == 0:
                continue
            terms.append((c, ((i, "n2"),)) if i == j else (c, ((i, "n"), (j, "n"))))
    for i in range(n):
        for j in range(n):
            c = spec.flux_quadratic[i, j]
            if c == 0:
                continue
            terms.append((c, ((i, "phi2"),)) if i == j else (c, ((i, "phi"), (j, "phi"))))
    for jt in spec.junctions:
        terms += [(-jt.EJ * c, fs) for c, fs in trig_terms(jt.coeffs, "cos")]
    if linear:
        terms += _linear_terms(spec)
    return terms


# -- assembly --------------------------------------------------------------


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return sp.csr_matrix(out)


def _chop(a: np.ndarray, tol: float = 1e-14) -> sp.csr_matrix:
    a = np.where(np.abs(a) > tol, a, 0)
    return sp.csr_matrix(a)


@dataclass
class QuantizedSystem:
    spec: HamiltonianSpec
    bases: list[ModeBasis]
    H: sp.csr_matrix
    node_ops: dict[str, sp.csr_matrix] = field(default_factory=dict)
    H_static: sp.csr_matrix | None = None  # H without the linear bias terms

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.bases)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def lift(self, factors: Sequence[Factor]) -> sp.csr_matrix:
        mats = [sp.identity(b.dim, dtype=complex, format="csr") for b in self.bases]
        for m, name in factors:
            mats[m] = mats[m] @ _chop(self.bases[m].op(name))
        return _kron_all(mats)

    def operator(self, terms: Sequence[Term]) -> sp.csr_matrix:
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for c, fs in terms:
            out = out + c * self.lift(fs)
        return out

    def with_bias(self, bias: Bias) -> QuantizedSystem:
        """Re-bias without reassembling the bias-independent part."""
        spec = self.spec.with_bias(bias)
        H = self.H_static + self.operator(_linear_terms(spec))
        H = (0.5 * (H + H.getH())).tocsr()
        return QuantizedSystem(spec, self.bases, H, self.node_ops, self.H_static)

    def n_op(self, m: int) -> sp.csr_matrix:
        return self.node_ops[f"n{m}"]

    def phi_op(self, m: int) -> sp.csr_matrix:
        return self.node_ops[f"phi{m}"]


def assemble(spec: HamiltonianSpec, bases: Sequence[ModeBasis], max_dim: int = DEFAULT_MAX_DIM) -> QuantizedSystem:
    """Full Hamiltonian and lifted node operators as sparse matrices."""
    if len(bases) != spec.n_modes:
        raise ValueError("need one basis per mode")
    dim = int(np.prod([b.dim for b in bases]))
    if dim > max_dim:
        raise DimensionError(f"Hilbert-space dimension {dim} exceeds limit {max_dim}")
    sysm = QuantizedSystem(spec, list(bases), sp.csr_matrix((dim, dim), dtype=complex))
    H0 = sysm.operator(hamiltonian_terms(spec, linear=False))
    H0 = 0.5 * (H0 + H0.getH())
    H0.eliminate_zeros()
    sysm.H_static = H0.tocsr()
    H = H0 + sysm.operator(_linear_terms(spec))
    sysm.H = (0.5 * (H + H.getH())).tocsr()
    for m, b in enumerate(bases):
        sysm.node_ops[f"n{m}"] = sysm.lift([(m, "n")])
        if b.representation == "oscillator":
            sysm.node_ops[f"phi{m}"] = sysm.lift([(m, "phi")])
    return sysm


# -- eigensolver -----------------------------------------------------------


@dataclass
class EigenSolution:
    """k lowest eigenpairs. ``energies`` in GHz, ascending; ``vectors`` columns."""

    energies: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def k(self) -> int:
        return len(self.energies)

    @property
    def frequencies(self) -> np.ndarray:
        return self.energies - self.energies[0]

    def matrix_elements(self, op) -> np.ndarray:
        """<i|op|j> over the kept states."""
        return self.vectors.conj().T @ (op @ self.vectors)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real positive."""
    v = np.array(vectors, dtype=complex)
    idx = np.argmax(np.abs(v) - 1e-12 * np.arange(v.shape[0])[:, None], axis=0)
    ph = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(ph) / ph)[None, :]


def _op_norm(H) -> float:
    if sp.issparse(H):
        return float(abs(H).sum(axis=0).max())
    return float(np.abs(H).sum(axis=0).max())


def eigensolve(H, k: int = 6, tol: float = 1e-10, maxiter: int | None = None, dense_below: int = 400) -> EigenSolution:
    """Lowest-k eigenpairs of a Hermitian matrix.

    Small problems use dense LAPACK; larger ones ARPACK Lanczos from a
    fixed start vector so repeated runs agree.
    """
    dim = H.shape[0]
    if k < 1 or k >= dim:
        raise ValueError(f"need 1 <= k < dim, got k={k}, dim={dim}")
    if dim <= dense_below:
        A = H.toarray() if sp.issparse(H) else np.asarray(H)
        w, v = sla.eigh(A, subset_by_index=(0, k - 1))
    else:
        v0 = np.ones(dim, dtype=H.dtype) / np.sqrt(dim)
        try:
            w, v = eigsh(H, k=k, which="SA", tol=tol * 1e-2, v0=v0, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise SolverError(
                f"eigensolver did not converge ({len(exc.eigenvalues)} of {k} pairs)",
                residuals=None,
            ) from None
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    v = fix_phases(v)
    res = np.linalg.norm(H @ v - v * w[None, :], axis=0) / max(_op_norm(H), 1e-300)
    if np.any(res > max(tol, 1e-12) * 100):
        raise SolverError(f"eigenpair residuals too large: {res.max():.3g}", residuals=res)
    return EigenSolution(np.asarray(w, dtype=float), v, res)


def flux_op_via_commutator(
    solution: EigenSolution,
    n_ops: Sequence,
    E_C: np.ndarray,
    m: int,
    tol: float = DEGENERACY_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """<i|phi_m|j> from charge matrix elements.

    Uses (E_j - E_i)<i|phi_m|j> = 8i sum_k [E_C]_km <i|n_k|j>. Returns the
    matrix and a boolean mask of undefined entries (the diagonal and
    near-degenerate pairs), which are set to NaN.
    """
    rhs = sum(8j * E_C[kk, m] * solution.matrix_elements(n_ops[kk]) for kk in range(len(n_ops)))
    E = solution.energies
    w = E[None, :] - E[:, None]
    bad = np.abs(w) < tol
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(bad, np.nan, rhs / np.where(bad, 1.0, w))
    return out, bad


# -- hierarchical solver ---------------------------------------------------


def eigensolve_hierarchical(system: QuantizedSystem, k: int = 6, keep: int = 40) -> EigenSolution:
    """Two-stage diagonalization for speed.

    The flux-like modes are diagonalized together first (with every term
    that acts only on them), ``keep`` of their states are retained, and the
    charge-like modes are coupled in that reduced basis. Vectors are
    returned in the full product basis so matrix elements work unchanged.
    """
    spec, bases = system.spec, system.bases
    flux = [m for m, b in enumerate(bases) if b.representation == "oscillator"]
    rest = [m for m in range(len(bases)) if m not in flux]
    if not flux or not rest:
        return eigensolve(system.H, k)
    dims = [b.dim for b in bases]
    dflux = int(np.prod([dims[m] for m in flux]))
    drest = int(np.prod([dims[m] for m in rest]))
    keep = min(keep, dflux)

    def group_op(factors, group):
        mats = []
        for m in group:
            a = bases[m].op("I")
            for mm, name in factors:
                if mm == m:
                    a = a @ bases[m].op(name)
            mats.append(a)
        out = mats[0]
        for a in mats[1:]:
            out = np.kron(out, a)
        return out

    terms = hamiltonian_terms(spec)
    Hf = np.zeros((dflux, dflux), dtype=complex)
    mixed = []
    for c, fs in terms:
        if all(m in flux for m, _ in fs):
            Hf += c * group_op(fs, flux)
        else:
            mixed.append((c, fs))
    Hf = 0.5 * (Hf + Hf.conj().T)
    ef, P = sla.eigh(Hf, subset_by_index=(0, keep - 1))

    Hr = np.kron(np.diag(ef), np.eye(drest))
    cache = {}
    for c, fs in mixed:
        fkey = tuple((m, n) for m, n in fs if m in flux)
        if fkey not in cache:
            cache[fkey] = P.conj().T @ group_op(fkey, flux) @ P if fkey else np.eye(keep)
        Hr = Hr + c * np.kron(cache[fkey], group_op(fs, rest))
    Hr = 0.5 * (Hr + Hr.conj().T)
    w, v = sla.eigh(Hr, subset_by_index=(0, k - 1))

    # back to the full product basis, axes in mode order
    coeff = v.reshape(keep, drest, k)
    full = np.tensordot(P, coeff, axes=([1], [0]))  # (dflux, drest, k)
    full = full.reshape([dims[m] for m in flux] + [dims[m] for m in rest] + [k])
    order = flux + rest
    perm = [order.index(m) for m in range(len(bases))] + [len(bases)]
    full = full.transpose(perm).reshape(system.dim, k)
    full = fix_phases(full)
    res = np.linalg.norm(system.H @ full - full * w[None, :], axis=0) / max(_op_norm(system.H), 1e-300)
    return EigenSolution(np.asarray(w, dtype=float), full, res)


# -- convenience -----------------------------------------------------------


def quantize(
    netlist: CircuitNetlist,
    cutoff_charge: int = DEFAULT_CUTOFF_CHARGE,
    cutoff_flux: int = DEFAULT_CUTOFF_FLUX,
    bias: Bias | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
    single_electron: bool = False,
    flux_scale: float = 1.0,
    centered: bool = True,
) -> QuantizedSystem:
    spec = hamiltonian_spec(netlist, bias=bias)
    bases = default_bases(spec, cutoff_charge, cutoff_flux, single_electron, flux_scale, centered)
    return assemble(spec, bases, max_dim=max_dim)


def solve(
    netlist: CircuitNetlist,
    k: int = 6,
    cutoff_charge: int = DEFAULT_CUTOFF_CHARGE,
    cutoff_flux: int = DEFAULT_CUTOFF_FLUX,
    bias: Bias | None = None,
    tol: float = 1e-10,
    method: str = "sparse",
    keep: int = 40,
    flux_scale: float = 1.0,
) -> tuple[QuantizedSystem, EigenSolution]:
    """Quantize and diagonalize in one call.

    ``method`` is ``"sparse"`` (full Lanczos) or ``"hierarchical"``.
    """
    system = quantize(netlist, cutoff_charge, cutoff_flux, bias, flux_scale=flux_scale)
    if method == "sparse":
        sol = eigensolve(system.H, k, tol)
    elif method == "hierarchical":
        sol = eigensolve_hierarchical(system, k, keep)
    else:
        raise ValueError(f"unknown method {method!r}")
    return system, sol



def quantize_with(netlist: CircuitNetlist, cutoffs: Cutoffs, bias: Bias | None = None, **kw) -> QuantizedSystem:
    return quantize(netlist, cutoffs.charge, cutoffs.flux, bias, flux_scale=cutoffs.flux_scale, **kw)


# -- debugging export ------------------------------------------------------


def export_triplets(op, path) -> None:
    """Write a sparse operator as ``row col re im`` lines (shape in the header)."""
    m = sp.coo_matrix(op)
    data = np.column_stack([m.row, m.col, m.data.real, m.data.imag])
    header = f"shape {m.shape[0]} {m.shape[1]}\nrow col re im"
    np.savetxt(path, data, fmt=["%d", "%d", "%.17g", "%.17g"], header=header)


def load_triplets(path) -> sp.csr_matrix:
    with open(path) as fh:
        shape = tuple(int(x) for x in fh.readline().split()[2:4])
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix(shape, dtype=complex)
    return sp.csr_matrix(
        (data[:, 2] + 1j * data[:, 3], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=shape
    )
