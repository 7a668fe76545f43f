"""Lumped-element circuit netlists and their energy matrices.

A netlist is a set of nodes (one of them the ground reference) joined by
branches. Every branch carries a capacitor and optionally one linear
inductor and/or one Josephson junction. Every non-reference node is one
mode of the quantized circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Hashable, Sequence

import numpy as np

from . import units

Node = Hashable


class NetlistError(ValueError):
    """Invalid or unusable circuit description."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ClosureError(NetlistError):
    """External-flux closure branch does not close an inductive loop."""


class ModeKind(Enum):
    CHARGE = "charge"
    FLUX = "flux"
    FROZEN = "frozen"
    FREE = "free"

    @property
    def valid(self) -> bool:
        return self in (ModeKind.CHARGE, ModeKind.FLUX)


@dataclass(frozen=True)
class Branch:
    """One branch. ``C`` in fF, ``L`` in nH, ``EJ`` in GHz."""

    name: str
    node_from: Node
    node_to: Node
    C: float
    L: float | None = None
    EJ: float | None = None

    def __post_init__(self):
        if self.node_from == self.node_to:
            raise NetlistError(f"branch {self.name!r} connects node {self.node_from!r} to itself")
        if not self.C > 0:
            raise NetlistError(f"branch {self.name!r}: capacitance must be positive, got {self.C}")
        if self.L is not None and not self.L > 0:
            raise NetlistError(f"branch {self.name!r}: inductance must be positive, got {self.L}")
        if self.EJ is not None and not self.EJ > 0:
            raise NetlistError(f"branch {self.name!r}: EJ must be positive, got {self.EJ}")

    @property
    def endpoints(self) -> tuple[Node, Node]:
        return (self.node_from, self.node_to)


@dataclass(frozen=True)
class Bias:
    """Static external biases: offset charge (Cooper pairs) and loop flux (rad)."""

    ng_ext: float = 0.0
    phi_ext: float = 0.0


@dataclass(frozen=True)
class CircuitNetlist:
    nodes: tuple[Node, ...]
    branches: tuple[Branch, ...]
    reference: Node = 0
    closures: tuple[str, ...] = ()
    bias: Bias = field(default_factory=Bias)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "closures", tuple(self.closures))
        if len(set(self.nodes)) != len(self.nodes):
            raise NetlistError("invalid netlist: duplicate node identifiers")
        if self.reference not in self.nodes:
            raise NetlistError(f"invalid netlist: reference node {self.reference!r} not declared")
        if len(self.nodes) < 2:
            raise NetlistError("invalid netlist: need at least one node besides the reference")
        names = [b.name for b in self.branches]
        if len(set(names)) != len(names):
            raise NetlistError("invalid netlist: duplicate branch names")
        for b in self.branches:
            for n in b.endpoints:
                if n not in self.nodes:
                    raise NetlistError(f"invalid netlist: branch {b.name!r} uses undeclared node {n!r}")
        for c in self.closures:
            if c not in names:
                raise NetlistError(f"invalid netlist: closure branch {c!r} does not exist")
        if not _connected(self.nodes, [b.endpoints for b in self.branches]):
            raise NetlistError("invalid netlist: circuit graph is disconnected")

    @property
    def modes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n != self.reference)

    def mode_index(self, node: Node) -> int:
        return self.modes.index(node)

    def branch(self, name: str) -> Branch:
        for b in self.branches:
            if b.name == name:
                return b
        raise KeyError(name)

    def with_bias(self, ng_ext: float | None = None, phi_ext: float | None = None) -> CircuitNetlist:
        bias = Bias(
            self.bias.ng_ext if ng_ext is None else float(ng_ext),
            self.bias.phi_ext if phi_ext is None else float(phi_ext),
        )
        return replace(self, bias=bias)

    def with_branches(self, branches: Sequence[Branch]) -> CircuitNetlist:
        return replace(self, branches=tuple(branches))

    def branch_phase_coeffs(self, b: Branch) -> np.ndarray:
        """Integer vector c with branch phase = c . node phases (phi_to - phi_from)."""
        c = np.zeros(len(self.modes), dtype=int)
        if b.node_to != self.reference:
            c[self.mode_index(b.node_to)] += 1
        if b.node_from != self.reference:
            c[self.mode_index(b.node_from)] -= 1
        return c


def _connected(nodes, edges) -> bool:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(n) for n in nodes}) == 1


@dataclass(frozen=True)
class EnergyMatrices:
    """Capacitance/inductance matrices over the modes and their energy forms.

    ``C_matrix`` in fF, ``L_inv`` in 1/nH, ``E_C`` and ``E_L`` in GHz.
    ``junction_count[m]`` counts junction branches touching mode ``m``.
    """

    modes: tuple[Node, ...]
    C_matrix: np.ndarray
    L_inv: np.ndarray
    E_C: np.ndarray
    E_L: np.ndarray
    junction_count: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.modes)


def _laplacian(netlist: CircuitNetlist, weights: dict[str, float]) -> np.ndarray:
    n = len(netlist.modes)
    m = np.zeros((n, n))
    for b in netlist.branches:
        w = weights.get(b.name)
        if not w:
            continue
        c = netlist.branch_phase_coeffs(b)
        m += w * np.outer(c, c)
    return m


def build_matrices(netlist: CircuitNetlist) -> EnergyMatrices:
    C = _laplacian(netlist, {b.name: b.C for b in netlist.branches})
    L_inv = _laplacian(netlist, {b.name: 1.0 / b.L for b in netlist.branches if b.L is not None})
    try:
        cond = np.linalg.cond(C)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e12:
        raise NetlistError("degenerate capacitive network")
    C_inv = np.linalg.inv(C)
    C_inv = 0.5 * (C_inv + C_inv.T)
    jcount = np.zeros(len(netlist.modes), dtype=int)
    for b in netlist.branches:
        if b.EJ is not None:
            jcount += np.abs(netlist.branch_phase_coeffs(b))
    return EnergyMatrices(
        modes=netlist.modes,
        C_matrix=C,
        L_inv=L_inv,
        E_C=units.EC_PER_INV_FF * C_inv,
        E_L=units.EL_PER_INV_NH * L_inv,
        junction_count=jcount,
    )


def classify_modes(matrices: EnergyMatrices, tol: float = 1e-12) -> list[ModeKind]:
    """Label each mode charge-like or flux-like, or flag it frozen/free.

    Flux-like modes have an inductive diagonal entry. A charge-like mode
    without any junction has no potential and is free. A flux-like group
    whose inductance matrix is singular leaves a direction unconfined by
    linear inductors; the modes spanning it are marked free as well.
    """
    ec = np.diag(matrices.E_C)
    li = matrices.L_inv
    scale = max(np.abs(li).max(), 1.0)
    kinds = []
    for m in range(matrices.n_modes):
        if not ec[m] > 0:
            kinds.append(ModeKind.FROZEN)
        elif li[m, m] > tol * scale:
            kinds.append(ModeKind.FLUX)
        elif matrices.junction_count[m] > 0:
            kinds.append(ModeKind.CHARGE)
        else:
            kinds.append(ModeKind.FREE)
    flux = [m for m, k in enumerate(kinds) if k is ModeKind.FLUX]
    if flux:
        w, v = np.linalg.eigh(li[np.ix_(flux, flux)])
        null = v[:, w < 1e-9 * max(w.max(), 1e-300)]
        if null.size:
            support = np.abs(null).max(axis=1) > 1e-9
            for idx, m in enumerate(flux):
                if support[idx]:
                    kinds[m] = ModeKind.FREE
    return kinds


def check_modes(kinds: Sequence[ModeKind]) -> None:
    bad = [(m, k.value) for m, k in enumerate(kinds) if not k.valid]
    if bad:
        raise NetlistError(f"invalid netlist: unquantizable modes {bad}")


# -- inductive loops and closure branches ---------------------------------


@dataclass(frozen=True)
class InductiveLoop:
    """An independent loop of inductive elements; ``closure`` is its chord."""

    closure: str
    closure_element: str  # "L" or "JJ"
    members: tuple[str, ...]

    @property
    def biasable(self) -> bool:
        return self.closure_element == "L"


def inductive_loops(netlist: CircuitNetlist) -> list[InductiveLoop]:
    """Independent inductive loops with one closure branch each.

    The closure of a loop is a linear inductor. Pinned closures from the
    netlist are honored; otherwise the largest inductance in the loop closes
    it (spanning tree built from junctions first, then inductors in
    ascending order). A loop made only of junctions closes on a junction and
    carries no flux bias.
    """
    pinned = list(netlist.closures)
    for name in pinned:
        if netlist.branch(name).L is None:
            raise ClosureError(f"closure branch {name!r} has no linear inductor")
    elements = [(b, "JJ") for b in netlist.branches if b.EJ is not None]
    inductors = sorted(
        (b for b in netlist.branches if b.L is not None and b.name not in pinned),
        key=lambda b: (b.L, b.name),
    )
    elements += [(b, "L") for b in inductors]
    elements += [(netlist.branch(name), "L") for name in pinned]

    parent = {n: n for n in netlist.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: dict[Node, list[tuple[Node, str]]] = {n: [] for n in netlist.nodes}
    chords = []
    for b, kind in elements:
        ra, rb = find(b.node_from), find(b.node_to)
        if ra == rb:
            chords.append((b, kind))
        else:
            if b.name in pinned:
                raise ClosureError(f"closure branch {b.name!r} is not on an inductive loop")
            parent[ra] = rb
            tree[b.node_from].append((b.node_to, f"{b.name}:{kind}"))
            tree[b.node_to].append((b.node_from, f"{b.name}:{kind}"))

    loops = []
    for b, kind in chords:
        path = _tree_path(tree, b.node_from, b.node_to)
        members = tuple(dict.fromkeys([b.name] + [p.split(":")[0] for p in path]))
        loops.append(InductiveLoop(b.name, kind, members))
    return loops


def _tree_path(tree, start, goal) -> list[str]:
    prev = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt, label in tree[node]:
            if nxt not in prev:
                prev[nxt] = (node, label)
                queue.append(nxt)
    path = []
    node = goal
    while prev[node] is not None:
        node, label = prev[node]
        path.append(label)
    return path


# -- Hamiltonian specification --------------------------------------------


@dataclass(frozen=True)
class JunctionTerm:
    """-EJ cos(coeffs . phi)."""

    branch: str
    EJ: float
    coeffs: tuple[int, ...]


@dataclass(frozen=True)
class ClosureTerm:
    """Linear flux term EL * phi_ext * (coeffs . phi) from one closure branch."""

    branch: str
    EL: float
    coeffs: tuple[int, ...]


@dataclass(frozen=True)
class HamiltonianSpec:
    """Coefficients of every term of the node-variable Hamiltonian.

    H = n^T charge_quadratic n + phi^T flux_quadratic phi
        - sum_j EJ_j cos(c_j . phi)
        + charge_linear . n + flux_linear . phi
    """

    modes: tuple[Node, ...]
    kinds: tuple[ModeKind, ...]
    E_C: np.ndarray
    E_L: np.ndarray
    charge_quadratic: np.ndarray
    flux_quadratic: np.ndarray
    junctions: tuple[JunctionTerm, ...]
    charge_linear: np.ndarray
    flux_linear: np.ndarray
    closure_terms: tuple[ClosureTerm, ...]
    bias: Bias

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def charge_modes(self) -> list[int]:
        return [m for m, k in enumerate(self.kinds) if k is ModeKind.CHARGE]

    def flux_modes(self) -> list[int]:
        return [m for m, k in enumerate(self.kinds) if k is ModeKind.FLUX]

    def with_bias(self, bias: Bias) -> HamiltonianSpec:
        """Same circuit, new static biases (only the linear terms change)."""
        charge_linear, flux_linear = _linear_terms(self.E_C, self.kinds, self.closure_terms, bias)
        return replace(self, charge_linear=charge_linear, flux_linear=flux_linear, bias=bias)


def _linear_terms(E_C, kinds, closure_terms, bias: Bias):
    g = offset_charge_vector(kinds, bias.ng_ext)
    charge_linear = 8.0 * E_C @ g
    flux_linear = np.zeros(len(kinds))
    for ct in closure_terms:
        flux_linear += ct.EL * bias.phi_ext * np.asarray(ct.coeffs, dtype=float)
    return charge_linear, flux_linear


def offset_charge_vector(kinds: Sequence[ModeKind], ng_ext) -> np.ndarray:
    """Per-mode offset charges; a scalar bias lands on every charge-like mode.

    Static offsets on flux-like modes are removable by a gauge choice, so
    only charge-like modes keep them.
    """
    g = np.zeros(len(kinds))
    if np.ndim(ng_ext) == 0:
        for m, k in enumerate(kinds):
            if k is ModeKind.CHARGE:
                g[m] = float(ng_ext)
    else:
        vals = np.asarray(ng_ext, dtype=float)
        for m, k in enumerate(kinds):
            if k is ModeKind.CHARGE:
                g[m] = vals[m]
    return g


def hamiltonian_spec(
    netlist: CircuitNetlist,
    matrices: EnergyMatrices | None = None,
    bias: Bias | None = None,
    kinds: Sequence[ModeKind] | None = None,
) -> HamiltonianSpec:
    if matrices is None:
        matrices = build_matrices(netlist)
    if kinds is None:
        kinds = classify_modes(matrices)
    check_modes(kinds)
    bias = netlist.bias if bias is None else bias

    junctions = tuple(
        JunctionTerm(b.name, float(b.EJ), tuple(int(x) for x in netlist.branch_phase_coeffs(b)))
        for b in netlist.branches
        if b.EJ is not None
    )
    closure_terms = []
    for loop in inductive_loops(netlist):
        if not loop.biasable:
            continue
        b = netlist.branch(loop.closure)
        closure_terms.append(
            ClosureTerm(b.name, units.inductive_energy(b.L), tuple(int(x) for x in netlist.branch_phase_coeffs(b)))
        )

    charge_linear, flux_linear = _linear_terms(matrices.E_C, kinds, closure_terms, bias)

    return HamiltonianSpec(
        modes=matrices.modes,
        kinds=tuple(kinds),
        E_C=matrices.E_C,
        E_L=matrices.E_L,
        charge_quadratic=4.0 * matrices.E_C,
        flux_quadratic=0.5 * matrices.E_L,
        junctions=junctions,
        charge_linear=charge_linear,
        flux_linear=flux_linear,
        closure_terms=tuple(closure_terms),
        bias=bias,
    )
