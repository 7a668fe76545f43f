"""Evolutionary circuit search and fabrication-resilience Monte Carlo.

Circuits live on a fixed scaffold of N nodes (node 0 is ground) with a
capacitor on every pair; each pair may also carry a linear inductor and/or
a junction. Costs are minimized.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .circuit import Bias, Branch, CircuitNetlist, NetlistError, hamiltonian_spec
from .quantize import FAST_CUTOFFS, Cutoffs, DimensionError, SolverError, eigensolve, quantize_with

TWO_PI = 2 * np.pi
FLUX_STEP = 0.02 * np.pi  # 10^-2 Phi_0


class EvolutionError(RuntimeError):
    pass


# -- genome ------------------------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    C: tuple[float, float] = (1.0, 100.0)  # fF
    L: tuple[float, float] = (5.0, 500.0)  # nH
    EJ: tuple[float, float] = (0.5, 30.0)  # GHz

    def __post_init__(self):
        for lo, hi in (self.C, self.L, self.EJ):
            if not 0 < lo < hi:
                raise ValueError("bounds must satisfy 0 < low < high")

    def of(self, kind: str) -> tuple[float, float]:
        return getattr(self, kind)


@dataclass(frozen=True)
class Genome:
    """Topology flags and component values for every scaffold pair.

    Values are kept for absent elements so toggling a flag back restores
    the previous value.
    """

    n_nodes: int
    has_L: tuple[bool, ...]
    has_JJ: tuple[bool, ...]
    C: tuple[float, ...]
    L: tuple[float, ...]
    EJ: tuple[float, ...]

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return scaffold_pairs(self.n_nodes)

    def key(self) -> tuple:
        return (self.n_nodes, self.has_L, self.has_JJ, self.C, self.L, self.EJ)

    def to_netlist(self, bias: Bias = Bias()) -> CircuitNetlist:
        branches = []
        for i, (a, b) in enumerate(self.pairs):
            branches.append(
                Branch(
                    f"b{i}", a, b, self.C[i],
                    self.L[i] if self.has_L[i] else None,
                    self.EJ[i] if self.has_JJ[i] else None,
                )
            )
        return CircuitNetlist(tuple(range(self.n_nodes)), tuple(branches), 0, (), bias)

    def parameters(self) -> list[tuple[str, int]]:
        """Active continuous parameters as (kind, pair index)."""
        out = [("C", i) for i in range(len(self.C))]
        out += [("L", i) for i, f in enumerate(self.has_L) if f]
        out += [("EJ", i) for i, f in enumerate(self.has_JJ) if f]
        return out

    def values(self, params=None) -> np.ndarray:
        params = self.parameters() if params is None else params
        return np.array([getattr(self, k)[i] for k, i in params])

    def with_values(self, params, values) -> Genome:
        d = {"C": list(self.C), "L": list(self.L), "EJ": list(self.EJ)}
        for (k, i), v in zip(params, values):
            d[k][i] = float(v)
        return replace(self, C=tuple(d["C"]), L=tuple(d["L"]), EJ=tuple(d["EJ"]))


def scaffold_pairs(n_nodes: int) -> list[tuple[int, int]]:
    return list(combinations(range(n_nodes), 2))


def is_valid(genome: Genome, bounds: Bounds | None = None, n_modes: int | None = None) -> bool:
    """Decodes to a netlist whose modes are all charge- or flux-like."""
    if bounds is not None:
        for kind in ("C", "L", "EJ"):
            lo, hi = bounds.of(kind)
            vals = np.asarray(getattr(genome, kind))
            if np.any(vals < lo * (1 - 1e-12)) or np.any(vals > hi * (1 + 1e-12)):
                return False
    try:
        spec = hamiltonian_spec(genome.to_netlist())
    except (NetlistError, np.linalg.LinAlgError):
        return False
    return n_modes is None or spec.n_modes == n_modes


def random_genome(n_nodes: int, bounds: Bounds, rng: np.random.Generator, p_L: float = 0.4, p_JJ: float = 0.4) -> Genome:
    m = len(scaffold_pairs(n_nodes))

    def logu(kind):
        lo, hi = bounds.of(kind)
        return tuple(float(x) for x in np.exp(rng.uniform(np.log(lo), np.log(hi), m)))

    return Genome(
        n_nodes,
        tuple(bool(x) for x in rng.random(m) < p_L),
        tuple(bool(x) for x in rng.random(m) < p_JJ),
        logu("C"), logu("L"), logu("EJ"),
    )


def crossover(a: Genome, b: Genome, rng: np.random.Generator, bounds: Bounds | None = None, retries: int = 20) -> Genome | None:
    """Mode-block inheritance.

    Each non-ground node picks a parent; a pair whose endpoints picked the
    same parent (ground follows the other endpoint) copies that parent's
    branch, and boundary pairs pick a parent at random. Returns None when no
    valid child is found within ``retries`` draws.
    """
    if a.n_nodes != b.n_nodes:
        raise ValueError("parents live on different scaffolds")
    pairs = a.pairs
    for _ in range(retries):
        owner = rng.integers(0, 2, a.n_nodes)
        pick = []
        for i, j in pairs:
            oi = owner[j] if i == 0 else owner[i]
            oj = owner[j]
            pick.append(oi if oi == oj else rng.integers(0, 2))
        src = [(a, b)[p] for p in pick]
        child = Genome(
            a.n_nodes,
            tuple(s.has_L[k] for k, s in enumerate(src)),
            tuple(s.has_JJ[k] for k, s in enumerate(src)),
            tuple(s.C[k] for k, s in enumerate(src)),
            tuple(s.L[k] for k, s in enumerate(src)),
            tuple(s.EJ[k] for k, s in enumerate(src)),
        )
        if is_valid(child, bounds):
            return child
    return None


def mutate(
    genome: Genome,
    p: float,
    rng: np.random.Generator,
    bounds: Bounds = Bounds(),
    sigma: float = 0.2,
    p_topology: float = 0.5,
    retries: int = 20,
    junctions: bool = True,
) -> Genome:
    """With probability p, toggle one topology flag or rescale one value.

    Values are multiplied by lognormal(0, sigma) and clamped to bounds.
    Invalid results are redrawn; after ``retries`` the genome is returned
    unchanged.
    """
    if not 0 <= p <= 1:
        raise ValueError("mutation probability must be in [0, 1]")
    if rng.random() >= p:
        return genome
    m = len(genome.C)
    for _ in range(retries):
        if rng.random() < p_topology:
            k = int(rng.integers(m))
            if rng.random() < 0.5 or not junctions:
                flags = list(genome.has_L)
                flags[k] = not flags[k]
                child = replace(genome, has_L=tuple(flags))
            else:
                flags = list(genome.has_JJ)
                flags[k] = not flags[k]
                child = replace(genome, has_JJ=tuple(flags))
        else:
            params = genome.parameters()
            kind, i = params[int(rng.integers(len(params)))]
            lo, hi = bounds.of(kind)
            v = getattr(genome, kind)[i] * rng.lognormal(0.0, sigma)
            child = genome.with_values([(kind, i)], [min(max(v, lo), hi)])
        if is_valid(child, bounds):
            return child
    return genome


# -- fitness -------------------------------------------------------------------


@dataclass(frozen=True)
class FitnessSpec:
    """Weighted targets (cost is minimized).

    Relative squared deviations for the qubit frequency, anharmonicity and
    drive matrix element; linear penalties for the flux and charge
    dispersions scaled by ``flux_scale`` and ``charge_scale`` (GHz). The
    anharmonicity is the smaller of |w2 - 2w1| and |w3 - 2w1|; its target
    defaults to a third of the qubit-frequency target.
    """

    omega10: float | None = 2.5
    anharmonicity: float | None = None
    matrix_element: float | None = 0.4
    w_omega10: float = 1.0
    w_anharmonicity: float = 1.0
    w_matrix_element: float = 1.0
    w_flux: float = 0.1
    w_charge: float = 0.1
    flux_scale: float = 0.01
    charge_scale: float = 1e-4
    n_modes: int | None = 3
    bias: Bias = Bias(0.0, np.pi)
    cutoffs: Cutoffs = FAST_CUTOFFS

    def __post_init__(self):
        ws = (self.w_omega10, self.w_anharmonicity, self.w_matrix_element, self.w_flux, self.w_charge)
        if any(w < 0 for w in ws):
            raise ValueError("weights must be non-negative")
        active = [
            self.w_omega10 > 0 and self.omega10 is not None,
            self.w_anharmonicity > 0 and self.anharmonicity_target is not None,
            self.w_matrix_element > 0 and self.matrix_element is not None,
            self.w_flux > 0,
            self.w_charge > 0,
        ]
        if not any(active):
            raise ValueError("at least one target must be active")

    @property
    def anharmonicity_target(self) -> float | None:
        if self.anharmonicity is not None:
            return self.anharmonicity
        return None if self.omega10 is None else self.omega10 / 3

    @property
    def levels(self) -> int:
        return 4 if (self.w_anharmonicity > 0 or self.w_matrix_element > 0) else 2


def properties(netlist: CircuitNetlist, spec: FitnessSpec) -> dict[str, float]:
    """Qubit properties entering the cost (GHz, dimensionless element)."""
    system = quantize_with(netlist, spec.cutoffs, spec.bias)
    k = spec.levels
    sol = eigensolve(system.H, k)
    f = sol.frequencies
    out = {"omega10": float(f[1])}
    if k >= 4:
        out["anharmonicity"] = float(min(abs(f[2] - 2 * f[1]), abs(f[3] - 2 * f[1])))
        me = 0.0
        for m in range(system.spec.n_modes):
            me = max(me, abs(sol.matrix_elements(system.n_op(m))[1, 0]))
        out["matrix_element"] = float(me)
    if spec.w_flux > 0:
        shifted = eigensolve(system.with_bias(Bias(spec.bias.ng_ext, spec.bias.phi_ext + FLUX_STEP)).H, 2)
        out["flux_dispersion"] = float(abs(shifted.frequencies[1] - f[1]))
    if spec.w_charge > 0:
        if system.spec.charge_modes():
            shifted = eigensolve(system.with_bias(Bias(spec.bias.ng_ext + 0.5, spec.bias.phi_ext)).H, 2)
            out["charge_dispersion"] = float(abs(shifted.frequencies[1] - f[1]))
        else:
            out["charge_dispersion"] = 0.0
    return out


def cost_from_properties(p: dict[str, float], spec: FitnessSpec) -> float:
    c = 0.0
    if spec.omega10 is not None and spec.w_omega10 > 0:
        c += spec.w_omega10 * ((p["omega10"] - spec.omega10) / spec.omega10) ** 2
    t = spec.anharmonicity_target
    if t is not None and spec.w_anharmonicity > 0:
        c += spec.w_anharmonicity * ((p["anharmonicity"] - t) / t) ** 2
    if spec.matrix_element is not None and spec.w_matrix_element > 0:
        c += spec.w_matrix_element * ((p["matrix_element"] - spec.matrix_element) / spec.matrix_element) ** 2
    if spec.w_flux > 0:
        c += spec.w_flux * p["flux_dispersion"] / spec.flux_scale
    if spec.w_charge > 0:
        c += spec.w_charge * p["charge_dispersion"] / spec.charge_scale
    return float(c)


INVALID_COST = 1e6


def evaluate(genome: Genome, spec: FitnessSpec) -> float:
    try:
        net = genome.to_netlist(spec.bias)
        if spec.n_modes is not None and hamiltonian_spec(net).n_modes != spec.n_modes:
            return INVALID_COST
        return cost_from_properties(properties(net, spec), spec)
    except (NetlistError, DimensionError, SolverError, np.linalg.LinAlgError):
        return INVALID_COST


# -- evolution -------------------------------------------------------------------


@dataclass(frozen=True)
class EvolutionConfig:
    n_nodes: int = 4
    population: int = 16
    generations: int = 20
    p_mut: float = 0.3
    n_cull: int | None = None  # default: half the population
    n_elite: int = 2
    bounds: Bounds = Bounds()
    seed: int = 0
    workers: int = 1
    junctions: bool = True
    init_retries: int = 2000

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4")
        if not 0 <= self.p_mut <= 1:
            raise ValueError("p_mut must be in [0, 1]")
        if self.n_elite >= self.population:
            raise ValueError("n_elite must be smaller than the population")

    @property
    def cull(self) -> int:
        n = self.population // 2 if self.n_cull is None else self.n_cull
        return min(max(n, 0), self.population - 2)


@dataclass
class EvolutionResult:
    best: Genome
    best_cost: float
    history: list[tuple[int, float, float]]  # (generation, best, mean)
    evaluated: int
    population: list[Genome] = field(default_factory=list)


def _evaluate_all(genomes, spec, cache, workers):
    todo = [g for g in dict.fromkeys(genomes, None) if g.key() not in cache]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(workers) as ex:
            costs = list(ex.map(evaluate, todo, [spec] * len(todo)))
    else:
        costs = [evaluate(g, spec) for g in todo]
    for g, c in zip(todo, costs):
        cache[g.key()] = c
    return [cache[g.key()] for g in genomes]


def initial_population(config: EvolutionConfig, spec: FitnessSpec, rng: np.random.Generator) -> list[Genome]:
    pop = []
    tries = 0
    while len(pop) < config.population:
        tries += 1
        if tries > config.init_retries:
            raise EvolutionError(f"found only {len(pop)} valid individuals after {config.init_retries} draws")
        g = random_genome(config.n_nodes, config.bounds, rng, p_JJ=0.4 if config.junctions else 0.0)
        if is_valid(g, config.bounds, spec.n_modes):
            pop.append(g)
    return pop


def evolve(
    config: EvolutionConfig,
    spec: FitnessSpec,
    initial: Sequence[Genome] | None = None,
    callback: Callable[[int, float, float], None] | None = None,
) -> EvolutionResult:
    """Truncation selection, mode-block crossover, mutation, elitism.

    Each generation keeps the best ``population - n_cull`` individuals as
    parents, copies the ``n_elite`` best unchanged, and fills the rest with
    mutated offspring of random parent pairs. Deterministic for a seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    pop = list(initial) if initial is not None else initial_population(config, spec, rng)
    for g in pop:
        if not is_valid(g, config.bounds, spec.n_modes):
            raise EvolutionError("initial population contains an invalid genome")
    cache: dict = {}
    history = []
    for gen in range(config.generations + 1):
        costs = _evaluate_all(pop, spec, cache, config.workers)
        order = np.argsort(costs, kind="stable")
        pop = [pop[i] for i in order]
        costs = [costs[i] for i in order]
        history.append((gen, float(costs[0]), float(np.mean(costs))))
        if callback is not None:
            callback(gen, costs[0], float(np.mean(costs)))
        if gen == config.generations:
            break
        parents = pop[: config.population - config.cull]
        nxt = pop[: config.n_elite]
        while len(nxt) < config.population:
            i, j = rng.choice(len(parents), 2, replace=len(parents) < 2)
            child = crossover(parents[i], parents[j], rng, config.bounds)
            if child is None or (spec.n_modes is not None and not is_valid(child, None, spec.n_modes)):
                continue
            nxt.append(mutate(child, config.p_mut, rng, config.bounds, junctions=config.junctions))
        pop = nxt
    return EvolutionResult(pop[0], float(costs[0]), history, len(cache), pop)


# -- fine tuning -----------------------------------------------------------------


@dataclass
class DescentResult:
    x: np.ndarray
    cost: float
    costs: list[float]
    iterations: int
    reason: str


def projected_descent(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    h: float = 1e-6,
    tol: float = 1e-6,
    max_iter: int = 200,
    step0: float = 1.0,
) -> DescentResult:
    """Central-difference gradient descent with backtracking, projected on a box.

    Stops when the cost improves by less than ``tol`` or when the projected
    gradient vanishes (every moving coordinate sits on a bound).
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    lo, hi = np.asarray(lower, float), np.asarray(upper, float)
    fx = f(x)
    costs = [fx]
    step = step0
    for it in range(1, max_iter + 1):
        grad = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            grad[i] = (f(np.clip(x + e, lo, hi)) - f(np.clip(x - e, lo, hi))) / (
                np.clip(x + e, lo, hi)[i] - np.clip(x - e, lo, hi)[i]
            )
        free = ~(((x <= lo) & (grad > 0)) | ((x >= hi) & (grad < 0)))
        g = np.where(free, grad, 0.0)
        if not np.any(g):
            return DescentResult(x, fx, costs, it, "bound")
        t = step
        while t > 1e-14:
            xn = np.clip(x - t * g, lo, hi)
            fn = f(xn)
            if fn <= fx - 1e-4 * np.dot(g, x - xn):
                break
            t /= 2
        else:
            return DescentResult(x, fx, costs, it, "line-search")
        improvement = fx - fn
        x, fx = xn, fn
        costs.append(fx)
        step = min(t * 2, 1e3 * step0)
        if improvement < tol:
            return DescentResult(x, fx, costs, it, "converged")
    return DescentResult(x, fx, costs, max_iter, "max-iter")


def fine_tune(genome: Genome, spec: FitnessSpec, bounds: Bounds = Bounds(), max_iter: int = 30, tol: float = 1e-6) -> tuple[Genome, DescentResult]:
    """Gradient descent on log component values with the topology fixed."""
    params = genome.parameters()
    lo = np.log([bounds.of(k)[0] for k, _ in params])
    hi = np.log([bounds.of(k)[1] for k, _ in params])

    def f(y):
        return evaluate(genome.with_values(params, np.exp(y)), spec)

    res = projected_descent(f, np.log(genome.values(params)), lo, hi, h=1e-4, tol=tol, max_iter=max_iter, step0=0.05)
    return genome.with_values(params, np.exp(res.x)), res


def genome_from_netlist(netlist: CircuitNetlist, bounds: Bounds = Bounds()) -> Genome:
    """Place a netlist on the all-to-all scaffold (nodes must be 0..N-1, ground 0)."""
    n = len(netlist.nodes)
    if tuple(sorted(netlist.nodes)) != tuple(range(n)) or netlist.reference != 0:
        raise ValueError("netlist nodes must be 0..N-1 with reference 0")
    pairs = scaffold_pairs(n)
    m = len(pairs)
    C = [math.sqrt(bounds.C[0] * bounds.C[1])] * m
    L = [math.sqrt(bounds.L[0] * bounds.L[1])] * m
    EJ = [math.sqrt(bounds.EJ[0] * bounds.EJ[1])] * m
    hL, hJ = [False] * m, [False] * m
    present = [False] * m
    for b in netlist.branches:
        k = pairs.index(tuple(sorted((b.node_from, b.node_to))))
        if present[k]:
            raise ValueError("parallel branches cannot be placed on the scaffold")
        present[k] = True
        C[k] = b.C
        if b.L is not None:
            hL[k], L[k] = True, b.L
        if b.EJ is not None:
            hJ[k], EJ[k] = True, b.EJ
    if not all(present):
        raise ValueError("scaffold needs a capacitor on every pair")
    return Genome(n, tuple(hL), tuple(hJ), tuple(C), tuple(L), tuple(EJ))


# -- resilience ------------------------------------------------------------------


@dataclass
class PerturbationStudy:
    sigmas: list[float]
    n_samples: int
    samples: dict[float, np.ndarray]  # sigma -> (n, 4): alpha, eta, flux, charge (GHz)
    resampled: dict[float, int]
    base: np.ndarray
    columns: tuple[str, ...] = ("alpha", "eta", "flux_dispersion", "charge_dispersion")

    def mean(self, sigma: float) -> np.ndarray:
        return self.samples[sigma].mean(axis=0)

    def std(self, sigma: float) -> np.ndarray:
        return self.samples[sigma].std(axis=0, ddof=1) if self.n_samples > 1 else np.zeros(4)

    def table(self) -> tuple[list[str], np.ndarray]:
        head = ["sigma"] + [f"{c}_{s}" for c in self.columns for s in ("mean", "std")]
        rows = []
        for s in self.sigmas:
            m, d = self.mean(s), self.std(s)
            rows.append([s] + [v for pair in zip(m, d) for v in pair])
        return head, np.array(rows)


def sample_properties(netlist: CircuitNetlist, cutoffs: Cutoffs = FAST_CUTOFFS) -> np.ndarray:
    """alpha = w3 - 2w1, eta = w2 - 2w1, |dw01| for 10^-2 Phi_0 and for one electron."""
    bias = netlist.bias
    system = quantize_with(netlist, cutoffs, bias)
    f = eigensolve(system.H, 4).frequencies
    fl = eigensolve(system.with_bias(Bias(bias.ng_ext, bias.phi_ext + FLUX_STEP)).H, 2).frequencies
    ch = eigensolve(system.with_bias(Bias(bias.ng_ext + 0.5, bias.phi_ext)).H, 2).frequencies
    return np.array([f[3] - 2 * f[1], f[2] - 2 * f[1], abs(fl[1] - f[1]), abs(ch[1] - f[1])])


def perturb(netlist: CircuitNetlist, sigma: float, rng: np.random.Generator) -> tuple[CircuitNetlist, int]:
    """Independent normal perturbation of every C, L, EJ; non-positive draws are redrawn."""
    redraws = 0

    def draw(v):
        nonlocal redraws
        if v is None:
            return None
        while True:
            x = rng.normal(v, sigma * v)
            if x > 0:
                return float(x)
            redraws += 1

    branches = [replace(b, C=draw(b.C), L=draw(b.L), EJ=draw(b.EJ)) for b in netlist.branches]
    return netlist.with_branches(branches), redraws


def _resilience_sample(args):
    netlist, sigma, seq, cutoffs = args
    rng = np.random.default_rng(seq)
    net, redraws = perturb(netlist, sigma, rng)
    return sample_properties(net, cutoffs), redraws


def resilience_study(
    netlist: CircuitNetlist,
    sigmas: Sequence[float] = (0.01, 0.02, 0.05),
    n_samples: int = 500,
    seed: int = 0,
    cutoffs: Cutoffs = FAST_CUTOFFS,
    workers: int = 1,
) -> PerturbationStudy:
    """Monte Carlo over fabrication spread; one RNG stream per sample."""
    base = sample_properties(netlist, cutoffs)
    root = np.random.SeedSequence(seed)
    samples, resampled = {}, {}
    for sigma, ss in zip(sigmas, root.spawn(len(sigmas))):
        jobs = [(netlist, sigma, s, cutoffs) for s in ss.spawn(n_samples)]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                res = list(ex.map(_resilience_sample, jobs, chunksize=8))
        else:
            res = [_resilience_sample(j) for j in jobs]
        samples[float(sigma)] = np.array([r[0] for r in res])
        resampled[float(sigma)] = int(sum(r[1] for r in res))
    return PerturbationStudy([float(s) for s in sigmas], n_samples, samples, resampled, base)


# -- run configuration -----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    evolution: EvolutionConfig
    fitness: FitnessSpec
    fine_tune_iterations: int = 0


_SECTIONS = {"evolution", "bounds", "targets", "fine_tune"}


def parse_run_config(text: str) -> RunConfig:
    """Search settings from TOML: [evolution], [bounds], [targets], [fine_tune]."""
    import tomli

    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ValueError(f"run config: {exc}") from exc
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ValueError(f"run config: unknown sections {sorted(unknown)}")
    b = data.get("bounds", {})
    bounds = Bounds(
        tuple(b.get("C_fF", Bounds.C)), tuple(b.get("L_nH", Bounds.L)), tuple(b.get("EJ_GHz", Bounds.EJ))
    )
    ev = dict(data.get("evolution", {}))
    t = dict(data.get("targets", {}))
    if "phi_ext_over_pi" in t or "ng_ext" in t:
        t["bias"] = Bias(float(t.pop("ng_ext", 0.0)), float(t.pop("phi_ext_over_pi", 1.0)) * np.pi)
    if "cutoff_charge" in t or "cutoff_flux" in t:
        t["cutoffs"] = Cutoffs(int(t.pop("cutoff_charge", FAST_CUTOFFS.charge)), int(t.pop("cutoff_flux", FAST_CUTOFFS.flux)))
    try:
        evolution = EvolutionConfig(bounds=bounds, **ev)
        fitness = FitnessSpec(**t)
    except TypeError as exc:
        raise ValueError(f"run config: {exc}") from exc
    ft = int(data.get("fine_tune", {}).get("iterations", 0))
    return RunConfig(evolution, fitness, ft)


def load_run_config(path) -> RunConfig:
    from pathlib import Path

    return parse_run_config(Path(path).read_text())
