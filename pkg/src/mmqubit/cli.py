"""Command-line entry point: ``mmqubit <command> ...``.

Every run writes tab-separated tables named ``<run-id>.<analysis>.tsv``
plus ``<run-id>.manifest.json`` into the output directory (``--out-dir``,
else ``$MMQUBIT_OUT_DIR``, else the working directory). Tables start with
``#`` metadata lines, then one column-name line, then rows with 9
significant digits. The run id defaults to ``<command>-<config hash>``, so
identical invocations overwrite identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuit import Bias, NetlistError
from .netlist import dump_netlist, load_netlist, resolve_path
from .quantize import FAST_CUTOFFS, REFERENCE_CUTOFFS, Cutoffs

OUT_DIR_ENV = "MMQUBIT_OUT_DIR"
DIGITS = 9


class CommandError(RuntimeError):
    pass


# -- parsing helpers -----------------------------------------------------------

_PI = re.compile(r"^([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$")


def parse_value(text: str) -> float:
    """Float, or a multiple of pi: ``pi``, ``0.9pi``, ``-2*pi``, ``pi/2``."""
    s = text.strip().lower()
    m = _PI.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * coef * np.pi / div
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace), a comma list, or one value."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
        try:
            n = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"range count must be an integer: {text!r}") from None
        if n < 1:
            raise argparse.ArgumentTypeError("range count must be positive")
        return np.linspace(parse_value(parts[0]), parse_value(parts[1]), n)
    return np.array([parse_value(p) for p in text.split(",") if p.strip()])


def fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{DIGITS}g}"


# -- output --------------------------------------------------------------------


class Run:
    """Collects tables for one invocation and writes them with a manifest."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config
        blob = json.dumps(config, sort_keys=True, default=str).encode()
        self.hash = hashlib.sha256(blob).hexdigest()
        self.run_id = args.run_id or f"{args.command}-{self.hash[:10]}"
        out = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
        self.out_dir = Path(out)
        self.files: list[str] = []
        self.failures: list[str] = []
        self.t0 = time.perf_counter()

    @property
    def manifest_name(self) -> str:
        return f"{self.run_id}.manifest.json"

    def table(self, analysis: str, columns: Sequence[str], rows, meta: dict | None = None) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / f"{self.run_id}.{analysis}.tsv"
        lines = [
            f"# run-id: {self.run_id}",
            f"# manifest: {self.manifest_name}",
            f"# config-hash: {self.hash}",
        ]
        for k, v in (meta or {}).items():
            lines.append(f"# {k}: {v}")
        lines.append("\t".join(columns))
        for row in rows:
            lines.append("\t".join(fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        self.files.append(path.name)
        return path

    def text(self, analysis: str, suffix: str, content: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / f"{self.run_id}.{analysis}.{suffix}"
        path.write_text(content)
        self.files.append(path.name)
        return path

    def finish(self) -> int:
        a = self.args
        manifest = {
            "command": a.command,
            "run_id": self.run_id,
            "config_hash": self.hash,
            "config": self.config,
            "seed": getattr(a, "seed", None),
            "cutoffs": {"charge": a.cutoff_charge, "flux": a.cutoff_flux},
            "tolerances": {"eigensolver": a.tol},
            "tool_version": __version__,
            "wall_time_s": round(time.perf_counter() - self.t0, 3),
            "outputs": self.files,
            "failures": self.failures,
        }
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / self.manifest_name).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
        for f in self.files:
            print(self.out_dir / f)
        if self.failures:
            print(f"{len(self.failures)} item(s) failed:", file=sys.stderr)
            for f in self.failures:
                print(f"  {f}", file=sys.stderr)
            return 1
        return 0


def _cutoffs(args) -> Cutoffs:
    return Cutoffs(args.cutoff_charge, args.cutoff_flux)


def _netlist(args):
    net = load_netlist(args.netlist)
    ng = net.bias.ng_ext if args.ng_ext is None else args.ng_ext
    phi = net.bias.phi_ext if args.phi_ext is None else args.phi_ext
    return net.with_bias(ng, phi)


def _base_config(args, net=None, extra: dict | None = None) -> dict:
    cfg = {
        "command": args.command,
        "cutoffs": [args.cutoff_charge, args.cutoff_flux],
        "levels": args.levels,
        "tol": args.tol,
    }
    if net is not None:
        cfg["netlist"] = dump_netlist(net)
    cfg.update(extra or {})
    return cfg


# -- commands -----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    from .spectrum import diagonalize

    net = _netlist(args)
    k = args.k or args.levels
    run = Run(args, _base_config(args, net, {"k": k}))
    _, _, res = diagonalize(net, max(k, 4), _cutoffs(args), tol=args.tol)
    f = res.frequencies
    meta = {"phi_ext": fmt(net.bias.phi_ext), "ng_ext": fmt(net.bias.ng_ext), "units": "GHz"}
    run.table("spectrum", ["level", "E_GHz", "w0n_GHz"], [(i, res.energies[i], f[i]) for i in range(k)], meta)
    labels = sorted(res.elements)
    rows = []
    for i in range(k):
        for j in range(k):
            rows.append([i, j] + [abs(res.elements[lab][i, j]) for lab in labels])
    run.table("elements", ["i", "j"] + [f"|{lab}|" for lab in labels], rows, meta)
    print(f"w10 = {fmt(res.omega10)} GHz  eta = {fmt(res.eta)} GHz  alpha = {fmt(res.alpha)} GHz")
    return run.finish()


def cmd_sweep(args) -> int:
    from .spectrum import sweep_charge, sweep_flux

    net = _netlist(args)
    if (args.flux is None) == (args.charge is None):
        raise CommandError("give exactly one of --flux or --charge")
    grid = args.flux if args.flux is not None else args.charge
    run = Run(args, _base_config(args, net, {"grid": grid.tolist(), "axis": "flux" if args.flux is not None else "charge"}))
    if args.flux is not None:
        res = sweep_flux(net, grid, k=args.levels, cutoffs=_cutoffs(args), tol=args.tol)
    else:
        res = sweep_charge(net, grid, k=args.levels, cutoffs=_cutoffs(args), tol=args.tol, reference=float(grid[0]))
    names, data = res.columns()
    run.table("sweep", names, data, {"reference": fmt(res.reference), "w01_ref_GHz": fmt(res.omega01_ref)})
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return run.finish()


def _noise(args):
    from .coherence import NoiseParameters

    kw = {}
    for name in ("T", "Q_cap", "Q_ind", "x_qp", "A_flux", "A_charge", "t_meas"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if args.transitions:
        kw["transitions"] = args.transitions
    if args.charge_slope:
        kw["charge_slope"] = args.charge_slope
    if args.dielectric_operator:
        kw["dielectric_operator"] = args.dielectric_operator
    return NoiseParameters(**kw)


def cmd_coherence(args) -> int:
    from .coherence import ChannelKind, coherence_report

    net = _netlist(args)
    params = _noise(args)
    grid = args.sweep_flux if args.sweep_flux is not None else np.array([net.bias.phi_ext])
    run = Run(args, _base_config(args, net, {"grid": grid.tolist(), "noise": params.describe()}))
    chans = [c.value for c in ChannelKind]
    rows = []
    for phi in grid:
        try:
            rep = coherence_report(net, params, _cutoffs(args), max(args.levels, 4), Bias(net.bias.ng_ext, float(phi)))
        except Exception as exc:  # noqa: BLE001 - report and continue with the grid
            run.failures.append(f"phi_ext={fmt(phi)}: {type(exc).__name__}: {exc}")
            continue
        rows.append([phi] + [rep.time_us(c) for c in chans] + [rep.T1, rep.Tphi, rep.T2])
    meta = {k: fmt(v) if isinstance(v, (float, int)) else v for k, v in params.describe().items()}
    meta["times"] = "us; per-channel columns are 1/Gamma of that channel"
    run.table("coherence", ["phi_ext"] + [f"{c}_us" for c in chans] + ["T1_us", "Tphi_us", "T2_us"], rows, meta)
    if len(grid) == 1 and rows:
        print(f"T1 = {fmt(rows[0][-3])} us  Tphi = {fmt(rows[0][-2])} us  T2 = {fmt(rows[0][-1])} us")
    return run.finish()


def _control_model(args):
    from .gate import build_control_model, transmon_model
    from .spectrum import diagonalize

    if args.model == "transmon":
        return transmon_model()
    net = _netlist(args)
    _, _, res = diagonalize(net, max(args.levels, 4), _cutoffs(args), tol=args.tol)
    return build_control_model(res, args.drive_node, levels=4, coupling=args.coupling)


def cmd_gate(args) -> int:
    from .gate import calibrate, drag_correct, hahn_schedule, propagate

    model = _control_model(args)
    net_text = None if args.model == "transmon" else dump_netlist(_netlist(args))
    run = Run(
        args,
        _base_config(args, None, {
            "netlist": net_text, "model": args.model, "shape": args.shape, "tg": args.tg.tolist(),
            "beta": args.beta, "n_steps": args.n_steps, "drive_node": args.drive_node, "coupling": args.coupling,
        }),
    )
    rows = []
    for tg in args.tg:
        try:
            if args.shape == "optimized":
                cal = calibrate(model, float(tg), n_steps=args.n_steps)
                r = cal.result
                extra = [cal.Omega0, cal.delta]
            else:
                s = hahn_schedule(model, float(tg), args.n_steps)
                if args.shape == "drag":
                    s = drag_correct(s, model, args.beta)
                r = propagate(model, s)
                extra = [s.Omega0, s.delta]
        except Exception as exc:  # noqa: BLE001
            run.failures.append(f"tg={fmt(tg)}: {type(exc).__name__}: {exc}")
            continue
        rows.append([tg, r.error, r.leakage[0], r.leakage[1]] + extra)
        if args.export_pulse:
            env = r.schedule.sample(501)
            run.table(f"pulse_tg{fmt(tg)}", ["t_ns", "Re_Omega_rad_ns", "Im_Omega_rad_ns", "detuning_rad_ns"], env)
    meta = {
        "lambda1": fmt(model.lam1), "lambda2": fmt(model.lam2), "lambda3": fmt(model.lam3),
        "alpha_GHz": fmt(model.alpha), "units": "t_g in ns, Omega0 and delta in rad/ns",
    }
    run.table("gate", ["tg_ns", "E", "L0", "L1", "Omega0", "delta"], rows, meta)
    return run.finish()


def cmd_readout(args) -> int:
    from .readout import (
        READOUT_PRESETS, calibrate_amplitude, dispersive_shifts, simulate_iq, synthesize_reset_pulse, trial_pulse,
    )
    from .spectrum import diagonalize

    net = _netlist(args)
    cfg = READOUT_PRESETS[args.preset]
    if args.g is not None:
        cfg = replace(cfg, g=args.g)
    run = Run(args, _base_config(args, net, {"preset": args.preset, "g": cfg.g, "photons": args.photons, "reset": args.reset}))
    _, _, res = diagonalize(net, max(args.levels, cfg.levels), _cutoffs(args), tol=args.tol)
    model = dispersive_shifts(res, cfg)
    pulse, c = calibrate_amplitude(model, trial_pulse(cfg), 1, args.photons)
    if args.reset:
        reset = synthesize_reset_pulse(model, cfg, trial=pulse)
        pulse, _ = calibrate_amplitude(model, reset, 1, args.photons)
    meta = {
        "chi_qubit_GHz": fmt(model.chi_qubit), "kappa_GHz": fmt(model.kappa), "n_crit": fmt(model.n_crit),
        "delta10_GHz": fmt(model.delta10), "Omega0_trial_GHz": fmt(cfg.Omega0 * c),
    }
    for note in model.notes:
        print(f"note: {note}", file=sys.stderr)
    run.table("shifts", ["level", "E_GHz", "chi_GHz"], [(k, model.energies[k], model.chi[k]) for k in range(len(model.chi))], meta)
    run.table("pulse", ["t_ns", "Re_Omega_rad_ns", "Im_Omega_rad_ns"], pulse.columns(), meta)
    summary = []
    for level in (0, 1):
        tr = simulate_iq(model, pulse, level)
        run.table(f"iq_level{level}", ["t_ns", "I", "Q", "photons"], tr.columns(), meta)
        summary.append((level, tr.photons.max(), abs(tr.at(0.5 * pulse.t[-1])) ** 2, tr.leftover))
    run.table("summary", ["level", "peak_photons", "mid_photons", "leftover_photons"], summary, meta)
    return run.finish()


def cmd_evolve(args) -> int:
    from .evolve import evolve, fine_tune, load_run_config

    path = resolve_path(args.config, kind="configs")
    rc = load_run_config(path)
    ev = rc.evolution
    changes = {k: getattr(args, k) for k in ("seed", "population", "generations") if getattr(args, k) is not None}
    ev = replace(ev, **changes)
    run = Run(args, _base_config(args, None, {"config": path.read_text(), "overrides": changes}))
    res = evolve(ev, rc.fitness)
    best, cost = res.best, res.best_cost
    if rc.fine_tune_iterations > 0:
        best, d = fine_tune(best, rc.fitness, ev.bounds, max_iter=rc.fine_tune_iterations)
        cost = d.cost
    run.table("history", ["generation", "best_cost", "mean_cost"], res.history, {"seed": ev.seed})
    run.text("best", "toml", dump_netlist(best.to_netlist(rc.fitness.bias)))
    print(f"best cost {fmt(cost)} after {ev.generations} generations ({res.evaluated} evaluations)")
    return run.finish()


def cmd_resilience(args) -> int:
    from .evolve import resilience_study

    net = _netlist(args)
    run = Run(args, _base_config(args, net, {"sigmas": args.sigma.tolist(), "samples": args.samples, "seed": args.seed}))
    st = resilience_study(net, args.sigma, args.samples, args.seed, _cutoffs(args))
    head, data = st.table()
    run.table("resilience", head, data, {"samples": args.samples, "resampled": st.resampled, "units": "GHz"})
    for s in st.sigmas:
        run.table(f"samples_sigma{fmt(s)}", list(st.columns), st.samples[s])
    return run.finish()


# -- parser -------------------------------------------------------------------


def _common(charge: int = REFERENCE_CUTOFFS.charge, flux: int = REFERENCE_CUTOFFS.flux, seed: int | None = None):
    """Shared options; a fresh parent per subcommand so per-command defaults stay local."""
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--cutoff-charge", type=int, default=charge, help="charge states -N..N per charge-like mode")
    g.add_argument("--cutoff-flux", type=int, default=flux, help="oscillator levels per flux-like mode")
    g.add_argument("--levels", type=int, default=6, help="eigenstates to compute")
    g.add_argument("--tol", type=float, default=1e-10, help="eigensolver tolerance")
    g.add_argument("--seed", type=int, default=seed, help="random seed (evolve, resilience)")
    g.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or .)")
    g.add_argument("--run-id", default=None, help="output file prefix (default <command>-<config hash>)")
    g.add_argument("--phi-ext", type=parse_value, default=None, help="external flux in rad, e.g. pi or 0.9pi")
    g.add_argument("--ng-ext", type=parse_value, default=None, help="offset charge in Cooper pairs")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmqubit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[_common()], help="eigenenergies and matrix elements")
    s.add_argument("netlist", help="netlist file or bundled preset name")
    s.add_argument("--k", type=int, default=None, help="number of states to report")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("sweep", parents=[_common()], help="tracked spectrum versus flux or offset charge")
    s.add_argument("netlist")
    s.add_argument("--flux", type=parse_range, default=None, help="flux grid start:stop:count (rad)")
    s.add_argument("--charge", type=parse_range, default=None, help="charge grid start:stop:count (Cooper pairs)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("coherence", parents=[_common()], help="T1, Tphi, T2 per noise channel")
    s.add_argument("netlist")
    s.add_argument("--sweep-flux", type=parse_range, default=None, help="flux grid start:stop:count (rad)")
    for name, hlp in (
        ("T", "temperature (K)"), ("Q_cap", "capacitor quality factor"), ("Q_ind", "inductor quality factor"),
        ("x_qp", "quasiparticle density"), ("A_flux", "flux noise amplitude (Phi_0)"),
        ("A_charge", "charge noise amplitude (e)"), ("t_meas", "measurement time (s)"),
    ):
        s.add_argument("--" + name.replace("_", "-").lower(), dest=name, type=float, default=None, help=hlp)
    s.add_argument("--transitions", choices=["outgoing", "all"], default=None)
    s.add_argument("--charge-slope", choices=["local", "worst"], default=None)
    s.add_argument("--dielectric-operator", choices=["voltage", "node_difference"], default=None)
    s.set_defaults(func=cmd_coherence)

    s = sub.add_parser("gate", parents=[_common()], help="single-qubit X gate error and leakage")
    s.add_argument("netlist", nargs="?", default="difluxmon")
    s.add_argument("--shape", choices=["hahn", "drag", "optimized"], default="hahn")
    s.add_argument("--tg", type=parse_range, default=parse_range("5:20:16"), help="gate times start:stop:count (ns)")
    s.add_argument("--beta", type=float, default=1.0, help="DRAG coefficient")
    s.add_argument("--n-steps", type=int, default=2000, help="integration steps per gate")
    s.add_argument("--drive-node", default="n1")
    s.add_argument("--coupling", choices=["dressed", "full"], default="dressed")
    s.add_argument("--model", choices=["circuit", "transmon"], default="circuit")
    s.add_argument("--export-pulse", action="store_true", help="write one envelope table per gate time")
    s.set_defaults(func=cmd_gate)

    s = sub.add_parser("readout", parents=[_common()], help="dispersive shifts and cavity IQ trajectories")
    s.add_argument("netlist")
    s.add_argument("--preset", choices=["caption", "text"], default="caption")
    s.add_argument("--g", type=float, default=None, help="coupling of the 0-1 transition (GHz)")
    s.add_argument("--photons", type=float, default=5.0, help="photons at mid-measurement")
    s.add_argument("--reset", action="store_true", help="synthesize the photon-reset pulse")
    s.set_defaults(func=cmd_readout)

    fast = dict(charge=FAST_CUTOFFS.charge, flux=FAST_CUTOFFS.flux)
    s = sub.add_parser("evolve", parents=[_common(**fast)], help="evolutionary circuit search")
    s.add_argument("config", help="run config file or bundled name (configs/difluxmon-targets)")
    s.add_argument("--population", type=int, default=None)
    s.add_argument("--generations", type=int, default=None)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("resilience", parents=[_common(**fast, seed=0)], help="fabrication-spread Monte Carlo")
    s.add_argument("netlist")
    s.add_argument("--sigma", type=parse_range, default=parse_range("0.01,0.02,0.05"), help="relative spreads")
    s.add_argument("--samples", type=int, default=500)
    s.set_defaults(func=cmd_resilience)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NetlistError, CommandError, ValueError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
