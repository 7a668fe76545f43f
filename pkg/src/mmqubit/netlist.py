"""Read and write circuit netlists in TOML.

Layout::

    [node]
    ids = [0, 1, 2]
    reference = 0

    [[branch]]
    name = "b0"       # optional, defaults to b<index>
    from = 0
    to = 1
    C_fF = 10.0
    L_nH = 30.0       # optional
    EJ_GHz = 5.0      # optional

    [bias]
    ng_ext = 0.0
    phi_ext_over_pi = 1.0

    [closure]
    branches = ["b0"]
"""

from __future__ import annotations

import math
import re
from importlib import resources
from pathlib import Path

import tomli

from .circuit import Bias, Branch, CircuitNetlist, NetlistError

_BRANCH_KEYS = {"name", "from", "to", "C_fF", "L_nH", "EJ_GHz"}


class _Locator:
    """Map (table, index, key) back to a line number of the source text."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def _header_lines(self, header: str) -> list[int]:
        pat = re.compile(r"^\s*" + re.escape(header) + r"\s*(#.*)?$")
        return [i for i, ln in enumerate(self.lines) if pat.match(ln)]

    def line(self, header: str, index: int = 0, key: str | None = None) -> int | None:
        heads = self._header_lines(header)
        if index >= len(heads):
            return None
        start = heads[index]
        if key is None:
            return start + 1
        for i in range(start + 1, len(self.lines)):
            s = self.lines[i].strip()
            if s.startswith("["):
                break
            if re.match(re.escape(key) + r"\s*=", s):
                return i + 1
        return start + 1


def _number(value, what, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetlistError(f"{what} must be a number, got {value!r}", line)
    return float(value)


def parse_netlist(text: str) -> CircuitNetlist:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise NetlistError(f"syntax error: {exc}", line) from None
    loc = _Locator(text)

    node = data.get("node")
    if not isinstance(node, dict) or "ids" not in node:
        raise NetlistError("missing [node] table with 'ids'", loc.line("[node]"))
    ids = node["ids"]
    if not isinstance(ids, list) or not ids:
        raise NetlistError("[node].ids must be a non-empty array", loc.line("[node]", key="ids"))
    reference = node.get("reference", ids[0])

    raw_branches = data.get("branch", [])
    if not isinstance(raw_branches, list) or not raw_branches:
        raise NetlistError("netlist has no [[branch]] entries")
    branches = []
    for i, rb in enumerate(raw_branches):
        head = loc.line("[[branch]]", i)
        unknown = set(rb) - _BRANCH_KEYS
        if unknown:
            raise NetlistError(f"branch {i}: unknown keys {sorted(unknown)}", head)
        for key in ("from", "to", "C_fF"):
            if key not in rb:
                raise NetlistError(f"branch {i}: missing '{key}'", head)
        name = str(rb.get("name", f"b{i}"))
        values = {}
        for key in ("C_fF", "L_nH", "EJ_GHz"):
            if key in rb:
                values[key] = _number(rb[key], f"branch {name!r} {key}", loc.line("[[branch]]", i, key))
        try:
            branches.append(
                Branch(name, rb["from"], rb["to"], values["C_fF"], values.get("L_nH"), values.get("EJ_GHz"))
            )
        except NetlistError as exc:
            raise NetlistError(str(exc), head) from None

    bias_tab = data.get("bias", {})
    ng = _number(bias_tab.get("ng_ext", 0.0), "ng_ext", loc.line("[bias]", key="ng_ext"))
    phi = _number(bias_tab.get("phi_ext_over_pi", 0.0), "phi_ext_over_pi", loc.line("[bias]", key="phi_ext_over_pi"))
    closures = tuple(data.get("closure", {}).get("branches", []))
    try:
        return CircuitNetlist(
            nodes=tuple(ids),
            branches=tuple(branches),
            reference=reference,
            closures=closures,
            bias=Bias(ng, phi * math.pi),
        )
    except NetlistError as exc:
        line = None
        msg = str(exc)
        m = re.search(r"branch '([^']+)'", msg)
        if m:
            names = [b.name for b in branches]
            if m.group(1) in names:
                line = loc.line("[[branch]]", names.index(m.group(1)))
        elif "closure" in msg:
            line = loc.line("[closure]")
        elif "node" in msg:
            line = loc.line("[node]")
        raise NetlistError(msg, line) from None


def _fmt(v) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_netlist(netlist: CircuitNetlist) -> str:
    out = ["[node]", f"ids = [{', '.join(_fmt(n) for n in netlist.nodes)}]", f"reference = {_fmt(netlist.reference)}", ""]
    for b in netlist.branches:
        out += ["[[branch]]", f"name = {_fmt(b.name)}", f"from = {_fmt(b.node_from)}", f"to = {_fmt(b.node_to)}"]
        out.append(f"C_fF = {float(b.C)!r}")
        if b.L is not None:
            out.append(f"L_nH = {float(b.L)!r}")
        if b.EJ is not None:
            out.append(f"EJ_GHz = {float(b.EJ)!r}")
        out.append("")
    out += ["[bias]", f"ng_ext = {float(netlist.bias.ng_ext)!r}", f"phi_ext_over_pi = {netlist.bias.phi_ext / math.pi!r}"]
    if netlist.closures:
        out += ["", "[closure]", f"branches = [{', '.join(_fmt(c) for c in netlist.closures)}]"]
    return "\n".join(out) + "\n"


def preset_names() -> list[str]:
    root = resources.files("mmqubit.data")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_path(spec: str | Path, kind: str = "") -> Path:
    """Find a netlist/config file; bundled presets are looked up by stem.

    ``kind`` selects a subdirectory of the bundled data (``"configs"``).
    """
    p = Path(spec)
    for cand in (p, p.with_suffix(".toml")):
        if cand.is_file():
            return cand
    root = resources.files("mmqubit.data")
    if kind:
        root = root / kind
    cand = root / (p.stem + ".toml")
    if cand.is_file():
        return Path(str(cand))
    raise FileNotFoundError(f"no such netlist or preset: {spec}")


def load_netlist(spec: str | Path) -> CircuitNetlist:
    path = resolve_path(spec)
    return parse_netlist(path.read_text())


def save_netlist(netlist: CircuitNetlist, path: str | Path) -> None:
    Path(path).write_text(dump_netlist(netlist))


def difluxmon() -> CircuitNetlist:
    """The bundled three-mode reference device at its operating bias."""
    return load_netlist("difluxmon")
