from __future__ import annotations

import math

import pytest

from mmqubit.circuit import NetlistError
from mmqubit.netlist import dump_netlist, load_netlist, parse_netlist, preset_names, resolve_path, save_netlist

GOOD = """\
[node]
ids = [0, 1, 2]
reference = 0

[[branch]]
from = 0
to = 1
C_fF = 10.0
L_nH = 30.0

[[branch]]
name = "jj"
from = 1
to = 2
C_fF = 5.0
EJ_GHz = 4.0

[bias]
ng_ext = 0.25
phi_ext_over_pi = 0.5
"""


def test_parse_fields():
    net = parse_netlist(GOOD)
    assert net.nodes == (0, 1, 2)
    assert [b.name for b in net.branches] == ["b0", "jj"]
    assert net.branches[0].L == 30.0 and net.branches[0].EJ is None
    assert net.branches[1].EJ == 4.0
    assert net.bias.ng_ext == 0.25
    assert net.bias.phi_ext == pytest.approx(math.pi / 2)


def test_round_trip(device):
    again = parse_netlist(dump_netlist(device))
    assert again == device


def test_save_and_load(tmp_path, device):
    p = tmp_path / "dev.toml"
    save_netlist(device, p)
    assert load_netlist(p) == device


def test_bundled_preset_resolves():
    assert "difluxmon" in preset_names()
    assert resolve_path("examples/difluxmon").name == "difluxmon.toml"
    assert resolve_path("configs/difluxmon-targets", kind="configs").is_file()


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        resolve_path("no/such/netlist")


@pytest.mark.parametrize(
    "bad, line, match",
    [
        (GOOD.replace("C_fF = 5.0", "C_fF = -5.0"), 11, "capacitance"),
        (GOOD.replace("L_nH = 30.0", 'L_nH = "x"'), 9, "number"),
        (GOOD.replace("to = 2", "to = 7"), 11, "undeclared"),
        (GOOD.replace("C_fF = 10.0", "C_fF = 10.0\nR_ohm = 3"), 5, "unknown"),
        (GOOD.replace("[bias]", "[bias"), 18, "syntax"),
    ],
    ids=["negative-C", "non-number", "undeclared-node", "unknown-key", "syntax"],
)
def test_errors_carry_line_numbers(bad, line, match):
    with pytest.raises(NetlistError, match=match) as exc:
        parse_netlist(bad)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_missing_branch_field():
    with pytest.raises(NetlistError, match="missing 'C_fF'"):
        parse_netlist(GOOD.replace("C_fF = 10.0\n", ""))


def test_unknown_closure():
    with pytest.raises(NetlistError, match="closure"):
        parse_netlist(GOOD + '\n[closure]\nbranches = ["nope"]\n')
