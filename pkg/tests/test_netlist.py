"""Netlist construction, the third-oracle interpreter, sequential
assembly, co-simulation, and the BLIF/DOT exporters."""

import numpy as np
import pytest

from conftest import TOGGLE_KISS2
from fsmevo import (
    CgpParams,
    Gate,
    GateNetlist,
    Genotype,
    Latch,
    NetlistError,
    TruthTable,
    Xoshiro256StarStar,
    assemble_fsm,
    build_truth_table,
    decode,
    encode_states,
    evaluate,
    evaluate_scalar,
    export_blif,
    export_dot,
    fsm_signal_names,
    interpret,
    pack_table,
    parse_blif,
    parse_kiss2,
    random_genotype,
    reduction_percent,
    simulate_fsm,
    to_netlist,
    verify_netlist,
)
from fsmevo.netlist import BlifFormatError, FsmNetlist


def solved_netlist(solved):
    fsm, enc, tt, rep = solved
    in_names, out_names = fsm_signal_names(fsm.num_inputs, enc.width,
                                           fsm.num_outputs)
    g = rep.final_genotype
    return to_netlist(decode(g), g, in_names, out_names)


# ----------------------------------------------------------- construction

def test_signal_names_follow_bit_positions():
    in_names, out_names = fsm_signal_names(1, 3, 2)
    assert in_names == ("s0", "s1", "s2", "in0")   # by program variable
    assert out_names == ("ns0", "ns1", "ns2", "out0", "out1")


def test_to_netlist_keeps_only_active_nodes():
    p = CgpParams(2, 1, 3)
    # node 0 feeds node 2 feeds the output; node 1 is dead
    g = Genotype(p, (0, 0, 1, 1, 0, 0, 1, 2, 2, 4))
    net = to_netlist(decode(g), g)
    assert net.inputs == ("x1", "x0")
    assert [gt.name for gt in net.gates] == ["g0", "g1"]
    assert net.gates[0] == Gate("g0", "NAND", "x0", "x1")
    assert net.gates[1] == Gate("g1", "NOR", "g0", "g0")
    assert net.outputs == (("y0", "g1"),)
    assert net.num_gates == decode(g).num_gates == 2


def test_empty_phenotype_binds_outputs_to_inputs():
    p = CgpParams(2, 2, 2)
    g = Genotype(p, (0, 0, 0, 1, 1, 1, 1, 0))
    net = to_netlist(decode(g), g)
    assert net.gates == ()
    assert net.outputs == (("y0", "x1"), ("y1", "x0"))


def test_gate_count_conservation_on_random_genotypes():
    rng = Xoshiro256StarStar(14)
    for _ in range(200):
        p = CgpParams(1 + rng.randbelow(4), 1 + rng.randbelow(3),
                      rng.randbelow(12))
        g = random_genotype(p, rng)
        assert to_netlist(decode(g), g).num_gates == decode(g).num_gates


def test_naming_length_mismatch_rejected():
    p = CgpParams(2, 1, 1)
    g = Genotype(p, (0, 0, 1, 2))
    with pytest.raises(NetlistError, match="naming"):
        to_netlist(decode(g), g, input_names=("a",))


def test_netlist_validation_rejects_forward_references():
    with pytest.raises(NetlistError, match="undefined net"):
        GateNetlist(("a",), (Gate("g0", "NAND", "g1", "a"),
                             Gate("g1", "NOR", "a", "a")), ())


def test_netlist_validation_rejects_duplicates_and_bad_kinds():
    with pytest.raises(NetlistError, match="duplicate input"):
        GateNetlist(("a", "a"), (), ())
    with pytest.raises(NetlistError, match="defined twice"):
        GateNetlist(("a",), (Gate("a", "NAND", "a", "a"),), ())
    with pytest.raises(NetlistError, match="unknown kind"):
        GateNetlist(("a",), (Gate("g0", "XOR", "a", "a"),), ())
    with pytest.raises(NetlistError, match="undefined net"):
        GateNetlist(("a",), (), (("y", "b"),))
    with pytest.raises(NetlistError, match="collides"):
        GateNetlist(("a", "b"), (), (("a", "b"),))


def test_interpret_computes_gate_logic():
    net = GateNetlist(
        ("a", "b"),
        (Gate("g0", "NAND", "a", "b"), Gate("g1", "NOR", "g0", "b")),
        (("y0", "g0"), ("y1", "g1")),
    )
    assert interpret(net, {"a": 1, "b": 1}) == {"y0": 0, "y1": 0}
    assert interpret(net, {"a": 0, "b": 0}) == {"y0": 1, "y1": 0}
    with pytest.raises(NetlistError, match="no value"):
        interpret(net, {"a": 1})


# ------------------------------------------------------------ verification

def identity_table():
    desired = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.uint8)
    return TruthTable(2, 2, desired, np.ones_like(desired))


def test_zero_gate_identity_netlist_passes():
    net = GateNetlist(("x1", "x0"), (), (("y0", "x0"), ("y1", "x1")))
    report = verify_netlist(net, identity_table())
    assert report.passed
    assert report.lines() == ["PASS"]
    assert report.text() == "PASS\n"


def test_rewired_output_fails_exactly_where_columns_differ():
    # y0 reads x1 instead of x0: wrong precisely when the two bits differ
    net = GateNetlist(("x1", "x0"), (), (("y0", "x1"), ("y1", "x1")))
    report = verify_netlist(net, identity_table())
    assert not report.passed
    assert report.mismatches == ((1, "y0"), (2, "y0"))
    assert report.lines() == ["FAIL 1 y0", "FAIL 2 y0"]


def test_verify_checks_arity():
    net = GateNetlist(("a",), (), (("y", "a"),))
    with pytest.raises(NetlistError, match="inputs"):
        verify_netlist(net, identity_table())


def test_solved_artifact_passes_all_three_oracles(solved_10101):
    fsm, enc, tt, rep = solved_10101
    net = solved_netlist(solved_10101)
    assert verify_netlist(net, tt).passed
    assert evaluate(rep.final_genotype, pack_table(tt)).mismatches == 0
    assert evaluate_scalar(rep.final_genotype, tt).mismatches == 0


def test_netlist_interpreter_agrees_with_both_evaluators():
    rng = Xoshiro256StarStar(15)
    for trial in range(100):
        num_vars = 1 + rng.randbelow(6)
        num_outs = 1 + rng.randbelow(3)
        p = CgpParams(num_vars, num_outs, rng.randbelow(10))
        g = random_genotype(p, rng)
        rows = 1 << num_vars
        desired = np.array(
            [[rng.randbelow(2) for _ in range(num_outs)] for _ in range(rows)],
            dtype=np.uint8,
        )
        care = np.array(
            [[rng.randbelow(4) > 0 for _ in range(num_outs)] for _ in range(rows)],
            dtype=np.uint8,
        )
        tt = TruthTable(num_vars, num_outs, desired, care)
        net = to_netlist(decode(g), g)
        count = len(verify_netlist(net, tt).mismatches)
        assert count == evaluate(g, pack_table(tt)).mismatches == \
            evaluate_scalar(g, tt).mismatches, f"trial {trial}"


# ---------------------------------------------------------------- assembly

def test_dk27_assembles_with_three_latches(solved_dk27):
    fsm, enc, tt, rep = solved_dk27
    machine = assemble_fsm(solved_netlist(solved_dk27), enc, fsm)
    assert len(machine.latches) == 3
    assert [l.output for l in machine.latches] == ["s0", "s1", "s2"]
    assert [l.init for l in machine.latches] == [0, 0, 0]  # reset is code 000
    assert machine.inputs == ("in0",)
    assert machine.outputs == ("out0", "out1")
    assert machine.num_gates == rep.active_nodes


def test_latch_initial_values_follow_the_reset_code():
    fsm = parse_kiss2(TOGGLE_KISS2.replace(".r A", ".r B"), name="toggle")
    enc = encode_states(fsm)
    tt = build_truth_table(fsm, enc)
    in_names, out_names = fsm_signal_names(1, 1, 1)
    g = Genotype(CgpParams(2, 2, 0), (1, 1))  # both outputs = the input bit
    net = to_netlist(decode(g), g, in_names, out_names)
    machine = assemble_fsm(net, enc, fsm)
    assert machine.latches == (Latch("in0", "s0", 1),)


def test_assembly_arity_checked():
    net = GateNetlist(("a",), (), (("y", "a"),))
    fsm = parse_kiss2(TOGGLE_KISS2)
    with pytest.raises(NetlistError, match="core has"):
        assemble_fsm(net, encode_states(fsm), fsm)


def test_single_state_machine_gets_one_constant_latch():
    fsm = parse_kiss2("0 A A 1\n1 A A 0\n", name="one")
    enc = encode_states(fsm)
    tt = build_truth_table(fsm, enc)
    # handcraft: out0 = NOT in0, ns0 = constant 0 via NOR(NOT a, a)
    net = GateNetlist(
        ("in0", "s0"),
        (Gate("g0", "NOR", "in0", "in0"), Gate("g1", "NOR", "g0", "in0")),
        (("ns0", "g1"), ("out0", "g0")),
    )
    assert verify_netlist(net, tt).passed
    machine = assemble_fsm(net, enc, fsm)
    assert len(machine.latches) == 1
    sim = simulate_fsm(machine, fsm, enc, list("0110"))
    assert sim.passed
    assert [o[0] for o in sim.gate_outputs] == [1, 0, 0, 1]


# ------------------------------------------------------------ co-simulation

def test_detector_asserts_on_the_fifth_cycle(solved_10101):
    fsm, enc, tt, rep = solved_10101
    machine = assemble_fsm(solved_netlist(solved_10101), enc, fsm)
    sim = simulate_fsm(machine, fsm, enc, list("10101"))
    assert sim.passed
    assert [o[0] for o in sim.gate_outputs] == [0, 0, 0, 0, 1]
    assert sim.compared_bits == 5
    assert sim.text() == "PASS\n"


def test_empty_stimulus_passes_trivially(solved_10101):
    fsm, enc, tt, rep = solved_10101
    machine = assemble_fsm(solved_netlist(solved_10101), enc, fsm)
    sim = simulate_fsm(machine, fsm, enc, [])
    assert sim.passed and sim.cycles == 0 and sim.compared_bits == 0


def test_wrong_netlist_diverges(solved_10101):
    fsm, enc, tt, rep = solved_10101
    net = solved_netlist(solved_10101)
    # swap the primary output to a next-state net: behavior must differ
    broken = GateNetlist(net.inputs, net.gates,
                         net.outputs[:-1] + (("out0", net.outputs[0][1]),))
    machine = FsmNetlist(name="broken", core=broken,
                         latches=assemble_fsm(net, enc, fsm).latches,
                         inputs=("in0",), outputs=("out0",))
    sim = simulate_fsm(machine, fsm, enc, list("10101" * 4))
    assert not sim.passed
    cyc, name, got, want = sim.divergences[0]
    assert name == "out0" and got != want
    assert sim.text().startswith("FAIL cycle")


def test_uncovered_pair_is_skipped_and_flagged():
    # state B omits input 1: the symbolic side goes unknown there
    fsm = parse_kiss2("0 A B 1\n1 A A 0\n0 B A 0\n", name="gap")
    enc = encode_states(fsm)
    in_names, out_names = fsm_signal_names(1, 1, 1)
    # ns0 = out0 = NOR(in0, s0) matches every covered row
    g = Genotype(CgpParams(2, 2, 1), (1, 1, 0, 2, 2))
    net = to_netlist(decode(g), g, in_names, out_names)
    machine = assemble_fsm(net, enc, fsm)
    sim = simulate_fsm(machine, fsm, enc, list("0110"))
    # cycle 0: A--0-->B fine; cycle 1: B on input 1 is uncovered
    assert sim.skipped_cycles == (1, 2, 3)
    assert sim.compared_bits == 1


def test_bad_stimulus_vector_rejected(solved_10101):
    fsm, enc, tt, rep = solved_10101
    machine = assemble_fsm(solved_netlist(solved_10101), enc, fsm)
    with pytest.raises(ValueError, match="bad stimulus"):
        simulate_fsm(machine, fsm, enc, ["10"])


def test_randomized_cosim_on_a_solved_machine(solved_10101):
    fsm, enc, tt, rep = solved_10101
    machine = assemble_fsm(solved_netlist(solved_10101), enc, fsm)
    rng = Xoshiro256StarStar(77)
    for _ in range(20):
        stim = ["".join(str(rng.randbelow(2)) for _ in range(fsm.num_inputs))
                for _ in range(50)]
        sim = simulate_fsm(machine, fsm, enc, stim)
        assert sim.passed and not sim.skipped_cycles


# -------------------------------------------------------------------- BLIF

def test_single_nand_blif_cover():
    net = GateNetlist(("a", "b"), (Gate("g0", "NAND", "a", "b"),),
                      (("y", "g0"),))
    assert export_blif(net, "one_nand") == (
        ".model one_nand\n"
        ".inputs a b\n"
        ".outputs y\n"
        ".names a b g0\n"
        "0- 1\n"
        "-0 1\n"
        ".names g0 y\n"
        "1 1\n"
        ".end\n"
    )


def test_single_nor_blif_cover():
    net = GateNetlist(("a", "b"), (Gate("g0", "NOR", "a", "b"),),
                      (("y", "g0"),))
    assert ".names a b g0\n00 1\n" in export_blif(net)


def test_fsm_blif_has_one_latch_per_state_bit(solved_dk27):
    fsm, enc, tt, rep = solved_dk27
    machine = assemble_fsm(solved_netlist(solved_dk27), enc, fsm)
    blif = export_blif(machine)
    latch_lines = [l for l in blif.splitlines() if l.startswith(".latch")]
    assert len(latch_lines) == 3
    for line in latch_lines:
        tokens = line.split()
        assert tokens[3] == "re" and tokens[4] == "clk" and tokens[5] in "01"
    assert blif.splitlines()[0] == ".model dk27"
    assert blif.splitlines()[-1] == ".end"


def test_combinational_blif_round_trip():
    rng = Xoshiro256StarStar(16)
    for _ in range(30):
        p = CgpParams(1 + rng.randbelow(4), 1 + rng.randbelow(3),
                      rng.randbelow(8))
        g = random_genotype(p, rng)
        net = to_netlist(decode(g), g)
        back = parse_blif(export_blif(net))
        assert back == net
        assert export_blif(back) == export_blif(net)


def test_sequential_blif_round_trip(solved_10101):
    fsm, enc, tt, rep = solved_10101
    machine = assemble_fsm(solved_netlist(solved_10101), enc, fsm)
    blif = export_blif(machine)
    back = parse_blif(blif)
    assert back == machine
    assert export_blif(back) == blif
    assert verify_netlist(back.core, tt).passed


def test_round_trip_preserves_the_verification_verdict():
    # also for a failing netlist: the verdict must survive the file format
    net = GateNetlist(("x1", "x0"), (), (("y0", "x1"), ("y1", "x1")))
    tt = identity_table()
    direct = verify_netlist(net, tt)
    back = parse_blif(export_blif(net))
    again = verify_netlist(back, tt)
    assert direct.mismatches == again.mismatches


@pytest.mark.parametrize(
    "text,message",
    [
        (".model m\n.inputs a\n.outputs y\n.names a y\n1 0\n.end\n", "buffer"),
        (".model m\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end\n",
         "neither NAND nor NOR"),
        (".model m\n.inputs a\n.outputs y\n1 1\n.end\n", "outside"),
        (".model m\n.latch a b 0\n.end\n", "expected '.latch"),
        (".model m\n.inputs a \\\n.end\n", "continuation"),
        (".model m\n.end\nmore\n", "after .end"),
        (".model m\n.gate x\n.end\n", "unsupported"),
    ],
)
def test_blif_subset_violations_rejected(text, message):
    with pytest.raises(BlifFormatError, match=message):
        parse_blif(text)


# --------------------------------------------------------------------- DOT

def test_dot_counts_gates_and_latches(solved_dk27):
    fsm, enc, tt, rep = solved_dk27
    machine = assemble_fsm(solved_netlist(solved_dk27), enc, fsm)
    dot = export_dot(machine)
    gate_nodes = [l for l in dot.splitlines()
                  if "shape=ellipse" in l or "shape=hexagon" in l]
    assert len(gate_nodes) == rep.active_nodes
    assert sum(1 for l in dot.splitlines() if "shape=box" in l) == 3
    assert export_dot(machine) == dot  # deterministic
    assert dot.startswith('digraph "dk27" {')


def test_dot_zero_gate_netlist_has_only_ports():
    net = GateNetlist(("x0",), (), (("y0", "x0"),))
    dot = export_dot(net)
    assert "shape=circle" in dot and "shape=doublecircle" in dot
    assert "ellipse" not in dot and "hexagon" not in dot
    assert '"x0" -> "y0";' in dot


# --------------------------------------------------------------- reduction

@pytest.mark.parametrize(
    "baseline,evolved,percent",
    [(23, 18, 21.73), (25, 19, 24.00), (38, 26, 31.57), (62, 43, 30.64),
     (42, 20, 52.38), (10, 10, 0.00)],
)
def test_reduction_percent_truncates_to_two_decimals(baseline, evolved, percent):
    assert reduction_percent(baseline, evolved) == pytest.approx(percent)


def test_reduction_percent_sign_and_errors():
    assert reduction_percent(10, 12) == pytest.approx(-20.0)
    with pytest.raises(ValueError):
        reduction_percent(0, 5)
