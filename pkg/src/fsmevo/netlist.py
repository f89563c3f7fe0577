"""Gate-level netlists: naming, verification, BLIF/DOT export, and the
sequential closure with D flip-flops.

Positional conventions (shared with the truth-table expansion):

* `GateNetlist.inputs` lists nets in descending row-bit order, so
  position p carries truth-table variable ``len(inputs) - 1 - p``.  For a
  machine that is ``in0 .. in{n_pi-1}`` (declaration order, in0 the most
  significant row bits) followed by ``s{n_s-1} .. s0``.
* `GateNetlist.outputs` pairs (name, source net) in table column order:
  next-state bits ``ns0 ..`` first, then primary outputs ``out0 ..``.
* gates are named ``g0, g1, ...`` in topological order.

The netlist interpreter here shares no code with either fitness
evaluator; it is the third oracle of the equivalence suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .cgp import FUNCTIONS, Genotype, Phenotype, decode
from .fsm import Fsm, StateEncoding, TruthTable

#: Static CMOS cost of a 2-input NAND or NOR, reported as an
#: informational line only, never optimized for.
TRANSISTORS_PER_GATE = 4

_BLIF_COVERS = {"NAND": ("0- 1", "-0 1"), "NOR": ("00 1",)}


class NetlistError(ValueError):
    """Raised for structurally invalid netlists or mismatched shapes."""


class BlifFormatError(ValueError):
    """Raised when BLIF text falls outside the supported subset."""


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str  # "NAND" or "NOR"
    src1: str
    src2: str


@dataclass(frozen=True)
class GateNetlist:
    """Acyclic 2-input NAND/NOR network with named ports."""

    inputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    outputs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        known = set()
        for name in self.inputs:
            if name in known:
                raise NetlistError(f"duplicate input net {name!r}")
            known.add(name)
        for gate in self.gates:
            if gate.kind not in _BLIF_COVERS:
                raise NetlistError(f"gate {gate.name!r} has unknown kind {gate.kind!r}")
            for src in (gate.src1, gate.src2):
                if src not in known:
                    raise NetlistError(
                        f"gate {gate.name!r} reads undefined net {src!r}"
                    )
            if gate.name in known:
                raise NetlistError(f"net {gate.name!r} defined twice")
            known.add(gate.name)
        seen_out = set()
        for name, src in self.outputs:
            if src not in known:
                raise NetlistError(f"output {name!r} bound to undefined net {src!r}")
            if name in seen_out:
                raise NetlistError(f"duplicate output name {name!r}")
            # a pass-through may reuse its own source's name, nothing else
            if name in known and name != src:
                raise NetlistError(f"output name {name!r} collides with a net")
            seen_out.add(name)

    @property
    def num_gates(self) -> int:
        return len(self.gates)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.outputs)


@dataclass(frozen=True)
class Latch:
    """Rising-edge D flip-flop: `data` is sampled into `output` each clock."""

    data: str
    output: str
    init: int


@dataclass(frozen=True)
class FsmNetlist:
    name: str
    core: GateNetlist
    latches: tuple[Latch, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        driven = [latch.output for latch in self.latches]
        if len(set(driven)) != len(driven):
            raise NetlistError("two latches drive the same state net")
        core_state = set(self.core.inputs) - set(self.inputs)
        if core_state != set(driven):
            raise NetlistError(
                "latch outputs do not cover the core's state inputs"
            )
        for latch in self.latches:
            if latch.init not in (0, 1):
                raise NetlistError(f"latch {latch.output!r} init {latch.init!r}")

    @property
    def num_gates(self) -> int:
        return self.core.num_gates


def fsm_signal_names(
    num_inputs: int, state_width: int, num_outputs: int
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Per-variable input names and per-column output names for a machine."""
    in_names = tuple(
        f"s{v}" if v < state_width else f"in{state_width + num_inputs - 1 - v}"
        for v in range(state_width + num_inputs)
    )
    out_names = tuple(
        f"ns{o}" if o < state_width else f"out{o - state_width}"
        for o in range(state_width + num_outputs)
    )
    return in_names, out_names


def to_netlist(
    ph: Phenotype | None,
    g: Genotype,
    input_names: Sequence[str] | None = None,
    output_names: Sequence[str] | None = None,
) -> GateNetlist:
    """Materialise the active part of `g` as a named gate netlist.

    `input_names` is indexed by program variable, `output_names` by
    program output; defaults are ``x<v>`` and ``y<o>``.  Gate count
    always equals the phenotype's active-node count.
    """
    if ph is None:
        ph = decode(g)
    params = g.params
    n_i = params.num_inputs
    if input_names is None:
        input_names = tuple(f"x{v}" for v in range(n_i))
    if output_names is None:
        output_names = tuple(f"y{o}" for o in range(params.num_outputs))
    if len(input_names) != n_i or len(output_names) != params.num_outputs:
        raise NetlistError("naming lists do not match the program shape")

    net_of = dict(enumerate(input_names))
    nodes = g.nodes
    gates = []
    for t, j in enumerate(ph.active):
        f, a, b = nodes[j]
        gates.append(Gate(f"g{t}", FUNCTIONS[f], net_of[a], net_of[b]))
        net_of[n_i + j] = f"g{t}"
    outputs = tuple(
        (output_names[o], net_of[src]) for o, src in enumerate(ph.output_sources)
    )
    return GateNetlist(
        inputs=tuple(input_names[v] for v in reversed(range(n_i))),
        gates=tuple(gates),
        outputs=outputs,
    )


def _run_nets(n: GateNetlist, assignment: Mapping[str, int]) -> dict[str, int]:
    """Interpret the network gate by gate; returns every net's value."""
    nets = {}
    for name in n.inputs:
        if name not in assignment:
            raise NetlistError(f"no value supplied for input {name!r}")
        nets[name] = 1 if assignment[name] else 0
    for gate in n.gates:
        a, b = nets[gate.src1], nets[gate.src2]
        if gate.kind == "NAND":
            nets[gate.name] = 0 if (a == 1 and b == 1) else 1
        else:
            nets[gate.name] = 1 if (a == 0 and b == 0) else 0
    return nets


def interpret(n: GateNetlist, assignment: Mapping[str, int]) -> dict[str, int]:
    """Output name -> bit for one input assignment."""
    nets = _run_nets(n, assignment)
    return {name: nets[src] for name, src in n.outputs}


@dataclass(frozen=True)
class VerificationReport:
    rows_checked: int
    mismatches: tuple[tuple[int, str], ...]  # (row index, output name)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def lines(self) -> list[str]:
        if self.passed:
            return ["PASS"]
        return [f"FAIL {row} {name}" for row, name in self.mismatches]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def verify_netlist(n: GateNetlist, tt: TruthTable) -> VerificationReport:
    """Exhaustively compare the netlist with the table's cared bits.

    Input net at list position p receives row bit
    ``num_vars - 1 - p``; output o is compared against table column o.
    """
    num_vars = tt.num_vars
    if len(n.inputs) != num_vars:
        raise NetlistError(
            f"netlist has {len(n.inputs)} inputs, table needs {num_vars}"
        )
    if len(n.outputs) != tt.num_outs:
        raise NetlistError(
            f"netlist has {len(n.outputs)} outputs, table needs {tt.num_outs}"
        )
    mismatches = []
    for row in range(tt.num_rows):
        assignment = {
            name: (row >> (num_vars - 1 - p)) & 1
            for p, name in enumerate(n.inputs)
        }
        nets = _run_nets(n, assignment)
        for o, (name, src) in enumerate(n.outputs):
            if tt.care[row, o] and nets[src] != tt.desired[row, o]:
                mismatches.append((row, name))
    return VerificationReport(tt.num_rows, tuple(mismatches))


def assemble_fsm(n: GateNetlist, enc: StateEncoding, fsm: Fsm) -> FsmNetlist:
    """Close the loop: one D flip-flop per state bit, reset to the
    machine's reset code."""
    n_pi, width = fsm.num_inputs, enc.width
    if len(n.inputs) != n_pi + width:
        raise NetlistError(
            f"core has {len(n.inputs)} inputs, machine needs {n_pi + width}"
        )
    if len(n.outputs) != width + fsm.num_outputs:
        raise NetlistError(
            f"core has {len(n.outputs)} outputs, machine needs "
            f"{width + fsm.num_outputs}"
        )
    reset_code = enc.codes[fsm.reset_state]
    latches = tuple(
        Latch(
            data=n.outputs[j][1],
            # state bit j sits at input position n_pi + width - 1 - j
            output=n.inputs[n_pi + width - 1 - j],
            init=(reset_code >> j) & 1,
        )
        for j in range(width)
    )
    return FsmNetlist(
        name=fsm.name,
        core=n,
        latches=latches,
        inputs=n.inputs[:n_pi],
        outputs=n.output_names[width:],
    )


@dataclass(frozen=True)
class CosimReport:
    cycles: int
    compared_bits: int
    divergences: tuple[tuple[int, str, int, int], ...]  # cycle, name, got, want
    skipped_cycles: tuple[int, ...]
    gate_outputs: tuple[tuple[int, ...], ...]

    @property
    def passed(self) -> bool:
        return not self.divergences

    def lines(self) -> list[str]:
        if self.passed:
            return ["PASS"]
        return [
            f"FAIL cycle {cyc} {name} got {got} want {want}"
            for cyc, name, got, want in self.divergences
        ]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _matching_transition(fsm: Fsm, state: int, vector: str):
    for t in fsm.transitions:
        if t.current != state:
            continue
        if all(c == "-" or c == v for c, v in zip(t.input_cube, vector)):
            return t
    return None


def simulate_fsm(
    fn: FsmNetlist, fsm: Fsm, enc: StateEncoding, stimulus: Sequence[str]
) -> CosimReport:
    """Co-simulate gates against the symbolic machine from reset.

    `stimulus` holds one bit string of length `fsm.num_inputs` per clock
    cycle.  Outputs are compared wherever the symbolic machine specifies
    them; a cycle whose (state, input) pair no transition covers is
    flagged as skipped, and the symbolic side stays unknown from there
    on.
    """
    state_bits = {latch.output: latch.init for latch in fn.latches}
    sym_state: int | None = fsm.reset_state
    divergences = []
    skipped = []
    gate_trace = []
    compared = 0
    for cycle, vector in enumerate(stimulus):
        if len(vector) != fsm.num_inputs or any(c not in "01" for c in vector):
            raise ValueError(f"cycle {cycle}: bad stimulus vector {vector!r}")
        assignment = dict(state_bits)
        for k, name in enumerate(fn.inputs):
            assignment[name] = int(vector[k])
        nets = _run_nets(fn.core, assignment)
        outs = tuple(nets[src] for _, src in fn.core.outputs[len(fn.latches):])
        gate_trace.append(outs)

        if sym_state is None:
            skipped.append(cycle)
        else:
            t = _matching_transition(fsm, sym_state, vector)
            if t is None:
                skipped.append(cycle)
                sym_state = None
            else:
                for k, c in enumerate(t.output_cube):
                    if c == "-":
                        continue
                    compared += 1
                    if outs[k] != int(c):
                        divergences.append(
                            (cycle, fn.outputs[k], outs[k], int(c))
                        )
                sym_state = t.next

        # rising edge: all latches sample their data nets together
        state_bits = {latch.output: nets[latch.data] for latch in fn.latches}
    return CosimReport(
        cycles=len(stimulus),
        compared_bits=compared,
        divergences=tuple(divergences),
        skipped_cycles=tuple(skipped),
        gate_outputs=tuple(gate_trace),
    )


# --------------------------------------------------------------------------
# BLIF

def _blif_gate_block(gate: Gate) -> list[str]:
    return [f".names {gate.src1} {gate.src2} {gate.name}",
            *_BLIF_COVERS[gate.kind]]


def _blif_buffer_block(src: str, name: str) -> list[str]:
    return [f".names {src} {name}", "1 1"]


def export_blif(n: FsmNetlist | GateNetlist, model_name: str | None = None) -> str:
    """Emit the netlist in the Berkeley logic interchange format.

    NAND is the two-row cover ``0- 1`` / ``-0 1``, NOR the single row
    ``00 1``; every declared output gets an explicit buffer block, and
    latches are written ``.latch <data> <state> re clk <init>``.
    """
    if isinstance(n, FsmNetlist):
        name = model_name or n.name
        lines = [f".model {name}"]
        lines.append(".inputs " + " ".join(n.inputs) if n.inputs else ".inputs")
        lines.append(".outputs " + " ".join(n.outputs))
        for latch in n.latches:
            lines.append(f".latch {latch.data} {latch.output} re clk {latch.init}")
        for gate in n.core.gates:
            lines += _blif_gate_block(gate)
        for out_name, src in n.core.outputs[len(n.latches):]:
            lines += _blif_buffer_block(src, out_name)
    else:
        lines = [f".model {model_name or 'cgp'}"]
        lines.append(".inputs " + " ".join(n.inputs) if n.inputs else ".inputs")
        lines.append(".outputs " + " ".join(n.output_names))
        for gate in n.gates:
            lines += _blif_gate_block(gate)
        for out_name, src in n.outputs:
            lines += _blif_buffer_block(src, out_name)
    lines.append(".end")
    return "\n".join(lines) + "\n"


def parse_blif(text: str) -> FsmNetlist | GateNetlist:
    """Read back the subset of BLIF that :func:`export_blif` writes.

    Supported: one `.model`, single-line `.inputs`/`.outputs`, `.latch`
    with the re/clk form, and `.names` blocks that are NAND/NOR covers
    or single-literal buffers.  Latch lines must appear in state-bit
    order (bit 0 first), as written by the exporter.
    """
    model = "cgp"
    inputs: list[str] = []
    outputs: list[str] = []
    latches: list[tuple[str, str, int]] = []
    blocks: list[tuple[list[str], list[str]]] = []  # (signals, cover rows)
    current: tuple[list[str], list[str]] | None = None
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise BlifFormatError(f"line {lineno}: content after .end")
        if line.endswith("\\"):
            raise BlifFormatError(f"line {lineno}: continuation lines unsupported")
        tokens = line.split()
        if tokens[0].startswith("."):
            current = None
            key = tokens[0]
            if key == ".model":
                model = tokens[1] if len(tokens) > 1 else model
            elif key == ".inputs":
                inputs += tokens[1:]
            elif key == ".outputs":
                outputs += tokens[1:]
            elif key == ".latch":
                if len(tokens) != 6 or tokens[3] != "re" or tokens[5] not in "01":
                    raise BlifFormatError(
                        f"line {lineno}: expected '.latch d q re clk 0|1'"
                    )
                latches.append((tokens[1], tokens[2], int(tokens[5])))
            elif key == ".names":
                if len(tokens) not in (3, 4):
                    raise BlifFormatError(
                        f"line {lineno}: only 1- and 2-input .names supported"
                    )
                current = (tokens[1:], [])
                blocks.append(current)
            elif key == ".end":
                ended = True
            else:
                raise BlifFormatError(f"line {lineno}: unsupported {key!r}")
        else:
            if current is None:
                raise BlifFormatError(f"line {lineno}: cover row outside .names")
            current[1].append(" ".join(tokens))

    gates: list[Gate] = []
    bindings: dict[str, str] = {}
    for signals, rows in blocks:
        target = signals[-1]
        if len(signals) == 2:
            if rows != ["1 1"]:
                raise BlifFormatError(f"{target}: unsupported buffer cover {rows}")
            bindings[target] = signals[0]
            continue
        cover = tuple(sorted(rows))
        if cover == tuple(sorted(_BLIF_COVERS["NAND"])):
            kind = "NAND"
        elif cover == _BLIF_COVERS["NOR"]:
            kind = "NOR"
        else:
            raise BlifFormatError(f"{target}: cover {rows} is neither NAND nor NOR")
        gates.append(Gate(target, kind, signals[0], signals[1]))

    def bound(name: str) -> tuple[str, str]:
        if name in bindings:
            return (name, bindings[name])
        return (name, name)  # directly driven by a gate of the same name

    if not latches:
        core = GateNetlist(
            inputs=tuple(inputs),
            gates=tuple(gates),
            outputs=tuple(bound(name) for name in outputs),
        )
        return core

    state_nets = [q for _, q, _ in latches]
    core = GateNetlist(
        inputs=tuple(inputs) + tuple(reversed(state_nets)),
        gates=tuple(gates),
        outputs=tuple((f"ns{j}", d) for j, (d, _, _) in enumerate(latches))
        + tuple(bound(name) for name in outputs),
    )
    return FsmNetlist(
        name=model,
        core=core,
        latches=tuple(Latch(d, q, init) for d, q, init in latches),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
    )


# --------------------------------------------------------------------------
# DOT

_DOT_SHAPES = {"NAND": "ellipse", "NOR": "hexagon"}


def export_dot(n: FsmNetlist | GateNetlist, graph_name: str | None = None) -> str:
    """Render the netlist as a graphviz digraph (structure only, no layout)."""
    if isinstance(n, FsmNetlist):
        name = graph_name or n.name
        core, latches = n.core, n.latches
        inputs, outputs = n.inputs, list(n.core.outputs[len(latches):])
    else:
        name = graph_name or "cgp"
        core, latches = n, ()
        inputs, outputs = n.inputs, list(n.outputs)

    lines = [f'digraph "{name}" {{', "  rankdir=LR;"]
    for net in inputs:
        lines.append(f'  "{net}" [shape=circle];')
    for latch in latches:
        lines.append(f'  "{latch.output}" [shape=box,label="{latch.output} (dff init {latch.init})"];')
    for gate in core.gates:
        shape = _DOT_SHAPES[gate.kind]
        lines.append(f'  "{gate.name}" [shape={shape},label="{gate.name} {gate.kind}"];')
    for out_name, _ in outputs:
        lines.append(f'  "{out_name}" [shape=doublecircle];')
    for gate in core.gates:
        lines.append(f'  "{gate.src1}" -> "{gate.name}";')
        lines.append(f'  "{gate.src2}" -> "{gate.name}";')
    for latch in latches:
        lines.append(f'  "{latch.data}" -> "{latch.output}" [style=dashed];')
    for out_name, src in outputs:
        lines.append(f'  "{src}" -> "{out_name}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def reduction_percent(baseline_gates: int, cgp_gates: int) -> float:
    """Percentage of gates removed relative to the baseline design.

    Reported to two decimals with the fraction truncated, not rounded:
    (23, 18) gives 21.73.
    """
    if baseline_gates <= 0:
        raise ValueError("baseline gate count must be positive")
    diff = baseline_gates - cgp_gates
    scaled = (10_000 * abs(diff)) // baseline_gates
    return scaled / 100.0 if diff >= 0 else -(scaled / 100.0)
