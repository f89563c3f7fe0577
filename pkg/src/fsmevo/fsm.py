"""KISS2 front end: parse FSM descriptions, assign state codes, and expand
them into the combinational truth table a synthesizer has to realise.

Accepted KISS2 grammar (the MCNC benchmark interchange format)::

    .i N                         number of primary inputs
    .o N                         number of primary outputs
    .s N                         number of states (optional, checked)
    .p N                         number of transition lines (optional, advisory)
    .r STATE                     reset state (optional)
    .e                           optional terminator
    <in_cube> <cur> <next> <out_cube>

``#`` starts a comment.  Cubes are strings over ``{0,1,-}``.  States are
collected in first-appearance order; without ``.r`` the first-appearing
state is the reset state.  A declared ``.p`` that disagrees with the body
only warns, because distributed benchmark files are inconsistent about it.

Bit conventions shared by every tool in this package:

* truth-table row index r encodes one input assignment: the primary
  inputs occupy the most significant bits in declaration order, the
  current-state bits the least significant (state-code bit j = row bit j)
* output columns hold the next-state bits first (code bit j = column j),
  then the primary outputs in declaration order
* rows whose state bits decode to no encoded state, and (state, input)
  pairs not covered by any transition, are fully don't-care (care = 0)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

import numpy as np


class Kiss2Error(ValueError):
    """Raised for malformed or inconsistent KISS2 input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EncodingError(ValueError):
    """Raised for invalid state encodings."""


@dataclass(frozen=True)
class Transition:
    input_cube: str
    current: int
    next: int
    output_cube: str


@dataclass(frozen=True)
class Fsm:
    """A symbolic Mealy/Moore machine over cube-specified transitions."""

    name: str
    num_inputs: int
    num_outputs: int
    states: tuple[str, ...]
    reset_state: int
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise Kiss2Error("machine declares no states")
        if not 0 <= self.reset_state < n:
            raise Kiss2Error(f"reset state index {self.reset_state} out of range")
        for t in self.transitions:
            if not 0 <= t.current < n or not 0 <= t.next < n:
                raise Kiss2Error("transition references an undeclared state")
            if len(t.input_cube) != self.num_inputs:
                raise Kiss2Error(
                    f"input cube {t.input_cube!r} is not {self.num_inputs} wide"
                )
            if len(t.output_cube) != self.num_outputs:
                raise Kiss2Error(
                    f"output cube {t.output_cube!r} is not {self.num_outputs} wide"
                )
        _check_deterministic(self)

    @property
    def num_states(self) -> int:
        return len(self.states)


def _cubes_overlap(a: str, b: str) -> bool:
    return all(x == "-" or y == "-" or x == y for x, y in zip(a, b))


def _check_deterministic(fsm: Fsm) -> None:
    """Reject transition pairs that overlap but disagree.

    Two transitions from the same state may cover common input minterms
    only if they agree on the next state and on every output bit both of
    them specify.
    """
    by_state: dict[int, list[Transition]] = {}
    for t in fsm.transitions:
        by_state.setdefault(t.current, []).append(t)
    for ts in by_state.values():
        for i, a in enumerate(ts):
            for b in ts[i + 1 :]:
                if not _cubes_overlap(a.input_cube, b.input_cube):
                    continue
                if a.next != b.next:
                    raise Kiss2Error(
                        f"state {fsm.states[a.current]!r}: cubes "
                        f"{a.input_cube!r} and {b.input_cube!r} overlap with "
                        f"different next states"
                    )
                for x, y in zip(a.output_cube, b.output_cube):
                    if x != "-" and y != "-" and x != y:
                        raise Kiss2Error(
                            f"state {fsm.states[a.current]!r}: cubes "
                            f"{a.input_cube!r} and {b.input_cube!r} overlap "
                            f"with conflicting outputs"
                        )


def parse_kiss2(text: str, name: str = "fsm") -> Fsm:
    """Parse a KISS2 description into a validated :class:`Fsm`."""
    decl: dict[str, int] = {}
    reset_name: str | None = None
    states: list[str] = []
    state_index: dict[str, int] = {}
    raw: list[tuple[str, str, str, str, int]] = []
    terminated = False

    def intern(state: str) -> int:
        if state not in state_index:
            state_index[state] = len(states)
            states.append(state)
        return state_index[state]

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if terminated:
            raise Kiss2Error("content after .e terminator", lineno)
        tokens = line.split()
        if tokens[0].startswith("."):
            key = tokens[0]
            if key == ".e":
                terminated = True
                continue
            if key == ".r":
                if len(tokens) != 2:
                    raise Kiss2Error(".r expects one state name", lineno)
                reset_name = tokens[1]
                continue
            if key in (".i", ".o", ".s", ".p"):
                if len(tokens) != 2 or not tokens[1].lstrip("-").isdigit():
                    raise Kiss2Error(f"{key} expects one integer", lineno)
                value = int(tokens[1])
                if value <= 0:
                    raise Kiss2Error(f"{key} must be positive", lineno)
                decl[key] = value
                continue
            raise Kiss2Error(f"unknown directive {key!r}", lineno)
        if len(tokens) != 4:
            raise Kiss2Error(
                f"expected 'input current next output', got {line!r}", lineno
            )
        in_cube, cur, nxt, out_cube = tokens
        for cube, which, key in ((in_cube, "input", ".i"), (out_cube, "output", ".o")):
            if any(c not in "01-" for c in cube):
                raise Kiss2Error(f"bad {which} cube {cube!r}", lineno)
            if key in decl and len(cube) != decl[key]:
                raise Kiss2Error(
                    f"{which} cube {cube!r} does not match {key} {decl[key]}", lineno
                )
        raw.append((in_cube, cur, nxt, out_cube, lineno))

    if not raw:
        raise Kiss2Error("no transitions found")

    n_pi = decl.get(".i", len(raw[0][0]))
    n_po = decl.get(".o", len(raw[0][3]))
    transitions = []
    for in_cube, cur, nxt, out_cube, lineno in raw:
        if len(in_cube) != n_pi:
            raise Kiss2Error(f"input cube {in_cube!r} is not {n_pi} wide", lineno)
        if len(out_cube) != n_po:
            raise Kiss2Error(f"output cube {out_cube!r} is not {n_po} wide", lineno)
        transitions.append(
            Transition(in_cube, intern(cur), intern(nxt), out_cube)
        )

    if ".s" in decl and decl[".s"] != len(states):
        raise Kiss2Error(
            f".s declares {decl['.s']} states but the body names {len(states)}"
        )
    if ".p" in decl and decl[".p"] != len(transitions):
        warnings.warn(
            f"{name}: .p declares {decl['.p']} transitions, body has "
            f"{len(transitions)}",
            stacklevel=2,
        )
    if reset_name is not None:
        if reset_name not in state_index:
            raise Kiss2Error(f".r names unknown state {reset_name!r}")
        reset = state_index[reset_name]
    else:
        reset = 0

    return Fsm(
        name=name,
        num_inputs=n_pi,
        num_outputs=n_po,
        states=tuple(states),
        reset_state=reset,
        transitions=tuple(transitions),
    )


# --------------------------------------------------------------------------
# State encoding

ENCODING_SCHEMES = ("natural", "gray")


@dataclass(frozen=True)
class StateEncoding:
    """Injective map from state index to a code of `width` bits."""

    width: int
    codes: tuple[int, ...]

    def __post_init__(self):
        if self.width < 1:
            raise EncodingError("code width must be at least 1")
        if len(set(self.codes)) != len(self.codes):
            raise EncodingError("state codes are not injective")
        for c in self.codes:
            if not 0 <= c < (1 << self.width):
                raise EncodingError(f"code {c} does not fit in {self.width} bits")

    def code_bits(self, state: int) -> str:
        """Code of `state` as an MSB-first bit string."""
        return format(self.codes[state], f"0{self.width}b")

    def decode(self, code: int) -> int | None:
        """State index for `code`, or None for an unused code word."""
        try:
            return self.codes.index(code)
        except ValueError:
            return None


def code_width(num_states: int) -> int:
    return max(1, math.ceil(math.log2(num_states))) if num_states > 1 else 1


def encode_states(fsm: Fsm, scheme: str | Mapping[str, str] = "natural") -> StateEncoding:
    """Assign binary codes to the machine's states.

    `scheme` is ``"natural"`` (state i gets value i), ``"gray"`` (reflected
    Gray sequence), or an explicit mapping from state name to an MSB-first
    bit string of exactly the minimal width.
    """
    width = code_width(fsm.num_states)
    if isinstance(scheme, str):
        if scheme == "natural":
            codes = tuple(range(fsm.num_states))
        elif scheme == "gray":
            codes = tuple(i ^ (i >> 1) for i in range(fsm.num_states))
        else:
            raise EncodingError(f"unknown encoding scheme {scheme!r}")
        return StateEncoding(width, codes)
    missing = [s for s in fsm.states if s not in scheme]
    if missing:
        raise EncodingError(f"explicit map misses states: {missing}")
    codes = []
    for s in fsm.states:
        bits = scheme[s]
        if len(bits) != width or any(c not in "01" for c in bits):
            raise EncodingError(
                f"code {bits!r} for state {s!r} is not {width} binary digits"
            )
        codes.append(int(bits, 2))
    return StateEncoding(width, tuple(codes))


# --------------------------------------------------------------------------
# Truth table expansion

@dataclass(frozen=True)
class TruthTable:
    """Fully expanded combinational specification with per-bit care mask.

    `desired` and `care` are uint8 matrices of shape (2**num_vars,
    num_outs).  A care of 0 marks a bit the specification leaves free.
    """

    num_vars: int
    num_outs: int
    desired: np.ndarray
    care: np.ndarray

    @property
    def num_rows(self) -> int:
        return 1 << self.num_vars

    def total_care(self) -> int:
        return int(self.care.sum())


def _cube_matches(cube: str, value: int, width: int) -> bool:
    # declared input k is row bit (width - 1 - k)
    for k, c in enumerate(cube):
        if c == "-":
            continue
        if int(c) != (value >> (width - 1 - k)) & 1:
            return False
    return True


def build_truth_table(fsm: Fsm, enc: StateEncoding) -> TruthTable:
    """Expand the machine into the table the evolved circuit must realise.

    Output columns 0..width-1 carry the next-state code bits, the rest the
    primary outputs.  Unused state codes and uncovered (state, input)
    pairs stay fully don't-care; '-' output bits stay don't-care as well.
    """
    n_pi, n_s = fsm.num_inputs, enc.width
    num_vars = n_pi + n_s
    num_outs = n_s + fsm.num_outputs
    rows = 1 << num_vars
    desired = np.zeros((rows, num_outs), dtype=np.uint8)
    care = np.zeros((rows, num_outs), dtype=np.uint8)

    by_state: dict[int, list[Transition]] = {}
    for t in fsm.transitions:
        by_state.setdefault(t.current, []).append(t)

    for state, ts in by_state.items():
        code = enc.codes[state]
        for pi in range(1 << n_pi):
            row = (pi << n_s) | code
            for t in ts:
                if not _cube_matches(t.input_cube, pi, n_pi):
                    continue
                next_code = enc.codes[t.next]
                for j in range(n_s):
                    desired[row, j] = (next_code >> j) & 1
                    care[row, j] = 1
                for k, c in enumerate(t.output_cube):
                    if c != "-":
                        desired[row, n_s + k] = int(c)
                        care[row, n_s + k] = 1
    return TruthTable(num_vars, num_outs, desired, care)


def export_pla(tt: TruthTable) -> str:
    """Emit the table as an espresso-compatible minterm-level PLA.

    One line per row that carries at least one cared bit; inputs are the
    full binary row index (MSB first), outputs use '-' on don't-care
    bits.  Fully unconstrained rows are omitted.
    """
    body = []
    for r in range(tt.num_rows):
        if not tt.care[r].any():
            continue
        outs = "".join(
            str(tt.desired[r, o]) if tt.care[r, o] else "-"
            for o in range(tt.num_outs)
        )
        body.append(f"{r:0{tt.num_vars}b} {outs}")
    lines = [f".i {tt.num_vars}", f".o {tt.num_outs}", f".p {len(body)}"]
    lines += body
    lines.append(".e")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Bundled benchmarks

#: Gate counts of the two-level espresso + universal-gate-mapping baseline
#: designs, used for reduction reporting.
ESPRESSO_BASELINE_GATES = {
    "dk27": 23,
    "lion9": 25,
    "s8": 31,
    "beecount": 38,
    "bbara": 62,
    "dk14": 124,
    "10101": 23,
    "0001000": 27,
    "01100110": 30,
    "12-0s-then-1": 42,
}

#: Moore-style sequence detectors available through :func:`load_builtin`,
#: mapped to the bit pattern they match.
BUILTIN_DETECTORS = {
    "10101": "10101",
    "0001000": "0001000",
    "01100110": "01100110",
    "12-0s-then-1": "0000000000001",
}

_EXPECTED_DETECTOR_STATES = {
    "10101": 6,
    "0001000": 8,
    "01100110": 9,
    "12-0s-then-1": 14,
}

_BUNDLED_FILES = ("dk27",)


def _prefix_function(pattern: str) -> list[int]:
    pi = [0] * len(pattern)
    k = 0
    for i in range(1, len(pattern)):
        while k > 0 and pattern[i] != pattern[k]:
            k = pi[k - 1]
        if pattern[i] == pattern[k]:
            k += 1
        pi[i] = k
    return pi


def _detector_step(pattern: str, pi: list[int], state: int, symbol: str) -> int:
    k = pi[-1] if state == len(pattern) else state
    while True:
        if pattern[k] == symbol:
            return k + 1
        if k == 0:
            return 0
        k = pi[k - 1]


def load_builtin(name: str) -> Fsm:
    """Return one of the bundled overlapping sequence detector machines.

    The detectors are Moore machines with one state per matched prefix
    length; each transition's output bit is the output of the state it
    enters (1 exactly when the step completes a full pattern match).
    """
    if name not in BUILTIN_DETECTORS:
        known = ", ".join(sorted(BUILTIN_DETECTORS))
        raise KeyError(f"unknown builtin {name!r} (expected one of: {known})")
    pattern = BUILTIN_DETECTORS[name]
    length = len(pattern)
    pi = _prefix_function(pattern)
    transitions = []
    for state in range(length + 1):
        for symbol in "01":
            nxt = _detector_step(pattern, pi, state, symbol)
            out = "1" if nxt == length else "0"
            transitions.append(Transition(symbol, state, nxt, out))
    fsm = Fsm(
        name=name,
        num_inputs=1,
        num_outputs=1,
        states=tuple(f"q{i}" for i in range(length + 1)),
        reset_state=0,
        transitions=tuple(transitions),
    )
    expected = _EXPECTED_DETECTOR_STATES[name]
    if fsm.num_states != expected:
        raise AssertionError(
            f"builtin {name!r} has {fsm.num_states} states, expected {expected}"
        )
    return fsm


def load_benchmark(name: str) -> Fsm:
    """Load a bundled benchmark: a packaged KISS2 file or a builtin detector."""
    if name in BUILTIN_DETECTORS:
        return load_builtin(name)
    if name in _BUNDLED_FILES:
        text = (
            resources.files("fsmevo").joinpath(f"data/{name}.kiss2").read_text()
        )
        return parse_kiss2(text, name=name)
    known = ", ".join(sorted((*BUILTIN_DETECTORS, *_BUNDLED_FILES)))
    raise KeyError(f"unknown benchmark {name!r} (expected one of: {known})")


def benchmark_names() -> tuple[str, ...]:
    return tuple(sorted((*BUILTIN_DETECTORS, *_BUNDLED_FILES)))
