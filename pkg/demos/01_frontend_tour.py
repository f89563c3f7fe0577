#!/usr/bin/env python3
"""Front end tour: from a KISS2 machine to the truth table a circuit
must realise.

Walks a tiny hand-written machine and the bundled dk27 benchmark
through parsing, state encoding, table expansion, and PLA export.
"""

from fsmevo import (
    build_truth_table,
    encode_states,
    export_pla,
    load_benchmark,
    parse_kiss2,
)

# A controllable toggle: 1 input, 2 states, output mirrors the state we
# are entering.  Four fully specified transitions.
TOGGLE = """\
.i 1
.o 1
.s 2
.r A
0 A A 0
1 A B 1
0 B A 0
1 B B 1
.e
"""


def show_machine(fsm):
    print(f"machine {fsm.name!r}: {fsm.num_states} states, "
          f"{fsm.num_inputs} input(s), {fsm.num_outputs} output(s), "
          f"reset {fsm.states[fsm.reset_state]!r}")
    for t in fsm.transitions[:6]:
        print(f"  {t.input_cube} {fsm.states[t.current]:>7} "
              f"-> {fsm.states[t.next]:<7} {t.output_cube}")
    if len(fsm.transitions) > 6:
        print(f"  ... {len(fsm.transitions) - 6} more")


def show_table(tt):
    print(f"table: {tt.num_vars} variables -> {tt.num_outs} outputs, "
          f"{tt.num_rows} rows, {tt.total_care()} cared bits")
    for r in range(tt.num_rows):
        desired = "".join(
            str(tt.desired[r, o]) if tt.care[r, o] else "-"
            for o in range(tt.num_outs)
        )
        print(f"  row {r:2d} ({r:0{tt.num_vars}b}): {desired}")


print("=== toggle machine ===")
toggle = parse_kiss2(TOGGLE, name="toggle")
show_machine(toggle)

enc = encode_states(toggle)
print("state codes:")
for i, state in enumerate(toggle.states):
    print(f"  {state} -> {enc.code_bits(i)}")

# Row bits: the primary input is the high bit, the state bit the low bit.
# Output columns: next-state bit first, then the primary output.
tt = build_truth_table(toggle, enc)
show_table(tt)

print()
print("=== dk27 benchmark ===")
dk27 = load_benchmark("dk27")
show_machine(dk27)

for scheme in ("natural", "gray"):
    enc = encode_states(dk27, scheme)
    codes = "  ".join(
        f"{s}={enc.code_bits(i)}" for i, s in enumerate(dk27.states)
    )
    print(f"{scheme:>7}: {codes}")

tt = build_truth_table(dk27, encode_states(dk27))
print(f"dk27 expands to {tt.num_rows} rows x {tt.num_outs} outputs "
      f"({tt.total_care()} cared bits; the rest are free)")

print()
print("=== PLA export (espresso input format) ===")
print(export_pla(tt), end="")
