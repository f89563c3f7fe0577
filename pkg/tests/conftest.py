import pytest

from fsmevo import (
    CgpParams,
    EvolveConfig,
    build_truth_table,
    encode_states,
    evolve,
    load_benchmark,
)

# small complete machine used all over the unit tests: a controllable
# toggle (1 input, 2 states, output = entered state)
TOGGLE_KISS2 = """\
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


def table_for(name: str, scheme: str = "natural"):
    fsm = load_benchmark(name)
    enc = encode_states(fsm, scheme)
    return fsm, enc, build_truth_table(fsm, enc)


@pytest.fixture(scope="session")
def dk27():
    return load_benchmark("dk27")


@pytest.fixture(scope="session")
def dk27_table(dk27):
    return build_truth_table(dk27, encode_states(dk27))


@pytest.fixture(scope="session")
def solved_10101():
    """A solved detector run shared by netlist and CLI tests (sub-second)."""
    fsm, enc, tt = table_for("10101")
    params = CgpParams(tt.num_vars, tt.num_outs, 25, 10.0)
    rep = evolve(tt, params, EvolveConfig(lam=4, max_generations=5_000_000, seed=0))
    assert rep.solved
    return fsm, enc, tt, rep


@pytest.fixture(scope="session")
def solved_dk27(dk27, dk27_table):
    enc = encode_states(dk27)
    params = CgpParams(dk27_table.num_vars, dk27_table.num_outs, 25, 10.0)
    rep = evolve(
        dk27_table, params, EvolveConfig(lam=4, max_generations=5_000_000, seed=3)
    )
    assert rep.solved
    return dk27, enc, dk27_table, rep
