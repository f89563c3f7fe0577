"""Evolve minimal NAND/NOR gate circuits for finite state machines.

Pipeline: parse a KISS2 machine, assign state codes, expand the
combinational truth table, search for a matching circuit with
single-row Cartesian genetic programming under a (1+lambda) strategy,
then verify, assemble with D flip-flops, and export BLIF/DOT.
"""

from .cgp import (
    ARITY,
    FUNCTIONS,
    NAND,
    NOR,
    CgpParams,
    Genotype,
    GenotypeFormatError,
    GeneViolation,
    Phenotype,
    decode,
    genotype_from_text,
    genotype_to_text,
    mutate,
    node_eval,
    random_genotype,
    validate_genotype,
)
from .evaluate import (
    Fitness,
    PackedTable,
    evaluate,
    evaluate_scalar,
    pack_table,
)
from .evolve import (
    AggregateRow,
    EvolutionReport,
    EvolveConfig,
    SweepCell,
    SweepRow,
    aggregate_rows,
    evolve,
    run_sweep,
    select_parent,
    write_aggregate_csv,
    write_detail_csv,
)
from .fsm import (
    ENCODING_SCHEMES,
    ESPRESSO_BASELINE_GATES,
    EncodingError,
    Fsm,
    Kiss2Error,
    StateEncoding,
    Transition,
    TruthTable,
    benchmark_names,
    build_truth_table,
    code_width,
    encode_states,
    export_pla,
    load_benchmark,
    load_builtin,
    parse_kiss2,
)
from .netlist import (
    BlifFormatError,
    CosimReport,
    FsmNetlist,
    Gate,
    GateNetlist,
    Latch,
    NetlistError,
    VerificationReport,
    assemble_fsm,
    export_blif,
    export_dot,
    fsm_signal_names,
    interpret,
    parse_blif,
    reduction_percent,
    simulate_fsm,
    to_netlist,
    verify_netlist,
)
from .rng import Xoshiro256StarStar, splitmix64

__version__ = "0.1.0"
