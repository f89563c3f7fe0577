#!/usr/bin/env python3
"""Evolve a NAND/NOR circuit for the dk27 machine.

One (1+4) run with a 25-node budget and a pinned seed: prints the
fitness trace as mismatches fall to zero, then the evolved program and
its cost against the two-level baseline design.
"""

import argparse

from fsmevo import (
    CgpParams,
    ESPRESSO_BASELINE_GATES,
    EvolveConfig,
    build_truth_table,
    encode_states,
    evolve,
    genotype_to_text,
    load_benchmark,
    reduction_percent,
)

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--seed", type=int, default=3)
parser.add_argument("--lam", type=int, default=4)
parser.add_argument("--m", type=int, default=25, help="node budget")
args = parser.parse_args()

fsm = load_benchmark("dk27")
enc = encode_states(fsm)
tt = build_truth_table(fsm, enc)
print(f"dk27: {fsm.num_states} states -> {enc.width} state bits, "
      f"table {tt.num_rows} x {tt.num_outs} ({tt.total_care()} cared bits)")

params = CgpParams(
    num_inputs=tt.num_vars,
    num_outputs=tt.num_outs,
    num_nodes=args.m,
    mutation_rate=10.0,
)
print(f"genotype: {params.gene_count} genes, "
      f"{params.mutations_per_offspring} mutations per offspring")

cfg = EvolveConfig(lam=args.lam, max_generations=5_000_000, seed=args.seed)
report = evolve(tt, params, cfg)

print(f"\nfitness trace (generation, mismatches, rmse):")
trace = report.best_trace
shown = trace if len(trace) <= 12 else trace[:6] + trace[-6:]
for i, (gen, mm, rmse) in enumerate(shown):
    if len(trace) > 12 and i == 6:
        print(f"  ... {len(trace) - 12} improvements omitted")
    print(f"  gen {gen:>9,}  mismatches {mm:3d}  rmse {rmse:.4f}")

print(f"\nsolved: {report.solved} after {report.generations_used:,} "
      f"generations ({report.evaluations:,} evaluations, "
      f"{report.wall_time:.2f} s)")
print(f"active gates: {report.active_nodes} of {args.m} "
      f"(the rest of the genotype is non-coding drift material)")

baseline = ESPRESSO_BASELINE_GATES["dk27"]
print(f"baseline two-level design: {baseline} gates; "
      f"reduction {reduction_percent(baseline, report.active_nodes):.2f}%")

print("\nevolved genotype (portable text form):")
print(genotype_to_text(report.final_genotype), end="")
