"""Command-line interface.

Subcommands: synth (evolve a machine into gates), sweep (grid of runs to
CSV), verify (netlist vs specification), sim (gate-level co-simulation),
encode (truth table / PLA export), export (genotype text to BLIF/DOT).

Exit codes are a stable contract: 0 solved or pass, 1 input error,
2 generation budget exhausted, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .cgp import CgpParams, GenotypeFormatError, decode, genotype_from_text, genotype_to_text
from .evolve import (
    EvolveConfig,
    SweepCell,
    SweepRow,
    aggregate_rows,
    evolve,
    run_sweep,
    write_aggregate_csv,
    write_detail_csv,
)
from .fsm import (
    ENCODING_SCHEMES,
    ESPRESSO_BASELINE_GATES,
    EncodingError,
    Kiss2Error,
    benchmark_names,
    build_truth_table,
    encode_states,
    export_pla,
    load_benchmark,
    parse_kiss2,
)
from .netlist import (
    TRANSISTORS_PER_GATE,
    BlifFormatError,
    FsmNetlist,
    NetlistError,
    assemble_fsm,
    export_blif,
    export_dot,
    fsm_signal_names,
    parse_blif,
    reduction_percent,
    simulate_fsm,
    to_netlist,
    verify_netlist,
)
from .rng import Xoshiro256StarStar

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_VERIFY = 3

_INPUT_ERRORS = (
    Kiss2Error,
    EncodingError,
    GenotypeFormatError,
    BlifFormatError,
    NetlistError,
    OSError,
    KeyError,
    ValueError,
)


def _derive_seed() -> int:
    seed = time.time_ns() & ((1 << 63) - 1)
    return seed or 1


def _load_fsm(name_or_path: str):
    """Bundled benchmark name, or a KISS2 file path."""
    if name_or_path in benchmark_names():
        return load_benchmark(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise FileNotFoundError(
            f"{name_or_path!r} is neither a file nor one of: "
            + ", ".join(benchmark_names())
        )
    return parse_kiss2(path.read_text(), name=path.stem)


def _machine_context(name_or_path: str, scheme: str):
    fsm = _load_fsm(name_or_path)
    enc = encode_states(fsm, scheme)
    tt = build_truth_table(fsm, enc)
    return fsm, enc, tt


def _run_one(work):
    tt, params, cfg, engine = work
    return evolve(tt, params, cfg, engine=engine)


def _best_run(reports):
    """Best-of-N: fewest gates among solved runs, else fewest mismatches."""
    solved = [r for r in reports if r.solved]
    if solved:
        return min(solved, key=lambda r: (r.active_nodes, r.generations_used))
    return min(reports, key=lambda r: r.final_fitness.mismatches)


def cmd_synth(args) -> int:
    fsm, enc, tt = _machine_context(args.machine, args.encoding)
    params = CgpParams(
        num_inputs=tt.num_vars,
        num_outputs=tt.num_outs,
        num_nodes=args.m,
        mutation_rate=args.mu,
        strict_mutation=args.strict_mutation,
    )
    base_seed = args.seed if args.seed != 0 else _derive_seed()
    seeds = [base_seed + i for i in range(args.repeat)]
    work = [
        (tt, params, EvolveConfig(
            lam=args.lam, max_generations=args.max_generations, seed=s,
        ), args.engine)
        for s in seeds
    ]
    if args.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, work))
    else:
        reports = [_run_one(w) for w in work]
    best = _best_run(reports)

    in_names, out_names = fsm_signal_names(fsm.num_inputs, enc.width, fsm.num_outputs)
    net = to_netlist(decode(best.final_genotype), best.final_genotype,
                     in_names, out_names)
    verdict = verify_netlist(net, tt)
    machine = assemble_fsm(net, enc, fsm)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.name or fsm.name
    (out_dir / f"{stem}.cgp.txt").write_text(genotype_to_text(best.final_genotype))
    (out_dir / f"{stem}.blif").write_text(export_blif(machine))
    (out_dir / f"{stem}.dot").write_text(export_dot(machine))

    lines = [
        f"benchmark: {fsm.name}",
        f"states: {fsm.num_states}  encoding: {args.encoding}  state_bits: {enc.width}",
        f"table: {tt.num_rows} rows x {tt.num_outs} outputs, {tt.total_care()} cared bits",
        f"lambda: {args.lam}  m: {args.m}  mu_r: {args.mu:g}  seed: {best.seed}",
        f"solved: {'yes' if best.solved else 'no'}"
        + ("" if best.solved else
           f"  (mismatches: {best.final_fitness.mismatches}, "
           f"rmse: {best.final_fitness.rmse:.4f})"),
        f"generations: {best.generations_used}  evaluations: {best.evaluations}",
        f"gates: {best.active_nodes}"
        + _baseline_note(fsm.name, best.active_nodes),
        f"transistor_estimate: {best.active_nodes * TRANSISTORS_PER_GATE}",
        f"verification: {'PASS' if verdict.passed else 'FAIL'}",
        f"wall_time_s: {best.wall_time:.3f}",
    ]
    if args.repeat > 1:
        solved_n = sum(r.solved for r in reports)
        lines.insert(5, f"repeat: {args.repeat} runs, {solved_n} solved, "
                        f"seeds {seeds[0]}..{seeds[-1]}")
    report_text = "\n".join(lines) + "\n"
    (out_dir / f"{stem}.report.txt").write_text(report_text)
    row = SweepRow(
        benchmark=fsm.name, lam=args.lam, num_nodes=args.m,
        mutation_rate=args.mu, seed=best.seed, solved=best.solved,
        generations=best.generations_used, evaluations=best.evaluations,
        active_nodes=best.active_nodes, wall_time_s=best.wall_time,
    )
    write_detail_csv(out_dir / f"{stem}.csv", [row])
    print(report_text, end="")

    if best.solved and not verdict.passed:
        print("netlist disagrees with the truth table", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK if best.solved else EXIT_BUDGET


def _baseline_note(name: str, gates: int) -> str:
    baseline = ESPRESSO_BASELINE_GATES.get(name)
    if baseline is None:
        return ""
    return (f"  (baseline {baseline}, "
            f"reduction {reduction_percent(baseline, gates):.2f}%)")


def _parse_grid(path: Path) -> list[tuple[str, int, int, float, int]]:
    import csv as _csv

    with open(path, newline="") as fh:
        reader = _csv.DictReader(fh)
        required = {"benchmark", "lambda", "m", "mu_r", "seeds"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(
                f"grid file needs columns benchmark,lambda,m,mu_r,seeds; "
                f"got {reader.fieldnames}"
            )
        rows = []
        for i, rec in enumerate(reader, start=2):
            try:
                rows.append((
                    rec["benchmark"].strip(),
                    int(rec["lambda"]),
                    int(rec["m"]),
                    float(rec["mu_r"]),
                    int(rec["seeds"]),
                ))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"grid line {i}: {exc}") from exc
    if not rows:
        raise ValueError("grid file lists no runs")
    return rows


def cmd_sweep(args) -> int:
    grid = _parse_grid(Path(args.grid))
    tables = {}
    cells = []
    for name, lam, m, mu, count in grid:
        if count < 1:
            raise ValueError(f"{name}: seed count must be at least 1")
        if name not in tables:
            _, _, tables[name] = _machine_context(name, args.encoding)
        seeds = tuple(range(args.seed_base, args.seed_base + count))
        cells.append(SweepCell(name, lam, m, mu, seeds))
    rows = run_sweep(
        tables, cells,
        max_generations=args.max_generations,
        jobs=args.jobs,
        engine=args.engine,
    )
    write_detail_csv(args.out_detail, rows)
    write_aggregate_csv(args.out_aggregate, aggregate_rows(rows))
    solved = sum(r.solved for r in rows)
    print(f"{len(rows)} runs, {solved} solved -> "
          f"{args.out_detail}, {args.out_aggregate}")
    return EXIT_OK


def _core_netlist(parsed):
    return parsed.core if isinstance(parsed, FsmNetlist) else parsed


def cmd_verify(args) -> int:
    parsed = parse_blif(Path(args.netlist).read_text())
    _, _, tt = _machine_context(args.machine, args.encoding)
    verdict = verify_netlist(_core_netlist(parsed), tt)
    print(verdict.text(), end="")
    return EXIT_OK if verdict.passed else EXIT_VERIFY


def _parse_stimulus(args, num_inputs: int) -> list[str]:
    if args.random is not None:
        seed = args.seed if args.seed != 0 else _derive_seed()
        rng = Xoshiro256StarStar(seed)
        print(f"random stimulus seed: {seed}")
        return [
            "".join(str(rng.randbelow(2)) for _ in range(num_inputs))
            for _ in range(args.random)
        ]
    text = args.stimulus
    if text is None:
        raise ValueError("supply --stimulus or --random N")
    if "," in text:
        return [v.strip() for v in text.split(",") if v.strip()]
    if num_inputs == 1:
        return list(text.strip())
    raise ValueError("multi-input machines need comma-separated vectors")


def cmd_sim(args) -> int:
    parsed = parse_blif(Path(args.netlist).read_text())
    if not isinstance(parsed, FsmNetlist):
        raise ValueError("simulation needs a sequential netlist (with latches)")
    fsm, enc, _ = _machine_context(args.machine, args.encoding)
    stimulus = _parse_stimulus(args, fsm.num_inputs)
    report = simulate_fsm(parsed, fsm, enc, stimulus)
    print(report.text(), end="")
    print(f"cycles: {report.cycles}  compared_bits: {report.compared_bits}  "
          f"skipped: {len(report.skipped_cycles)}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_encode(args) -> int:
    fsm, enc, tt = _machine_context(args.machine, args.encoding)
    pla = export_pla(tt)
    if args.pla:
        Path(args.pla).write_text(pla)
    else:
        print(pla, end="")
    print(f"# {fsm.name}: {fsm.num_states} states, {enc.width} state bits, "
          f"{tt.num_rows} rows, {tt.total_care()} cared bits", file=sys.stderr)
    for i, state in enumerate(fsm.states):
        print(f"# {state} = {enc.code_bits(i)}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    g = genotype_from_text(Path(args.genotype).read_text())
    if args.machine:
        fsm, enc, tt = _machine_context(args.machine, args.encoding)
        in_names, out_names = fsm_signal_names(
            fsm.num_inputs, enc.width, fsm.num_outputs
        )
        net = to_netlist(decode(g), g, in_names, out_names)
        if len(net.inputs) != tt.num_vars or len(net.outputs) != tt.num_outs:
            raise ValueError("genotype shape does not match the machine")
        target = assemble_fsm(net, enc, fsm)
    else:
        target = to_netlist(decode(g), g)
    if args.blif:
        Path(args.blif).write_text(export_blif(target))
    if args.dot:
        Path(args.dot).write_text(export_dot(target))
    if not args.blif and not args.dot:
        print(export_blif(target), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsmevo",
        description="Evolve NAND/NOR gate circuits for finite state machines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_evolve: bool):
        p.add_argument("--encoding", choices=ENCODING_SCHEMES, default="natural",
                       help="state assignment scheme (default natural binary)")
        if with_evolve:
            p.add_argument("--max-generations", type=int, default=10_000_000)
            p.add_argument("--jobs", type=int, default=1,
                           help="worker processes for independent runs")
            p.add_argument("--engine", choices=("auto", "compiled", "python"),
                           default="auto", help="evolution loop implementation")

    p = sub.add_parser("synth", help="evolve a circuit for one machine")
    p.add_argument("machine", help="KISS2 file or bundled benchmark name")
    p.add_argument("--m", type=int, required=True,
                   help="CGP node budget (benchmark-specific, no default)")
    p.add_argument("--lambda", dest="lam", type=int, default=4,
                   help="offspring per generation (default 4)")
    p.add_argument("--mu", type=float, default=10.0,
                   help="mutation rate percent in [0.1, 100]; 3-10 is typical")
    p.add_argument("--seed", type=int, default=0,
                   help="64-bit seed; 0 derives one from the clock and echoes it")
    p.add_argument("--repeat", type=int, default=1,
                   help="run N seeds (seed..seed+N-1), keep the best")
    p.add_argument("--strict-mutation", action="store_true",
                   help="redraw mutations until the gene value changes")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default=None, help="artifact base name")
    common(p, with_evolve=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="run a benchmark/parameter grid to CSV")
    p.add_argument("grid", help="CSV with columns benchmark,lambda,m,mu_r,seeds")
    p.add_argument("--out-detail", default="sweep_detail.csv")
    p.add_argument("--out-aggregate", default="sweep_aggregate.csv")
    p.add_argument("--seed-base", type=int, default=0,
                   help="seeds run are base..base+count-1 per grid line")
    common(p, with_evolve=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check a BLIF netlist against a machine")
    p.add_argument("netlist")
    p.add_argument("machine")
    common(p, with_evolve=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sim", help="co-simulate a sequential netlist")
    p.add_argument("netlist")
    p.add_argument("machine")
    p.add_argument("--stimulus", default=None,
                   help="comma-separated input vectors, or a bit string "
                        "for single-input machines")
    p.add_argument("--random", type=int, default=None, metavar="N",
                   help="drive N random cycles instead")
    p.add_argument("--seed", type=int, default=0)
    common(p, with_evolve=False)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("encode", help="expand a machine into a PLA truth table")
    p.add_argument("machine")
    p.add_argument("--pla", default=None, help="output path (default stdout)")
    common(p, with_evolve=False)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("export", help="render saved genotype text as BLIF/DOT")
    p.add_argument("genotype")
    p.add_argument("--kiss2", dest="machine", default=None,
                   help="machine context: adds latches and port names")
    p.add_argument("--blif", default=None)
    p.add_argument("--dot", default=None)
    common(p, with_evolve=False)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mu", None) is not None and not 0.1 <= args.mu <= 100:
        print("error: --mu must be in [0.1, 100]", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
