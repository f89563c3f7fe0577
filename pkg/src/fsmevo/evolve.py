"""(1+lambda) evolutionary search over CGP genotypes, plus parameter sweeps.

One generation mutates the single parent into lambda offspring, evaluates
them all, and promotes the winner under the tie rules of
:func:`select_parent`.  The loop exists twice: a compiled kernel
(:mod:`fsmevo._kernel`) for long runs and a pure-Python twin built from
the public cgp/evaluate operations.  Both consume the random stream in
the same documented order (initial genes; per offspring the
position/value pairs of each mutation; one bounded draw only when
several offspring tie for best), so a run is bit-identical under either
engine.  The test suite holds them to that.
"""

from __future__ import annotations

import csv
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cgp import CgpParams, Genotype, decode, mutate, random_genotype
from .evaluate import Fitness, PackedTable, evaluate, evaluate_scalar, pack_table
from .fsm import TruthTable
from .rng import Xoshiro256StarStar

DETAIL_HEADER = (
    "benchmark", "lambda", "m", "mu_r", "seed", "solved",
    "generations", "evaluations", "active_nodes", "wall_time_s",
)
AGGREGATE_HEADER = (
    "benchmark", "lambda", "m", "mu_r",
    "median_generations", "min_nodes", "solve_rate",
)

# Stride-triggered trace samples are capped so a stride of 1 against the
# default budget cannot balloon the report.  Improvements always record.
_MAX_STRIDE_SAMPLES = 1_000_000


@dataclass(frozen=True)
class EvolveConfig:
    lam: int = 4
    max_generations: int = 10_000_000
    seed: int = 0
    target_mismatches: int = 0
    snapshot_stride: int = 0

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("need at least one offspring per generation")
        if self.max_generations < 1:
            raise ValueError("generation budget must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if self.target_mismatches < 0:
            raise ValueError("target mismatch count cannot be negative")
        if self.snapshot_stride < 0:
            raise ValueError("snapshot stride cannot be negative")


@dataclass(frozen=True)
class EvolutionReport:
    """Everything a run produced; pure function of its inputs except
    `wall_time`."""

    solved: bool
    generations_used: int
    evaluations: int
    best_trace: tuple[tuple[int, int, float], ...]
    final_genotype: Genotype
    final_fitness: Fitness
    active_nodes: int
    seed: int
    config: EvolveConfig
    wall_time: float


def _select_index(parent_mm: int, offspring_mm: Sequence[int],
                  rng: Xoshiro256StarStar) -> int:
    """Index of the winning offspring, or -1 when the parent survives.

    The parent survives only when strictly better than every offspring.
    Among tied-best offspring the choice is uniform, and the random
    stream is touched only when there is more than one of them.
    """
    best = min(offspring_mm)
    if best > parent_mm:
        return -1
    ties = [i for i, mm in enumerate(offspring_mm) if mm == best]
    if len(ties) == 1:
        return ties[0]
    return ties[rng.randbelow(len(ties))]


def select_parent(
    parent: tuple[Genotype, Fitness],
    offspring: Sequence[tuple[Genotype, Fitness]],
    rng: Xoshiro256StarStar,
) -> Genotype:
    """Pick the next parent; offspring win all ties against the old parent."""
    if not offspring:
        raise ValueError("selection needs at least one offspring")
    idx = _select_index(
        parent[1].mismatches, [f.mismatches for _, f in offspring], rng
    )
    return parent[0] if idx < 0 else offspring[idx][0]


def _stride_cap(cfg: EvolveConfig) -> int:
    if cfg.snapshot_stride <= 0:
        return 0
    return min(cfg.max_generations // cfg.snapshot_stride + 1, _MAX_STRIDE_SAMPLES)


def _evolve_python(pt: PackedTable, params: CgpParams, cfg: EvolveConfig):
    rng = Xoshiro256StarStar(cfg.seed)
    parent = random_genotype(params, rng)
    parent_mm = evaluate(parent, pt).mismatches
    trace = [(0, parent_mm)]
    if parent_mm <= cfg.target_mismatches:
        return True, 0, parent, parent_mm, trace

    stride, cap = cfg.snapshot_stride, _stride_cap(cfg)
    stride_used = 0
    solved = False
    generations = 0
    for gen in range(1, cfg.max_generations + 1):
        generations = gen
        offspring = [mutate(parent, rng) for _ in range(cfg.lam)]
        fits = [evaluate(child, pt).mismatches for child in offspring]
        idx = _select_index(parent_mm, fits, rng)
        improved = False
        if idx >= 0:
            improved = fits[idx] < parent_mm
            parent = offspring[idx]
            parent_mm = fits[idx]
        if improved:
            trace.append((gen, parent_mm))
        elif stride > 0 and gen % stride == 0 and stride_used < cap:
            trace.append((gen, parent_mm))
            stride_used += 1
        if parent_mm <= cfg.target_mismatches:
            solved = True
            break
    return solved, generations, parent, parent_mm, trace


def _evolve_kernel(pt: PackedTable, params: CgpParams, cfg: EvolveConfig):
    from . import _kernel

    ranges = np.asarray(params.gene_ranges(), dtype=np.int64)
    solved, generations, genes, mm, tg, tm, tlen = _kernel.run_evolution(
        np.uint64(cfg.seed),
        cfg.lam,
        cfg.max_generations,
        cfg.target_mismatches,
        cfg.snapshot_stride,
        _stride_cap(cfg),
        params.mutations_per_offspring,
        params.strict_mutation,
        ranges,
        params.num_inputs,
        params.num_outputs,
        params.num_nodes,
        pt.input_words,
        pt.desired_words,
        pt.care_words,
    )
    final = Genotype(params, tuple(int(v) for v in genes))
    trace = [(int(tg[i]), int(tm[i])) for i in range(tlen)]
    return bool(solved), int(generations), final, int(mm), trace


def evolve(tt: TruthTable, params: CgpParams, cfg: EvolveConfig,
           *, engine: str = "auto") -> EvolutionReport:
    """Run one evolution to the target fitness or the generation budget.

    `engine` is "auto" (compiled kernel, falling back to pure Python if
    the compiler is unavailable), "compiled", or "python"; it never
    changes the result, only the speed.
    """
    if params.num_inputs != tt.num_vars or params.num_outputs != tt.num_outs:
        raise ValueError(
            f"params are {params.num_inputs}->{params.num_outputs}, "
            f"table is {tt.num_vars}->{tt.num_outs}"
        )
    if engine not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown engine {engine!r}")

    pt = pack_table(tt)
    start = time.perf_counter()
    if engine == "python":
        result = _evolve_python(pt, params, cfg)
    else:
        try:
            result = _evolve_kernel(pt, params, cfg)
        except ImportError:
            if engine == "compiled":
                raise
            result = _evolve_python(pt, params, cfg)
    wall = time.perf_counter() - start

    solved, generations, final, mm, trace = result
    fitness = Fitness.from_counts(mm, pt.total_care)
    if solved and cfg.target_mismatches == 0:
        # every claimed solution is re-checked by the row-at-a-time oracle
        check = evaluate_scalar(final, tt)
        if check.mismatches != 0:
            raise RuntimeError(
                "packed and reference evaluators disagree on a solution; "
                f"reference counts {check.mismatches} mismatches"
            )
    best_trace = tuple(
        (gen, m, Fitness.from_counts(m, pt.total_care).rmse) for gen, m in trace
    )
    return EvolutionReport(
        solved=solved,
        generations_used=generations,
        evaluations=generations * cfg.lam,
        best_trace=best_trace,
        final_genotype=final,
        final_fitness=fitness,
        active_nodes=decode(final).num_gates,
        seed=cfg.seed,
        config=cfg,
        wall_time=wall,
    )


# --------------------------------------------------------------------------
# Sweeps

@dataclass(frozen=True)
class SweepCell:
    """One grid point: a benchmark run under one (lambda, m, mu_r) setting
    for every listed seed."""

    benchmark: str
    lam: int
    num_nodes: int
    mutation_rate: float
    seeds: tuple[int, ...]

    def __post_init__(self):
        if not self.seeds:
            raise ValueError(f"cell {self.benchmark}: empty seed list")


@dataclass(frozen=True)
class SweepRow:
    benchmark: str
    lam: int
    num_nodes: int
    mutation_rate: float
    seed: int
    solved: bool
    generations: int
    evaluations: int
    active_nodes: int
    wall_time_s: float


@dataclass(frozen=True)
class AggregateRow:
    benchmark: str
    lam: int
    num_nodes: int
    mutation_rate: float
    median_generations: float | None
    min_nodes: int | None
    solve_rate: float


def _sweep_job(args):
    name, tt, params, cfg, engine = args
    rep = evolve(tt, params, cfg, engine=engine)
    return SweepRow(
        benchmark=name,
        lam=cfg.lam,
        num_nodes=params.num_nodes,
        mutation_rate=params.mutation_rate,
        seed=cfg.seed,
        solved=rep.solved,
        generations=rep.generations_used,
        evaluations=rep.evaluations,
        active_nodes=rep.active_nodes,
        wall_time_s=rep.wall_time,
    )


def run_sweep(
    tables: Mapping[str, TruthTable],
    cells: Sequence[SweepCell],
    *,
    max_generations: int = 10_000_000,
    strict_mutation: bool = False,
    jobs: int = 1,
    engine: str = "auto",
) -> list[SweepRow]:
    """Run every (cell, seed) pair; budget exhaustion is recorded, never raised.

    Cells are validated against `tables` before any run starts.  With
    `jobs` > 1 the runs execute in worker processes; each run owns its
    generator, so ordering and results match the sequential schedule.
    """
    if not cells:
        raise ValueError("sweep grid is empty")
    for cell in cells:
        if cell.benchmark not in tables:
            raise ValueError(f"no table for benchmark {cell.benchmark!r}")

    work = []
    for cell in cells:
        tt = tables[cell.benchmark]
        params = CgpParams(
            num_inputs=tt.num_vars,
            num_outputs=tt.num_outs,
            num_nodes=cell.num_nodes,
            mutation_rate=cell.mutation_rate,
            strict_mutation=strict_mutation,
        )
        for seed in cell.seeds:
            cfg = EvolveConfig(
                lam=cell.lam, max_generations=max_generations, seed=seed
            )
            work.append((cell.benchmark, tt, params, cfg, engine))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_job, work))
    return [_sweep_job(item) for item in work]


def aggregate_rows(rows: Iterable[SweepRow]) -> list[AggregateRow]:
    """Collapse detail rows per configuration, in first-appearance order.

    Generation and node statistics cover solved runs only; a fully
    unsolved configuration reports them as missing.
    """
    groups: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        key = (row.benchmark, row.lam, row.num_nodes, row.mutation_rate)
        groups.setdefault(key, []).append(row)
    out = []
    for (name, lam, m, mu), members in groups.items():
        solved = [r for r in members if r.solved]
        out.append(AggregateRow(
            benchmark=name,
            lam=lam,
            num_nodes=m,
            mutation_rate=mu,
            median_generations=(
                statistics.median(r.generations for r in solved)
                if solved else None
            ),
            min_nodes=min((r.active_nodes for r in solved), default=None),
            solve_rate=len(solved) / len(members),
        ))
    return out


def _num(x) -> str:
    return f"{x:g}"


def write_detail_csv(path, rows: Iterable[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DETAIL_HEADER)
        for r in rows:
            w.writerow([
                r.benchmark, r.lam, r.num_nodes, _num(r.mutation_rate),
                r.seed, int(r.solved), r.generations, r.evaluations,
                r.active_nodes, f"{r.wall_time_s:.3f}",
            ])


def write_aggregate_csv(path, rows: Iterable[AggregateRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AGGREGATE_HEADER)
        for r in rows:
            w.writerow([
                r.benchmark, r.lam, r.num_nodes, _num(r.mutation_rate),
                "" if r.median_generations is None else _num(r.median_generations),
                "" if r.min_nodes is None else r.min_nodes,
                _num(r.solve_rate),
            ])
