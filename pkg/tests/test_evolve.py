"""Selection rules, the evolution loop under both engines, sweeps, and
CSV reporting."""

import csv
import dataclasses

import pytest

from conftest import TOGGLE_KISS2, table_for
from fsmevo import (
    CgpParams,
    EvolveConfig,
    Fitness,
    Genotype,
    SweepCell,
    SweepRow,
    Xoshiro256StarStar,
    aggregate_rows,
    build_truth_table,
    encode_states,
    evaluate_scalar,
    evolve,
    parse_kiss2,
    random_genotype,
    run_sweep,
    select_parent,
    write_aggregate_csv,
    write_detail_csv,
)
from fsmevo.evolve import DETAIL_HEADER, _select_index


def toggle_table():
    fsm = parse_kiss2(TOGGLE_KISS2, name="toggle")
    return build_truth_table(fsm, encode_states(fsm))


def _g(params, rng):
    return random_genotype(params, rng)


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ValueError):
        EvolveConfig(lam=0)
    with pytest.raises(ValueError):
        EvolveConfig(max_generations=0)
    with pytest.raises(ValueError):
        EvolveConfig(seed=-1)
    with pytest.raises(ValueError):
        EvolveConfig(seed=1 << 64)
    with pytest.raises(ValueError):
        EvolveConfig(target_mismatches=-1)
    with pytest.raises(ValueError):
        EvolveConfig(snapshot_stride=-1)
    EvolveConfig(seed=(1 << 64) - 1)  # boundary is fine


# -------------------------------------------------------------- selection

def test_offspring_beats_parent_on_tie():
    rng = Xoshiro256StarStar(0)
    p = CgpParams(2, 1, 3)
    parent, child = _g(p, rng), _g(p, rng)
    worse1, worse2 = _g(p, rng), _g(p, rng)
    picked = select_parent(
        (parent, Fitness(3, 0.0)),
        [(worse1, Fitness(5, 0.0)), (child, Fitness(3, 0.0)),
         (worse2, Fitness(7, 0.0))],
        rng,
    )
    assert picked is child


def test_parent_survives_only_when_strictly_better():
    rng = Xoshiro256StarStar(1)
    p = CgpParams(2, 1, 3)
    parent = _g(p, rng)
    offspring = [(_g(p, rng), Fitness(4, 0.0)) for _ in range(4)]
    picked = select_parent((parent, Fitness(2, 0.0)), offspring, rng)
    assert picked is parent


def test_single_best_offspring_consumes_no_random_draw():
    rng = Xoshiro256StarStar(2)
    before = rng.getstate()
    assert _select_index(3, [5, 3, 7], rng) == 1
    assert rng.getstate() == before
    assert _select_index(2, [4, 4, 4, 4], rng) == -1
    assert rng.getstate() == before


def test_multiple_tied_best_consume_exactly_one_draw():
    rng = Xoshiro256StarStar(3)
    shadow = Xoshiro256StarStar(3)
    idx = _select_index(3, [3, 9, 3], rng)
    assert idx in (0, 2)
    assert idx == (0, 2)[shadow.randbelow(2)]
    assert rng.getstate() == shadow.getstate()


def test_tied_offspring_chosen_uniformly():
    rng = Xoshiro256StarStar(4)
    counts = [0, 0]
    trials = 10_000
    for _ in range(trials):
        counts[_select_index(3, [3, 3], rng)] += 1
    # binomial(10^4, 1/2): 3 sigma is 150
    assert abs(counts[0] - trials / 2) <= 150


def test_select_parent_requires_offspring():
    rng = Xoshiro256StarStar(5)
    p = CgpParams(2, 1, 1)
    with pytest.raises(ValueError):
        select_parent((_g(p, rng), Fitness(0, 0.0)), [], rng)


# -------------------------------------------------------------- evolution

def test_engines_produce_identical_reports():
    tts = {"toggle": toggle_table(), "10101": table_for("10101")[2]}
    for name, tt in tts.items():
        for lam in (1, 4):
            for strict in (False, True):
                for stride in (0, 5):
                    params = CgpParams(
                        tt.num_vars, tt.num_outs, 8,
                        mutation_rate=12.0, strict_mutation=strict,
                    )
                    cfg = EvolveConfig(
                        lam=lam, max_generations=300, seed=11,
                        snapshot_stride=stride,
                    )
                    a = evolve(tt, params, cfg, engine="python")
                    b = evolve(tt, params, cfg, engine="compiled")
                    assert dataclasses.replace(a, wall_time=0.0) == \
                        dataclasses.replace(b, wall_time=0.0), (name, lam, strict, stride)


def test_fixed_seed_reproduces_the_report():
    tt = toggle_table()
    params = CgpParams(tt.num_vars, tt.num_outs, 6)
    cfg = EvolveConfig(lam=4, max_generations=2000, seed=42)
    a = evolve(tt, params, cfg)
    b = evolve(tt, params, cfg)
    assert dataclasses.replace(a, wall_time=0.0) == \
        dataclasses.replace(b, wall_time=0.0)
    assert a.best_trace == b.best_trace
    assert a.final_genotype == b.final_genotype


def test_solved_run_on_the_toggle_machine():
    tt = toggle_table()
    params = CgpParams(tt.num_vars, tt.num_outs, 6)
    rep = evolve(tt, params, EvolveConfig(lam=4, max_generations=20_000, seed=0))
    assert rep.solved
    assert rep.final_fitness.mismatches == 0
    assert rep.evaluations == rep.generations_used * 4
    assert rep.best_trace[-1][1] == 0
    assert evaluate_scalar(rep.final_genotype, tt).mismatches == 0
    assert rep.seed == 0 and rep.config.lam == 4


def test_best_trace_is_monotone_and_starts_at_generation_zero():
    tt = table_for("0001000")[2]
    params = CgpParams(tt.num_vars, tt.num_outs, 10)
    rep = evolve(tt, params, EvolveConfig(lam=4, max_generations=500, seed=2),
                 engine="python")
    gens = [g for g, _, _ in rep.best_trace]
    mms = [m for _, m, _ in rep.best_trace]
    assert gens[0] == 0
    assert gens == sorted(gens)
    assert all(a >= b for a, b in zip(mms, mms[1:]))
    for _, m, rmse in rep.best_trace:
        assert rmse == pytest.approx((m / tt.total_care()) ** 0.5)


def test_budget_exhaustion_reports_unsolved():
    tt = table_for("0001000")[2]
    params = CgpParams(tt.num_vars, tt.num_outs, 2)  # far too few nodes
    rep = evolve(tt, params, EvolveConfig(lam=4, max_generations=60, seed=1),
                 engine="python")
    assert not rep.solved
    assert rep.generations_used == 60
    assert rep.final_fitness.mismatches > 0


def test_target_mismatches_stops_early():
    tt = table_for("0001000")[2]
    params = CgpParams(tt.num_vars, tt.num_outs, 6)
    probe = evolve(tt, params, EvolveConfig(lam=4, max_generations=1, seed=9),
                   engine="python")
    start = probe.best_trace[0][1]
    rep = evolve(
        tt, params,
        EvolveConfig(lam=4, max_generations=100, seed=9,
                     target_mismatches=start),
        engine="python",
    )
    assert rep.solved
    assert rep.generations_used == 0
    assert rep.evaluations == 0


def test_snapshot_stride_samples_flat_generations():
    tt = table_for("0001000")[2]
    params = CgpParams(tt.num_vars, tt.num_outs, 2)
    rep = evolve(
        tt, params,
        EvolveConfig(lam=4, max_generations=50, seed=3, snapshot_stride=7),
        engine="python",
    )
    gens = {g for g, _, _ in rep.best_trace}
    for g in range(7, 51, 7):
        assert g in gens
    assert not rep.solved


def test_vacuous_table_solves_at_generation_zero():
    import numpy as np

    from fsmevo import TruthTable

    tt = TruthTable(2, 1, np.zeros((4, 1), np.uint8), np.zeros((4, 1), np.uint8))
    params = CgpParams(2, 1, 3)
    rep = evolve(tt, params, EvolveConfig(lam=4, max_generations=10, seed=0),
                 engine="python")
    assert rep.solved and rep.generations_used == 0
    assert rep.best_trace == ((0, 0, 0.0),)


def test_shape_mismatch_rejected():
    tt = toggle_table()
    with pytest.raises(ValueError, match="params are"):
        evolve(tt, CgpParams(3, 2, 5), EvolveConfig())


def test_unknown_engine_rejected():
    tt = toggle_table()
    with pytest.raises(ValueError, match="unknown engine"):
        evolve(tt, CgpParams(2, 2, 5), EvolveConfig(), engine="gpu")


# ------------------------------------------------------------------ sweep

def small_cells():
    return [
        SweepCell("toggle", 4, 6, 10.0, (0, 1, 2)),
        SweepCell("toggle", 8, 6, 10.0, (0, 1)),
    ]


def toggle_tables():
    return {"toggle": toggle_table()}


def test_sweep_produces_one_row_per_cell_and_seed():
    rows = run_sweep(toggle_tables(), small_cells(), max_generations=2000,
                     engine="python")
    assert len(rows) == 5
    assert [r.lam for r in rows] == [4, 4, 4, 8, 8]
    assert [r.seed for r in rows] == [0, 1, 2, 0, 1]
    for r in rows:
        assert r.benchmark == "toggle"
        assert r.evaluations == r.generations * r.lam


def test_sweep_rejects_empty_grid_and_unknown_benchmarks():
    with pytest.raises(ValueError, match="empty"):
        run_sweep(toggle_tables(), [])
    with pytest.raises(ValueError, match="no table"):
        run_sweep(toggle_tables(), [SweepCell("nope", 4, 5, 10.0, (0,))])
    with pytest.raises(ValueError, match="empty seed list"):
        SweepCell("toggle", 4, 5, 10.0, ())


def test_parallel_sweep_matches_sequential():
    cells = small_cells()
    a = run_sweep(toggle_tables(), cells, max_generations=1000, engine="python")
    b = run_sweep(toggle_tables(), cells, max_generations=1000, engine="python",
                  jobs=2)
    strip = lambda rows: [dataclasses.replace(r, wall_time_s=0.0) for r in rows]
    assert strip(a) == strip(b)


def test_budget_exhaustion_is_recorded_not_raised():
    tables = {"0001000": table_for("0001000")[2]}
    cells = [SweepCell("0001000", 4, 2, 10.0, (0, 1))]  # unsolvable at m=2
    rows = run_sweep(tables, cells, max_generations=40, engine="python")
    assert [r.solved for r in rows] == [False, False]
    agg = aggregate_rows(rows)
    assert agg[0].solve_rate == 0.0
    assert agg[0].median_generations is None
    assert agg[0].min_nodes is None


def test_aggregate_statistics_cover_solved_runs_only():
    rows = [
        SweepRow("b", 4, 9, 10.0, 0, True, 100, 400, 7, 0.1),
        SweepRow("b", 4, 9, 10.0, 1, False, 500, 2000, 9, 0.2),
        SweepRow("b", 4, 9, 10.0, 2, True, 300, 1200, 5, 0.1),
        SweepRow("c", 8, 9, 3.0, 0, True, 40, 320, 6, 0.1),
    ]
    agg = aggregate_rows(rows)
    assert len(agg) == 2
    b, c = agg
    assert (b.benchmark, b.lam) == ("b", 4)
    assert b.median_generations == 200  # median of the two solved runs
    assert b.min_nodes == 5
    assert b.solve_rate == pytest.approx(2 / 3)
    assert c.median_generations == 40 and c.solve_rate == 1.0


def test_csv_writers_emit_the_documented_format(tmp_path):
    rows = [SweepRow("tog", 4, 6, 10.0, 1, True, 12, 48, 2, 0.1234)]
    detail = tmp_path / "d.csv"
    write_detail_csv(detail, rows)
    assert detail.read_text().splitlines() == [
        "benchmark,lambda,m,mu_r,seed,solved,generations,evaluations,"
        "active_nodes,wall_time_s",
        "tog,4,6,10,1,1,12,48,2,0.123",
    ]
    agg = tmp_path / "a.csv"
    write_aggregate_csv(agg, aggregate_rows(rows))
    assert agg.read_text().splitlines() == [
        "benchmark,lambda,m,mu_r,median_generations,min_nodes,solve_rate",
        "tog,4,6,10,12,2,1",
    ]


def test_detail_csv_parses_back_with_stdlib_reader(tmp_path):
    rows = run_sweep(toggle_tables(), small_cells(), max_generations=500,
                     engine="python")
    path = tmp_path / "detail.csv"
    write_detail_csv(path, rows)
    with open(path, newline="") as fh:
        records = list(csv.DictReader(fh))
    assert len(records) == len(rows)
    assert tuple(records[0]) == DETAIL_HEADER
    for rec, row in zip(records, rows):
        assert int(rec["generations"]) == row.generations
        assert int(rec["solved"]) in (0, 1)
