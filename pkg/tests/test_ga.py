import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import pareto_front
from qgk.dataset import synth_generate
from qgk.ga import (GaConfig, crossover_two_point, dominates, evaluate, fitness_mono, make_context, mutate,
                    nsga2_order, nsga2_sort, run, select_parents_rank_proportional, select_parents_steady_state,
                    trend_slope, write_generations_csv, write_pareto_csv)
from qgk.genome import GeneConfig, random_chromosome, validate_genes
from qgk.transpile import chain_backend

BACKEND = chain_backend(4)
DATA = synth_generate(40, 4, seed=0, bayes_accuracy=0.8)
GENES = GeneConfig(4, 4, 4, ("I", "RZ", "SX", "X", "ECR"), connectivity=BACKEND.edges)


def small(**kw):
    base = dict(genes=GENES, population=8, generations=4, parents=4, elitism=2, mutation_rate=0.05,
                crossover_prob=0.9, seed=3)
    base.update(kw)
    return GaConfig(**base)


def test_fitness_mono_values():
    assert abs(fitness_mono(0.658, 0.35, 0.025) - 0.66675) < 1e-12
    assert abs(fitness_mono(0.662, 0.35, 0.025) - 0.67075) < 1e-12
    assert fitness_mono(0.7, 0.4, 0.0) == 0.7
    with pytest.raises(ValueError):
        fitness_mono(0.5, 0.1, -1)


def test_config_validation():
    with pytest.raises(ValueError):
        small(elitism=5, parents=4)
    with pytest.raises(ValueError):
        small(parents=9)
    with pytest.raises(ValueError):
        small(generations=0)
    with pytest.raises(ValueError):
        small(objective="both")
    with pytest.raises(ValueError):
        small(mutation_rate=1.5)


def test_identity_chromosome_evaluation():
    ctx = make_context(small(), DATA, BACKEND)
    rec = evaluate(np.zeros(GENES.length, dtype=int), ctx)
    assert rec.sigma == 0.0 and rec.depth == 0
    assert rec.a <= 0.5 + 1 / DATA.num_samples
    assert rec.f == rec.a


def test_evaluate_deterministic():
    ctx = make_context(small(), DATA, BACKEND)
    genes = random_chromosome(GENES, np.random.default_rng(0))
    assert evaluate(genes, ctx) == evaluate(genes, ctx)
    noisy = make_context(small(noise_std=0.05), DATA, BACKEND)
    with pytest.raises(ValueError):
        evaluate(genes, noisy)
    r1 = evaluate(genes, noisy, np.random.default_rng(9))
    assert r1 == evaluate(genes, noisy, np.random.default_rng(9))
    assert r1.depth == evaluate(genes, ctx).depth


def test_steady_state_selection():
    assert set(select_parents_steady_state([0.1, 0.9, 0.5], 2)) == {1, 2}
    assert select_parents_steady_state([0.3, 0.3, 0.3], 2).tolist() == [0, 1]
    assert sorted(select_parents_steady_state([0.2, 0.1, 0.3], 3)) == [0, 1, 2]


def test_rank_proportional_selection():
    picks = select_parents_rank_proportional([0.1, 0.9, 0.5, 0.4], 2, np.random.default_rng(0))
    assert len(set(picks)) == 2


def test_nsga_examples():
    assert nsga2_sort([(1, 1), (2, 2)])[0].tolist() == [1, 0]
    assert nsga2_sort([(1, 2), (2, 1)])[0].tolist() == [0, 0]
    rank, crowd = nsga2_sort([(0, 3), (1, 2), (2, 1), (3, 0)])
    assert np.isinf(crowd[0]) and np.isinf(crowd[3])
    assert crowd[1] == pytest.approx(crowd[2]) and np.isfinite(crowd[1])
    assert dominates((1, 1), (1, 0)) and not dominates((1, 1), (1, 1))


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=20))
def test_nsga_front_matches_oracle(points):
    rank, crowd = nsga2_sort(points)
    assert set(np.flatnonzero(rank == 0)) == pareto_front(points)
    # every point of rank r > 0 is dominated by some point of rank r - 1
    pts = np.asarray(points)
    for i in np.flatnonzero(rank > 0):
        assert any(dominates(pts[j], pts[i]) for j in np.flatnonzero(rank == rank[i] - 1))
    order = nsga2_order(points)
    assert sorted(order.tolist()) == list(range(len(points)))
    assert np.all(np.diff(rank[order]) >= 0)


def test_crossover_examples():
    rng = np.random.default_rng(0)
    p1, p2 = np.arange(10), np.arange(10, 20)
    np.testing.assert_array_equal(crossover_two_point(p1, p1, rng), p1)
    np.testing.assert_array_equal(crossover_two_point(p1, p2, rng, cuts=(0, 10)), p2)
    np.testing.assert_array_equal(crossover_two_point(p1, p2, rng, cuts=(2, 5)),
                                  [0, 1, 12, 13, 14, 5, 6, 7, 8, 9])
    with pytest.raises(ValueError):
        crossover_two_point(p1, p2[:5], rng)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_variation_preserves_ranges(seed, rate):
    rng = np.random.default_rng(seed)
    p1, p2 = random_chromosome(GENES, rng), random_chromosome(GENES, rng)
    child = crossover_two_point(p1, p2, rng)
    assert np.all((child == p1) | (child == p2))
    validate_genes(mutate(child, rate, GENES, rng), GENES)


def test_mutation_counts():
    gc = GeneConfig(4, 8, 4, ("I", "RZ", "SX", "X", "ECR"))
    rng = np.random.default_rng(0)
    g = random_chromosome(gc, rng)
    np.testing.assert_array_equal(mutate(g, 0.0, gc, rng), g)
    validate_genes(mutate(g, 1.0, gc, rng), gc)


class _SpyRng:
    """Generator wrapper recording which positions mutate() draws."""

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.positions = None

    def choice(self, *args, **kw):
        self.positions = self._rng.choice(*args, **kw)
        return self.positions

    def integers(self, *args, **kw):
        return self._rng.integers(*args, **kw)


@pytest.mark.parametrize("rate,expected", [(0.05, 10), (0.01, 2), (0.5, 96), (1.0, 192)])
def test_mutation_touches_exactly_rounded_count(rate, expected):
    gc = GeneConfig(4, 8, 4, ("I", "RZ", "SX", "X", "ECR"))
    assert gc.length == 192
    g = random_chromosome(gc, np.random.default_rng(0))
    spy = _SpyRng(1)
    out = mutate(g, rate, gc, spy)
    assert len(set(spy.positions.tolist())) == expected
    untouched = np.setdiff1d(np.arange(gc.length), spy.positions)
    np.testing.assert_array_equal(out[untouched], g[untouched])


def test_run_counts_and_invariants():
    cfg = small()
    res = run(cfg, DATA, BACKEND)
    assert len(res.logs) == cfg.generations + 1
    assert res.evaluations == cfg.population + cfg.generations * (cfg.population - cfg.elitism)
    for log in res.logs:
        assert len(log.records) == cfg.population
        assert abs(log.mean_f - np.mean([r.f for r in log.records])) < 1e-12
    for genes in res.population:
        validate_genes(genes, GENES)
    best = [log.best_f for log in res.logs]
    assert all(b1 >= b0 for b0, b1 in zip(best, best[1:]))


def test_full_elitism_freezes_population():
    res = run(small(elitism=8, parents=8), DATA, BACKEND)
    assert len({log.best_f for log in res.logs}) == 1
    assert res.evaluations == 8


def test_run_deterministic_across_threads():
    a = run(small(noise_std=0.02), DATA, BACKEND, threads=1)
    b = run(small(noise_std=0.02), DATA, BACKEND, threads=4)
    assert [log.records for log in a.logs] == [log.records for log in b.logs]
    for x, y in zip(a.population, b.population):
        np.testing.assert_array_equal(x, y)


def test_noise_override_and_patience():
    base = run(small(), DATA, BACKEND)
    noisy = run(small(), DATA, BACKEND, noise=0.05)
    assert [log.records for log in base.logs] != [log.records for log in noisy.logs]
    stopped = run(small(generations=30, patience=2, elitism=8, parents=8), DATA, BACKEND)
    assert len(stopped.logs) == 3


def test_multi_objective_run_and_reports(tmp_path):
    cfg = small(objective="multi", elitism=0)
    res = run(cfg, DATA, BACKEND)
    for log in res.logs:
        objs = [r.objectives for r in log.records]
        assert set(log.front) == pareto_front(objs)
    write_pareto_csv(res.logs, tmp_path / "p.csv")
    rows = list(csv.DictReader(open(tmp_path / "p.csv")))
    assert {int(r["generation"]) for r in rows} == set(range(1, cfg.generations + 1))
    mono = run(small(), DATA, BACKEND)
    write_generations_csv(mono.logs, tmp_path / "g.csv")
    rows = list(csv.DictReader(open(tmp_path / "g.csv")))
    assert len(rows) == 4
    assert list(rows[0]) == ["generation", "best_f", "mean_f", "best_a", "best_sigma", "best_depth"]


def test_trend_slope():
    assert trend_slope([1, 2, 3, 4]) == pytest.approx(1.0)
    assert trend_slope([5, 5, 5]) == pytest.approx(0.0)
