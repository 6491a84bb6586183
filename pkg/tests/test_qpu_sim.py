import csv
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgk.errors import ConfigError
from qgk.experiments import exclusion_trial, shot_scaling_trial, site_ranking_trial
from qgk.qpu_sim import (NoiseProfile, Site, build_sites, chain_edges, frobenius_score, load_backend_sites, rank_sites,
                         retain_top_fraction, schedule_generation, site_kernel, site_kernels, spread_stats,
                         write_site_report, write_spread_curve)


def exact_kernel(n=30, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.random((n, 3))
    k = np.exp(-((x[:, None] - x[None]) ** 2).sum(-1))
    np.fill_diagonal(k, 1.0)
    return k


def test_build_sites():
    sites = build_sites(21, seed=4)
    assert len(sites) == 21
    assert all(len(s.qubits) == 4 for s in sites)
    assert sites[1].edges == ((4, 5), (5, 6), (7, 6))
    assert len({q for s in sites for q in s.qubits}) == 84
    assert all(0.005 <= s.noise_scale <= 0.05 for s in sites)
    assert build_sites(21, seed=4) == sites
    two = build_sites(2, [0.0, 0.01])
    assert [s.noise_scale for s in two] == [0.0, 0.01]
    with pytest.raises(ValueError):
        build_sites(0)
    with pytest.raises(ValueError):
        chain_edges((0, 1), ">><")


def test_site_kernel_noiseless_is_exact():
    k = exact_kernel()
    s = Site(0, (0, 1, 2, 3), (), 0.0)
    np.testing.assert_array_equal(site_kernel(k, s, np.random.default_rng(0)), k)


def test_site_kernel_frobenius_concentration():
    k = np.full((100, 100), 0.5)
    np.fill_diagonal(k, 1.0)
    s = Site(0, (0,), (), 0.01)
    scores = [frobenius_score(site_kernel(k, s, np.random.default_rng(i)), k) for i in range(40)]
    # full-matrix norm counts each perturbed pair twice
    assert np.mean(scores) == pytest.approx(0.01 * np.sqrt(2 * 4950), rel=0.02)


def test_site_kernel_clamp():
    k = np.array([[1.0, 0.999], [0.999, 1.0]])
    out = site_kernel(k, Site(0, (0,), (), 0.0, bias=1.0), np.random.default_rng(0))
    assert out[0, 1] == 1.0


@given(st.integers(0, 2**32 - 1), st.floats(0, 0.2), st.sampled_from([None, 10, 1000]))
def test_site_kernel_invariants(seed, scale, shots):
    k = exact_kernel(8, seed % 5)
    out = site_kernel(k, Site(0, (0,), (), scale), np.random.default_rng(seed), shots)
    assert np.array_equal(out, out.T) and np.all(np.diag(out) == 1)
    assert out.min() >= 0 and out.max() <= 1


def test_frobenius_examples():
    k = exact_kernel(5)
    assert frobenius_score(k, k) == 0.0
    d = k.copy()
    d[1, 3] += 0.1
    d[3, 1] += 0.1
    assert frobenius_score(d, k) == pytest.approx(0.1 * np.sqrt(2))
    assert frobenius_score(d, k) == frobenius_score(k, d)
    with pytest.raises(ValueError):
        frobenius_score(k, k[:3, :3])


def test_rank_sites():
    assert rank_sites([0.3, 0.1, 0.2]) == [1, 2, 0]
    assert rank_sites([0.5, 0.5, 0.5], [7, 3, 5]) == [1, 2, 0]


@pytest.mark.parametrize("seed", range(3))
def test_ranking_tracks_true_noise(seed):
    assert site_ranking_trial(seed) >= 0.9


def test_spread_examples():
    k = exact_kernel()
    quiet = build_sites(5, [0.0] * 5)
    assert spread_stats(site_kernels(k, quiet, 0), k).average_spread == 0.0
    sites = build_sites(21, seed=2)
    rep = spread_stats(site_kernels(k, sites, 2), k)
    assert rep.exclusion_curve[-1] == 0.0
    assert rep.spread_excluding(6) < rep.average_spread
    assert len(rep.exclusion_curve) == 21
    # the first site dropped is the worst
    worst = rep.ranking[-1]
    assert rep.frobenius[worst] == max(rep.frobenius)


def test_spread_exclude_ids_and_single_site():
    k = exact_kernel()
    sites = build_sites(4, seed=0)
    rep = spread_stats(site_kernels(k, sites, 0), k, [s.site_id for s in sites], exclude_ids=[0, 2])
    assert rep.site_ids == (1, 3)
    single = spread_stats(site_kernels(k, sites[:1], 0), k)
    assert single.exclusion_curve == () and single.average_spread == 0.0


def test_exclusion_curve_sign_test_small():
    trial = exclusion_trial(replicates=12)
    assert trial.successes >= 11


def test_shot_scaling_small():
    res = shot_scaling_trial(samples=16)
    assert all(1 / 1.3 <= r <= 1.3 for r in res.ratios())


def test_retain_top_fraction():
    sites = build_sites(21, seed=0)
    scores = [s.noise_scale for s in sites]
    assert len(retain_top_fraction(sites[:20], scores[:20], 0.2)) == 4
    assert len(retain_top_fraction(sites, scores, 0.2)) == 5
    assert len(retain_top_fraction(sites, scores, 1.0)) == 21
    top = retain_top_fraction(sites, scores, 0.2)
    assert max(s.noise_scale for s in top) <= min(s.noise_scale for s in sites if s not in top)
    with pytest.raises(ValueError):
        retain_top_fraction(sites, scores, 0.0)


def test_schedule():
    sched = schedule_generation(45, {"a": build_sites(19)})
    loads = sched.loads()
    assert max(loads) - min(loads) <= 1 and sum(loads) == 45
    one = schedule_generation(1, {"a": build_sites(1)})
    assert list(one.assignments.values()) == [[0]]
    two = schedule_generation(400, {"a": build_sites(19), "b": build_sites(21)})
    assert two.speedup == pytest.approx(40, abs=1)
    with pytest.raises(ValueError):
        schedule_generation(3, {"a": []})


def test_backend_sites_file(tmp_path):
    doc = {"name": "dev", "edges": [[0, 1], [1, 2], [3, 2], [4, 5], [5, 6], [7, 6]],
           "sites": [{"qubits": [0, 1, 2, 3], "noise_scale": 0.02}, [4, 5, 6, 7]]}
    path = tmp_path / "dev.json"
    path.write_text(json.dumps(doc))
    backend, sites = load_backend_sites(path, seed=1)
    assert backend.num_qubits == 8 and len(sites) == 2
    assert sites[0].noise_scale == 0.02 and sites[1].edges == ((4, 5), (5, 6), (7, 6))
    path.write_text(json.dumps({"edges": [[0, 1]]}))
    with pytest.raises(ConfigError):
        load_backend_sites(path)
    path.write_text("nope")
    with pytest.raises(ConfigError):
        load_backend_sites(path)


def test_report_files(tmp_path):
    k = exact_kernel()
    sites = build_sites(21, seed=0)
    rep = spread_stats(site_kernels(k, sites, 0), k)
    write_site_report(rep, tmp_path / "r.csv")
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert len(rows) == 21
    scores = [float(r["frobenius"]) for r in rows]
    assert scores == sorted(scores)
    assert rows[-1]["excluded_rank"] == "0"
    write_spread_curve(rep, tmp_path / "s.csv")
    assert len(list(csv.DictReader(open(tmp_path / "s.csv")))) == 21


def test_noise_profile():
    assert NoiseProfile(values=(0.1, 0.2)).draw(2, np.random.default_rng(0)).tolist() == [0.1, 0.2]
    with pytest.raises(ValueError):
        NoiseProfile(0.0, 0.1)
