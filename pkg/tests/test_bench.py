import numpy as np
import pytest

from citegen.bench import (
    BenchConfig,
    BenchError,
    BenchResult,
    METHODS,
    fit_methods,
    realize,
    run_bench,
    write_artifacts,
)
from citegen.generator import CsParams, generate
from citegen.graph import is_acyclic
from citegen.metrics import MetricConfig
from citegen.neardag import back_edge_count, inject_back_edges

SMALL_METRIC = MetricConfig(n_pairs=100, n_sources=30, max_nodes=500,
                            triad_exact_limit=200, triad_samples=2000)


@pytest.fixture(scope="module")
def small_datasets():
    params = CsParams(p=(0.6, 0.4), m=(4.0, 3.0), rho=(0.3, 0.6),
                      sigma2=(6.0, 5.0))
    first = inject_back_edges(generate(params, 120, 0), 0.08, 1)
    second = inject_back_edges(generate(params, 150, 2), 0.12, 3)
    return {"one": first, "two": second}


@pytest.fixture(scope="module")
def small_fits(small_datasets):
    return fit_methods(small_datasets["one"], METHODS, "degree-diff")


def test_config_rejects_unknown_method():
    with pytest.raises(BenchError, match="unknown"):
        BenchConfig(methods=("cs", "flux"))
    with pytest.raises(BenchError, match="replicates"):
        BenchConfig(replicates=0)


def test_config_thread_resolution(monkeypatch):
    monkeypatch.delenv("CITEGEN_THREADS", raising=False)
    assert BenchConfig().resolve_threads() == 1
    assert BenchConfig(threads=3).resolve_threads() == 3
    monkeypatch.setenv("CITEGEN_THREADS", "4")
    assert BenchConfig().resolve_threads() == 4
    assert BenchConfig(threads=2).resolve_threads() == 2
    monkeypatch.setenv("CITEGEN_THREADS", "zero")
    with pytest.raises(BenchError, match="integer"):
        BenchConfig().resolve_threads()
    monkeypatch.setenv("CITEGEN_THREADS", "0")
    with pytest.raises(BenchError, match=">= 1"):
        BenchConfig().resolve_threads()


def test_fit_methods_only_requested_families(small_datasets):
    fits = fit_methods(small_datasets["one"], ("er",), "degree-diff")
    assert fits.er is not None
    assert fits.cs_params is None and fits.config is None and fits.sbm is None
    assert 0.0 <= fits.back_ratio < 1.0
    assert fits.n == 120


def test_realize_label_availability(small_fits):
    labelled = {"cs", "cs-dag", "sbm", "sbm-nd", "dcsbm", "dcsbm-nd"}
    for method in METHODS:
        out = realize(method, small_fits, 5)
        assert out.num_nodes == small_fits.n
        if method in labelled:
            assert out.labels is not None
        else:
            assert out.labels is None


def test_realize_cs_variants(small_fits):
    dag = realize("cs-dag", small_fits, 7)
    assert is_acyclic(dag)
    near = realize("cs", small_fits, 7)
    expected = back_edge_count(dag.num_edges, small_fits.back_ratio)
    assert near.num_edges == dag.num_edges + expected
    # The generation stream is shared, so the DAG part is identical.
    keep = near.src > near.dst
    assert np.array_equal(np.sort(near.src[keep]), np.sort(dag.src))


def test_realize_nd_reuses_generation_stream(small_fits):
    base = realize("er", small_fits, 9)
    broken = realize("er-nd", small_fits, 9)
    assert broken.num_edges <= base.num_edges
    assert base.num_edges > 0


def test_run_bench_tensor(small_datasets):
    config = BenchConfig(methods=("cs-dag", "er", "sbm"), replicates=2,
                         seed=4, metric=SMALL_METRIC)
    result = run_bench(small_datasets, config)
    assert result.runs.shape == (2, 26, 3, 2)
    assert result.datasets == ("one", "two")
    endo = [i for i, c in enumerate(result.metric_categories)
            if c == "meso-endogenous"]
    rest = [i for i in range(26) if i not in endo]
    er = result.methods.index("er")
    assert np.isnan(result.runs[:, endo, er, :]).all()
    assert not np.isnan(result.runs[:, rest, :, :]).any()
    labelled = [result.methods.index(m) for m in ("cs-dag", "sbm")]
    assert not np.isnan(result.runs[:, :, labelled, :]).any()


def test_run_bench_reproducible_and_thread_invariant(small_datasets):
    config = BenchConfig(methods=("cs-dag", "er"), replicates=2, seed=6,
                         metric=SMALL_METRIC)
    serial = run_bench(small_datasets, config)
    again = run_bench(small_datasets, config)
    threaded = run_bench(small_datasets,
                         BenchConfig(methods=("cs-dag", "er"), replicates=2,
                                     seed=6, metric=SMALL_METRIC, threads=4))
    assert np.array_equal(serial.runs, again.runs, equal_nan=True)
    assert np.array_equal(serial.runs, threaded.runs, equal_nan=True)


def test_run_bench_requires_datasets():
    with pytest.raises(BenchError, match="datasets"):
        run_bench({})


def test_block_tables_drop_incomplete_blocks():
    runs = np.ones((1, 2, 2, 2))
    runs[0, 1, 0, 1] = np.nan
    result = BenchResult(methods=("a", "b"), datasets=("d",),
                         metric_names=("m1", "m2"),
                         metric_categories=("degree", "meso-endogenous"),
                         runs=runs)
    table, flat = result.full_table()
    assert table.blocks == (("d", "m1"),)
    assert flat.shape == (1, 2, 2)
    table_ne, flat_ne = result.non_endogenous_table()
    assert table_ne.blocks == (("d", "m1"),)
    assert np.array_equal(flat, flat_ne)


def test_write_artifacts(tmp_path, small_datasets):
    config = BenchConfig(methods=("cs-dag", "er", "sbm"), replicates=2,
                         seed=4, metric=SMALL_METRIC)
    result = run_bench(small_datasets, config)
    first = tmp_path / "a"
    second = tmp_path / "b"
    names = write_artifacts(result, first, seed=4)
    write_artifacts(result, second, seed=4)
    assert sorted(names) == sorted([
        "rank_table.tsv", "mean_ranks.tsv", "wtl.tsv",
        "rank_table_non_endogenous.tsv", "mean_ranks_non_endogenous.tsv",
        "wtl_non_endogenous.tsv", "friedman.tsv"])
    for name in names:
        assert (first / name).read_text() == (second / name).read_text()
    # er never produces community labels, so the full variant keeps only
    # the twenty metrics outside the endogenous category.
    rank_rows = (first / "rank_table.tsv").read_text().strip().splitlines()
    assert len(rank_rows) == 1 + 2 * 20 * 3
    wtl_rows = (first / "wtl.tsv").read_text().strip().splitlines()
    assert len(wtl_rows) == 1 + 3 * 2
    fried = (first / "friedman.tsv").read_text().strip().splitlines()
    assert len(fried) == 3
    assert fried[1].startswith("all\t40\t3\t")
    assert fried[2].startswith("non_endogenous\t40\t3\t")
