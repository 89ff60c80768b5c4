"""Benchmark harness: fit every method to each dataset, generate replicate
graphs, score them with the metric battery, and rank the methods.

A "block" is one (dataset, metric) pair.  Within a block each method is
ranked by its mean distance over replicates; blocks where any method is
missing a value (for example ground-truth community metrics for generators
that emit no labels) drop out of the ranking with a warning.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines, neardag
from .estimation import estimate
from .generator import CsParams, generate
from .graph import LabeledGraph
from .metrics import MetricConfig, compare
from .stats import (RankTable, StatsError, bootstrap_ci, friedman,
                    rank_blocks, wtl_matrix)

log = logging.getLogger(__name__)

METHODS = ("cs", "cs-dag", "er", "er-nd", "config", "config-nd",
           "sbm", "sbm-nd", "dcsbm", "dcsbm-nd")
ENDOGENOUS_CATEGORY = "meso-endogenous"
THREADS_ENV = "CITEGEN_THREADS"


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    methods: Tuple[str, ...] = METHODS
    replicates: int = 50
    seed: int = 0
    order_strategy: str = "degree-diff"
    metric: MetricConfig = field(default_factory=MetricConfig)
    threads: int = 0

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise BenchError(f"unknown methods: {unknown}; known: {METHODS}")
        if self.replicates < 1:
            raise BenchError("replicates must be >= 1")

    def resolve_threads(self) -> int:
        if self.threads > 0:
            return self.threads
        env = os.environ.get(THREADS_ENV, "").strip()
        if env:
            try:
                value = int(env)
            except ValueError as exc:
                raise BenchError(f"{THREADS_ENV} must be an integer") from exc
            if value < 1:
                raise BenchError(f"{THREADS_ENV} must be >= 1")
            return value
        return 1


@dataclass
class MethodFits:
    """Per-dataset fitted inputs shared by all replicates."""

    n: int
    back_ratio: float
    cs_params: Optional[CsParams] = None
    er: Optional[baselines.ErFit] = None
    config: Optional[baselines.ConfigFit] = None
    sbm: Optional[baselines.SbmFit] = None


def fit_methods(graph: LabeledGraph, methods: Sequence[str],
                order_strategy: str) -> MethodFits:
    """Fit every requested method family once per dataset."""
    if graph.timestamps is not None:
        ordering = neardag.order_nodes(graph, "timestamps")
    else:
        ordering = neardag.order_nodes(graph, order_strategy)
    fits = MethodFits(n=graph.num_nodes,
                      back_ratio=neardag.back_edge_ratio(graph, ordering))
    wanted = set(methods)
    if wanted & {"cs", "cs-dag"}:
        fits.cs_params = estimate(graph).params
    if wanted & {"er", "er-nd"}:
        fits.er = baselines.fit_er(graph)
    if wanted & {"config", "config-nd"}:
        fits.config = baselines.fit_config(graph)
    if wanted & {"sbm", "sbm-nd", "dcsbm", "dcsbm-nd"}:
        fits.sbm = baselines.fit_sbm(graph)
    return fits


def realize(method: str, fits: MethodFits, seed) -> LabeledGraph:
    """Generate one synthetic replicate for a fitted method.

    ``seed`` is a SeedSequence; methods with a post-processing stage
    (back-edge injection or cycle breaking) consume a second child seed,
    so the base and near-DAG variants share their generation stream.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_gen, s_post = ss.spawn(2)
    base = method[:-3] if method.endswith("-nd") else method
    if method == "cs":
        dag = generate(fits.cs_params, fits.n, s_gen)
        return neardag.inject_back_edges(dag, fits.back_ratio, s_post)
    if method == "cs-dag":
        return generate(fits.cs_params, fits.n, s_gen)
    if base == "er":
        out = baselines.generate_er(fits.er, s_gen)
    elif base == "config":
        out, _ = baselines.generate_config(fits.config, s_gen)
    elif base == "sbm":
        out = baselines.generate_sbm(fits.sbm, s_gen)
    elif base == "dcsbm":
        out = baselines.generate_dcsbm(fits.sbm, s_gen)
    else:
        raise BenchError(f"unknown method {method}")
    if method.endswith("-nd"):
        out, _ = neardag.cycle_break(out, fits.back_ratio, s_post, "degree-diff")
    return out


def _gen_seed(master: int, d: int, m: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(0, d, m, rep))


def _compare_seed(master: int, d: int, rep: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(1, d, rep))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class BenchResult:
    methods: Tuple[str, ...]
    datasets: Tuple[str, ...]
    metric_names: Tuple[str, ...]
    metric_categories: Tuple[str, ...]
    runs: np.ndarray
    """Distances with shape (datasets, metrics, methods, replicates); NaN marks skips."""

    def block_values(self):
        """Mean distances flattened to (blocks, methods) plus block metadata."""
        n_d, n_met, n_m, _ = self.runs.shape
        means = self.runs.mean(axis=3)
        values = means.reshape(n_d * n_met, n_m)
        blocks = [(d, met) for d in self.datasets for met in self.metric_names]
        categories = [c for _ in self.datasets for c in self.metric_categories]
        return values, blocks, categories

    def _table_and_runs(self, keep_mask: np.ndarray):
        values, blocks, categories = self.block_values()
        values = values[keep_mask]
        blocks = [b for b, k in zip(blocks, keep_mask) if k]
        complete = ~np.isnan(values).any(axis=1)
        table = rank_blocks(values, self.methods, blocks)
        n_d, n_met, n_m, n_rep = self.runs.shape
        flat_runs = self.runs.reshape(n_d * n_met, n_m, n_rep)[keep_mask][complete]
        return table, flat_runs

    def full_table(self):
        _, blocks, _ = self.block_values()
        return self._table_and_runs(np.ones(len(blocks), bool))

    def non_endogenous_table(self):
        _, _, categories = self.block_values()
        keep = np.array([c != ENDOGENOUS_CATEGORY for c in categories])
        return self._table_and_runs(keep)


def run_bench(datasets: Dict[str, LabeledGraph],
              config: BenchConfig = None) -> BenchResult:
    """Run the replicate/compare grid and collect the distance tensor.

    Every method sees the identical real-side sampling in a given
    (dataset, replicate) cell: the comparison seed depends only on those
    two indices.
    """
    config = config or BenchConfig()
    if not datasets:
        raise BenchError("no datasets supplied")
    names = tuple(datasets)
    methods = config.methods
    fits = {name: fit_methods(datasets[name], methods, config.order_strategy)
            for name in names}

    probe = compare(next(iter(datasets.values())),
                    next(iter(datasets.values())),
                    replace(config.metric, seed=0))
    metric_names = tuple(e.name for e in probe.entries)
    metric_categories = tuple(e.category for e in probe.entries)
    name_index = {n: i for i, n in enumerate(metric_names)}

    runs = np.full((len(names), len(metric_names), len(methods),
                    config.replicates), np.nan)

    def job(d: int, m: int, rep: int):
        real = datasets[names[d]]
        synth = realize(methods[m], fits[names[d]], _gen_seed(config.seed, d, m, rep))
        mc = replace(config.metric, seed=_compare_seed(config.seed, d, rep))
        report = compare(real, synth, mc)
        for entry in report.entries:
            if not entry.skipped:
                runs[d, name_index[entry.name], m, rep] = entry.value
        return d, m, rep

    jobs = [(d, m, rep)
            for d in range(len(names))
            for m in range(len(methods))
            for rep in range(config.replicates)]
    workers = config.resolve_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda args: job(*args), jobs))
    else:
        for args in jobs:
            job(*args)
    return BenchResult(methods=tuple(methods), datasets=names,
                       metric_names=metric_names,
                       metric_categories=metric_categories, runs=runs)


def _write_rank_table(path: Path, table: RankTable):
    with path.open("w") as fh:
        fh.write("dataset\tmetric\tmethod\tmean_distance\trank\n")
        for b, (dataset, metric) in enumerate(table.blocks):
            for m, method in enumerate(table.methods):
                fh.write(f"{dataset}\t{metric}\t{method}"
                         f"\t{float(table.values[b, m])!r}"
                         f"\t{float(table.ranks[b, m])!r}\n")


def _write_mean_ranks(path: Path, table: RankTable, seed: int,
                      draws: int = 10_000):
    ci = bootstrap_ci(table, draws=draws, seed=seed)
    mean_ranks = table.mean_ranks()
    with path.open("w") as fh:
        fh.write("method\tmean_rank\tci_low\tci_high\n")
        for m, method in enumerate(table.methods):
            fh.write(f"{method}\t{float(mean_ranks[m])!r}"
                     f"\t{float(ci[m, 0])!r}\t{float(ci[m, 1])!r}\n")


def _write_wtl(path: Path, methods: Sequence[str], runs: np.ndarray,
               alpha: float = 0.05):
    wins, ties, losses = wtl_matrix(runs, alpha=alpha)
    with path.open("w") as fh:
        fh.write("method_a\tmethod_b\twins\tties\tlosses\n")
        for i, a in enumerate(methods):
            for j, b in enumerate(methods):
                if i == j:
                    continue
                fh.write(f"{a}\t{b}\t{wins[i, j]}\t{ties[i, j]}\t{losses[i, j]}\n")


def write_artifacts(result: BenchResult, outdir, seed: int = 0) -> List[str]:
    """Emit the benchmark summary files; returns the file names written.

    Two variants are produced: the full metric set and the ground-truth
    community metrics excluded ("non_endogenous" suffix).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: List[str] = []
    variants = {"": result.full_table(),
                "_non_endogenous": result.non_endogenous_table()}
    friedman_rows = []
    for suffix, (table, runs) in variants.items():
        _write_rank_table(outdir / f"rank_table{suffix}.tsv", table)
        written.append(f"rank_table{suffix}.tsv")
        _write_mean_ranks(outdir / f"mean_ranks{suffix}.tsv", table, seed)
        written.append(f"mean_ranks{suffix}.tsv")
        _write_wtl(outdir / f"wtl{suffix}.tsv", table.methods, runs)
        written.append(f"wtl{suffix}.tsv")
        label = "all" if suffix == "" else "non_endogenous"
        try:
            chi2, p = friedman(table)
            friedman_rows.append((label, table.ranks.shape[0],
                                  len(table.methods), repr(chi2), repr(p)))
        except StatsError as exc:
            log.warning("Friedman test unavailable for %s: %s", label, exc)
            friedman_rows.append((label, table.ranks.shape[0],
                                  len(table.methods), "", ""))
    with (outdir / "friedman.tsv").open("w") as fh:
        fh.write("variant\tblocks\tmethods\tchi2\tp_value\n")
        for row in friedman_rows:
            fh.write("\t".join(str(x) for x in row) + "\n")
    written.append("friedman.tsv")
    return written
