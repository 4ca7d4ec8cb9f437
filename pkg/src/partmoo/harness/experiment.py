"""The partition-select-sample optimizer loop and the region-quality experiment."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..benchmarks import BenchmarkError, TabularBenchmark, evaluate, make_benchmark
from ..core import Archive
from ..hypervolume import HvConfig, hypervolume, log_hv_diff
from ..partition import PartitionParams, PartitionTree, build_tree
from ..samplers import RegionContext, make_sampler, sample_random_region
from ..selection import SelectionConfig, backpropagate, select

logger = logging.getLogger(__name__)

DUPLICATE_RETRIES = 20


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str = "synthetic-nas"
    sampler: str = "random"
    use_partition: bool = True
    selection: SelectionConfig = SelectionConfig()
    budget: int = 300
    n_init: int = 10
    batch: int = 5
    partition: PartitionParams = PartitionParams()
    hv: HvConfig = HvConfig()
    seed: int = 0
    backprop: bool = False
    rebuild_every: int = 10

    def __post_init__(self):
        if self.n_init < 2:
            raise ValueError("n_init must be at least 2")
        if self.batch < 1:
            raise ValueError("batch must be at least 1")
        if self.budget < self.n_init:
            raise ValueError("budget must be at least n_init")
        if self.rebuild_every < 1:
            raise ValueError("rebuild_every must be at least 1")

    @property
    def run_id(self) -> str:
        mode = f"partition-{self.selection.strategy}" if self.use_partition else "whole"
        return f"{self.benchmark}/{self.sampler}/{mode}/{self.seed}"


@dataclass
class IterationRecord:
    iteration: int
    samples_used: int
    hypervolume: float
    hv_log_diff: float | None
    selected_leaf_id: int | None
    hv_evaluations: int
    wall_ms: float
    fallback: int


@dataclass
class RunResult:
    run_id: str
    seed: int
    records: list
    archive: Archive
    hv_max: float | None = None
    tree: PartitionTree | None = field(default=None, repr=False)

    @property
    def final_hv(self) -> float:
        return self.records[-1].hypervolume

    @property
    def final_log_diff(self) -> float | None:
        return self.records[-1].hv_log_diff


class ExperimentAborted(RuntimeError):
    def __init__(self, message, candidate, partial: RunResult):
        super().__init__(message)
        self.candidate = candidate
        self.partial = partial


def _archive_hv(archive: Archive, ref, cfg: HvConfig) -> float:
    return hypervolume(archive.V[archive.unique_indices()], ref, cfg)


def _deduplicate(proposal, archive, sampler, ctx, rng):
    """Redraw candidates already archived (or repeated in the batch); returns the duplicate count."""
    seen = set()
    accepted_duplicates = 0
    for k in range(len(proposal.X)):
        for _ in range(DUPLICATE_RETRIES):
            key = proposal.X[k].tobytes()
            if key not in seen and not archive.contains(proposal.X[k]):
                break
            single = sampler.propose(ctx, 1, rng)
            proposal.X[k] = single.X[0]
            proposal.flags[k] = single.flags[0]
            if proposal.genotypes is not None:
                proposal.genotypes[k] = single.genotypes[0]
        key = proposal.X[k].tobytes()
        if key in seen or archive.contains(proposal.X[k]):
            accepted_duplicates += 1
        seen.add(key)
    return accepted_duplicates


def _initial_design(bench, rng, n):
    domain = bench.domain
    X = domain.sample_uniform(rng, n)
    if isinstance(bench, TabularBenchmark):
        seen = set()
        for k in range(n):
            for _ in range(DUPLICATE_RETRIES):
                if X[k].tobytes() not in seen:
                    break
                X[k] = domain.sample_uniform(rng, 1)[0]
            seen.add(X[k].tobytes())
    return X


def run_experiment(cfg: ExperimentConfig, benchmark=None) -> RunResult:
    """Run one optimization until ``cfg.budget`` evaluations are spent.

    Iteration 0 holds the uniform initial design. Each later iteration
    rebuilds the partition tree (unless backpropagation is enabled, which
    rebuilds every ``rebuild_every`` iterations), selects a leaf, and draws
    the batch inside it. Without partitioning the sampler sees the whole
    domain.
    """
    bench = benchmark if benchmark is not None else make_benchmark(cfg.benchmark)
    domain = bench.domain
    ref = bench.ref
    upper = bench.norm.upper
    rng = np.random.default_rng(cfg.seed)
    archive = Archive(domain, bench.n_objectives)
    result = RunResult(cfg.run_id, cfg.seed, [], archive, bench.hv_max)

    def record(iteration, leaf, hv_evals, started, flagged):
        hv = _archive_hv(archive, ref, cfg.hv)
        diff = None if bench.hv_max is None else log_hv_diff(bench.hv_max, hv)
        wall = (time.monotonic() - started) * 1000.0
        result.records.append(IterationRecord(iteration, len(archive), hv, diff, leaf, hv_evals,
                                              wall, flagged))
        return hv

    started = time.monotonic()
    X0 = _initial_design(bench, rng, min(cfg.n_init, cfg.budget))
    try:
        V0 = evaluate(bench, X0)
    except BenchmarkError as exc:
        raise ExperimentAborted(str(exc), X0, result) from exc
    archive.extend(X0, V0)
    current_hv = record(0, None, 0, started, 0)

    sampler = make_sampler(cfg.sampler)
    tree = None
    iteration = 0
    finite = isinstance(bench, TabularBenchmark)
    while len(archive) < cfg.budget:
        iteration += 1
        started = time.monotonic()
        n_new = min(cfg.batch, cfg.budget - len(archive))
        leaf, hv_evals = None, 0
        if cfg.use_partition:
            if tree is None or not cfg.backprop or (iteration - 1) % cfg.rebuild_every == 0:
                tree = build_tree(archive, cfg.partition, ref, cfg.hv)
            outcome = select(tree, cfg.selection, current_hv)
            leaf, hv_evals = outcome.leaf_id, outcome.hv_evaluations
        ctx = RegionContext(archive, domain, tree, leaf, ref, upper)
        proposal = sampler.propose(ctx, n_new, rng)
        duplicates = _deduplicate(proposal, archive, sampler, ctx, rng) if finite else 0
        try:
            V = evaluate(bench, proposal.X)
        except BenchmarkError as exc:
            raise ExperimentAborted(str(exc), proposal.X, result) from exc
        ids = archive.extend(proposal.X, V)
        sampler.observe(ctx, proposal, ids)
        if cfg.backprop and tree is not None:
            _backpropagate_new(tree, archive, ids)
        flagged = int(np.count_nonzero(proposal.flags)) + duplicates
        current_hv = record(iteration, leaf, hv_evals, started, flagged)
    result.tree = tree
    return result


def _backpropagate_new(tree: PartitionTree, archive: Archive, ids) -> None:
    fresh = [i for i in ids if not archive.duplicate_flags[i]]
    if not fresh:
        return
    leaves = tree.route(archive.X[fresh])
    for leaf in np.unique(leaves):
        members = [sid for sid, lf in zip(fresh, leaves) if lf == leaf]
        backpropagate(tree, tree.path_to(int(leaf)), members)


@dataclass
class RegionQualityResult:
    good: np.ndarray
    whole: np.ndarray
    bad: np.ndarray
    good_leaf: int
    bad_leaf: int
    fallbacks: int
    tree: PartitionTree = field(repr=False)


def region_quality_experiment(cfg: ExperimentConfig, probe_count: int = 50, repeats: int = 150,
                              benchmark=None) -> RegionQualityResult:
    """Hypervolume of random probe sets drawn from the good leaf, the whole space and the bad leaf.

    The tree is learned on the final archive of a run driven by ``cfg``;
    the leftmost leaf is the good region and the rightmost the bad one.
    """
    bench = benchmark if benchmark is not None else make_benchmark(cfg.benchmark)
    if bench.hv_max is None:
        raise ValueError("region experiment needs a complete benchmark")
    run = run_experiment(replace(cfg, use_partition=True), bench)
    tree = build_tree(run.archive, cfg.partition, bench.ref, cfg.hv)
    leaves = tree.leaves
    if len(leaves) < 2:
        raise ValueError("learned tree has a single leaf; nothing to compare")
    good_leaf, bad_leaf = leaves[0], leaves[-1]
    cap = 1000 * probe_count
    out = {"good": [], "whole": [], "bad": []}
    fallbacks = 0
    for r in range(repeats):
        rng = np.random.default_rng([cfg.seed, r])
        for name, leaf in (("good", good_leaf), ("whole", None), ("bad", bad_leaf)):
            X, fell_back = sample_random_region(tree, leaf, probe_count, cap, rng, bench.domain)
            fallbacks += fell_back
            out[name].append(hypervolume(evaluate(bench, X), bench.ref, cfg.hv))
    return RegionQualityResult(np.array(out["good"]), np.array(out["whole"]), np.array(out["bad"]),
                               good_leaf, bad_leaf, fallbacks, tree)
